//! Closed-form success probabilities and runtime bounds for the grid search,
//! plus Monte Carlo harnesses that measure the same quantities on the simulator.
//!
//! Closed forms take an integer draw-range size `d`: iteration counts are
//! drawn from `{0, ..., d - 1}`. The simulator's real budget `m` maps to
//! `d = ceil(m - 1) + 1`, which is `m` itself for integer `m`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid_search::{
    draw_upper, lambda_upper_bound, run_grid_search, DrawPolicy, GlobalOracle, GridProblem,
    RoundSampler, ScheduleParams,
};
use crate::rng::{derive_seed, trial_rng};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BucketStats {
    pub n: usize,
    pub m_marked: usize,
    /// `asin(sqrt(m_marked / n))`.
    pub theta: f64,
    /// `1 / sin(2 theta) = n / (2 sqrt((n - m) m))`, absent for degenerate buckets.
    pub alpha: Option<f64>,
}

impl BucketStats {
    pub fn new(n: usize, m_marked: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyRegister);
        }
        if m_marked > n {
            return Err(Error::IndexOutOfRange {
                index: m_marked,
                size: n,
            });
        }
        let theta = (m_marked as f64 / n as f64).sqrt().asin();
        let alpha = (m_marked > 0 && m_marked < n).then(|| {
            n as f64 / (2.0 * (((n - m_marked) * m_marked) as f64).sqrt())
        });
        Ok(Self {
            n,
            m_marked,
            theta,
            alpha,
        })
    }

    pub fn is_degenerate(&self) -> bool {
        self.alpha.is_none()
    }

    fn alpha_checked(&self) -> Result<f64> {
        self.alpha.ok_or(Error::Degenerate {
            n: self.n,
            marked: self.m_marked,
        })
    }
}

/// Stats for every bucket of a problem, counting local marks.
pub fn problem_stats(problem: &GridProblem) -> Result<Vec<BucketStats>> {
    problem
        .buckets()
        .iter()
        .map(|b| BucketStats::new(b.n(), b.marked().count()))
        .collect()
}

/// Mean of `sin^2((2j+1) theta)` over `j in {0, ..., d-1}` in closed form:
/// `1/2 - sin(4 d theta) / (4 d sin(2 theta))`.
pub fn bucket_average(d: usize, stats: &BucketStats) -> Result<f64> {
    if d == 0 {
        return Err(Error::InvalidArgument("draw range size must be positive".into()));
    }
    let alpha = stats.alpha_checked()?;
    let d = d as f64;
    Ok(0.5 - (4.0 * d * stats.theta).sin() * alpha / (4.0 * d))
}

/// As [`bucket_average`] but exact for degenerate buckets (0 when nothing is
/// marked, 1 when everything is).
pub fn bucket_average_any(d: usize, stats: &BucketStats) -> Result<f64> {
    match stats.m_marked {
        0 => Ok(0.0),
        m if m == stats.n => Ok(1.0),
        _ => bucket_average(d, stats),
    }
}

/// Average single-round success probability `P_m` with every bucket drawing
/// from `{0, ..., m-1}`.
pub fn avg_success_probability(m: usize, stats: &[BucketStats]) -> Result<f64> {
    stats
        .iter()
        .try_fold(1.0, |acc, s| Ok(acc * bucket_average(m, s)?))
}

/// `|sum_{j<m} (1 - cos((2j+1) theta)) - (m - sin(2 m theta) / (2 sin theta))|`.
pub fn trig_identity_residual(m: usize, theta: f64) -> Result<f64> {
    let turns = theta / std::f64::consts::PI;
    if (turns - turns.round()).abs() < 1e-12 {
        return Err(Error::SingularAngle { theta });
    }
    let lhs: f64 = (0..m)
        .map(|j| 1.0 - ((2 * j + 1) as f64 * theta).cos())
        .sum();
    let rhs = m as f64 - 0.5 * (2.0 * m as f64 * theta).sin() / theta.sin();
    Ok((lhs - rhs).abs())
}

/// `alpha* = max_i 1 / sin(2 theta_i)`; integer budgets above it guarantee `P_m >= 4^-k`.
pub fn lemma_threshold(stats: &[BucketStats]) -> Result<f64> {
    if stats.is_empty() {
        return Err(Error::NoBuckets);
    }
    stats
        .iter()
        .try_fold(f64::NEG_INFINITY, |acc, s| Ok(acc.max(s.alpha_checked()?)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RuntimeBounds {
    pub alpha_star: f64,
    /// `(k/2) (lambda / (lambda - 1)) alpha*`.
    pub pre_critical: f64,
    /// `k lambda alpha* / (2^(2k+1) (1 - (1 - 2^-2k) lambda))`.
    pub post_critical: f64,
    /// `ceil(log_lambda alpha*)`.
    pub critical_round: u64,
}

impl RuntimeBounds {
    /// Ceiling on the expected total Grover iterations of a run.
    pub fn total(&self) -> f64 {
        self.pre_critical + self.post_critical
    }
}

pub fn theorem_bounds(stats: &[BucketStats], lambda: f64) -> Result<RuntimeBounds> {
    let k = stats.len();
    if k == 0 {
        return Err(Error::NoBuckets);
    }
    let upper = lambda_upper_bound(k);
    if !(lambda > 1.0 && lambda < upper) {
        return Err(Error::LambdaOutOfRange { lambda, upper, k });
    }
    for s in stats {
        s.alpha_checked()?;
        if 4 * s.m_marked > 3 * s.n {
            return Err(Error::ClassicalRegime {
                n: s.n,
                marked: s.m_marked,
            });
        }
    }
    let alpha_star = lemma_threshold(stats)?;
    let kf = k as f64;
    let pre_critical = 0.5 * kf * lambda / (lambda - 1.0) * alpha_star;
    let four_k = 4f64.powi(k as i32);
    let post_critical =
        kf * lambda / (2.0 * four_k * (1.0 - (1.0 - 1.0 / four_k) * lambda)) * alpha_star;
    let critical_round = (alpha_star.ln() / lambda.ln()).ceil().max(0.0) as u64;
    Ok(RuntimeBounds {
        alpha_star,
        pre_critical,
        post_critical,
        critical_round,
    })
}

/// Closed-form success probability of one round at budget `m` under `policy`,
/// using the same integerization as the simulator.
pub fn round_success_probability(
    problem: &GridProblem,
    m: f64,
    policy: DrawPolicy,
) -> Result<f64> {
    problem.buckets().iter().try_fold(1.0, |acc, b| {
        let stats = BucketStats::new(b.n(), b.marked().count())?;
        let d = draw_upper(m, b.n(), policy) + 1;
        Ok(acc * bucket_average_any(d, &stats)?)
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub m: f64,
    pub range_sizes: Vec<usize>,
    pub trials: u64,
    pub successes: u64,
    pub empirical: f64,
    pub closed_form: f64,
    /// Binomial standard deviation of the empirical frequency under the closed form.
    pub sigma: f64,
    pub within_3_sigma: bool,
    /// `m` is an integer strictly above `alpha*`, where the closed form must reach `4^-k`.
    pub beyond_threshold: bool,
    pub lemma_floor: f64,
    pub lemma_violation: bool,
}

const CHUNK: u64 = 4096;

/// Empirical single-round success frequency against the closed form for each
/// budget in `m_values`. Work is split into fixed chunks with derived seeds, so
/// results do not depend on the thread count.
pub fn empirical_vs_closed_form(
    problem: &GridProblem,
    m_values: &[f64],
    trials: u64,
    policy: DrawPolicy,
    seed: u64,
) -> Result<Vec<ComparisonRow>> {
    if !matches!(problem.global_oracle(), GlobalOracle::Product) {
        return Err(Error::InvalidArgument(
            "closed-form comparison needs a product-mode problem".into(),
        ));
    }
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be positive".into()));
    }
    let stats = problem_stats(problem)?;
    let alpha_star = lemma_threshold(&stats).ok();
    let k = problem.k();
    let lemma_floor = 0.25f64.powi(k as i32);

    m_values
        .iter()
        .enumerate()
        .map(|(mi, &m)| {
            if !(m >= 1.0) {
                return Err(Error::InvalidArgument(format!("m must be at least 1, got {m}")));
            }
            let closed_form = round_success_probability(problem, m, policy)?;
            let m_seed = derive_seed(seed, mi as u64);
            let chunks = trials.div_ceil(CHUNK);
            let successes: u64 = (0..chunks)
                .into_par_iter()
                .map(|c| -> Result<u64> {
                    let mut rng = trial_rng(m_seed, c);
                    let mut sampler = RoundSampler::new(problem)?;
                    let count = CHUNK.min(trials - c * CHUNK);
                    Ok((0..count)
                        .filter(|_| problem.accepts(&sampler.sample(m, policy, &mut rng).1))
                        .count() as u64)
                })
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .sum();
            let empirical = successes as f64 / trials as f64;
            let sigma = (closed_form * (1.0 - closed_form) / trials as f64).sqrt();
            let within_3_sigma = (empirical - closed_form).abs() <= 3.0 * sigma + 1e-12;
            let beyond_threshold =
                m.fract() == 0.0 && alpha_star.is_some_and(|a| m > a);
            let lemma_violation = beyond_threshold
                && (closed_form < lemma_floor || empirical < lemma_floor - 3.0 * sigma);
            Ok(ComparisonRow {
                m,
                range_sizes: problem
                    .buckets()
                    .iter()
                    .map(|b| draw_upper(m, b.n(), policy) + 1)
                    .collect(),
                trials,
                successes,
                empirical,
                closed_form,
                sigma,
                within_3_sigma,
                beyond_threshold,
                lemma_floor,
                lemma_violation,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuntimeSummary {
    pub trials: u64,
    pub successes: u64,
    pub mean_total_iterations: f64,
    pub std_total_iterations: f64,
    pub mean_rounds: f64,
    pub max_rounds_used: usize,
}

/// Runs `trials` independent searches, trial `i` seeded with `derive_seed(seed, i)`.
pub fn runtime_experiment(
    problem: &GridProblem,
    lambda: f64,
    max_rounds: usize,
    policy: DrawPolicy,
    trials: u64,
    seed: u64,
) -> Result<RuntimeSummary> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be positive".into()));
    }
    let outcomes = (0..trials)
        .into_par_iter()
        .map(|i| {
            let params = ScheduleParams {
                lambda,
                max_rounds,
                seed: derive_seed(seed, i),
                policy,
            };
            run_grid_search(problem, params)
        })
        .collect::<Result<Vec<_>>>()?;
    let n = trials as f64;
    let iters: Vec<f64> = outcomes
        .iter()
        .map(|o| o.ledger.total_grover_iterations() as f64)
        .collect();
    let mean = iters.iter().sum::<f64>() / n;
    let var = iters.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    Ok(RuntimeSummary {
        trials,
        successes: outcomes.iter().filter(|o| o.success).count() as u64,
        mean_total_iterations: mean,
        std_total_iterations: var.sqrt(),
        mean_rounds: outcomes.iter().map(|o| o.rounds_used as f64).sum::<f64>() / n,
        max_rounds_used: outcomes.iter().map(|o| o.rounds_used).max().unwrap_or(0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid_search::{default_lambda, BucketSpec};
    use crate::grover::MarkedSet;
    use std::f64::consts::PI;

    // Independent per-bucket average by direct summation.
    fn direct_average(d: usize, theta: f64) -> f64 {
        (0..d)
            .map(|j| ((2 * j + 1) as f64 * theta).sin().powi(2))
            .sum::<f64>()
            / d as f64
    }

    #[test]
    fn bucket_stats_fields() {
        let s = BucketStats::new(64, 1).unwrap();
        assert!((s.alpha.unwrap() - 32.0 / 63f64.sqrt()).abs() < 1e-12);
        assert!((s.theta - (1.0f64 / 8.0).asin()).abs() < 1e-15);
        assert!(BucketStats::new(8, 0).unwrap().is_degenerate());
        assert!(BucketStats::new(8, 8).unwrap().is_degenerate());
        assert!(BucketStats::new(8, 9).is_err());
    }

    #[test]
    fn avg_success_examples() {
        let s = BucketStats::new(4, 1).unwrap();
        // (sin^2(pi/6) + sin^2(pi/2)) / 2
        let p = avg_success_probability(2, &[s]).unwrap();
        assert!((p - 0.625).abs() < 1e-12);
        let p2 = avg_success_probability(2, &[s, s]).unwrap();
        assert!((p2 - 0.625 * 0.625).abs() < 1e-12);
        assert!(avg_success_probability(2, &[BucketStats::new(4, 0).unwrap()]).is_err());
    }

    #[test]
    fn closed_form_matches_direct_sum() {
        for n in [2usize, 3, 7, 16, 64, 200, 256] {
            for mm in [1, n / 3, n / 2, n - 1] {
                if mm == 0 || mm >= n {
                    continue;
                }
                let s = BucketStats::new(n, mm).unwrap();
                for d in [1usize, 2, 3, 5, 17, 64, 129, 256] {
                    let closed = bucket_average(d, &s).unwrap();
                    let direct = direct_average(d, s.theta);
                    assert!((closed - direct).abs() < 1e-12, "n={n} m={mm} d={d}");
                }
            }
        }
    }

    #[test]
    fn trig_identity_examples() {
        for theta in [0.1, 0.7, 1.3, 2.9] {
            assert!(trig_identity_residual(1, theta).unwrap() < 1e-15);
        }
        assert!(trig_identity_residual(7, 0.3).unwrap() < 1e-12);
        assert!(trig_identity_residual(3, 0.0).is_err());
        assert!(trig_identity_residual(3, PI).is_err());
    }

    #[test]
    fn lemma_threshold_examples() {
        let a = lemma_threshold(&[BucketStats::new(64, 1).unwrap()]).unwrap();
        assert!((a - 4.031_621_045_431_756).abs() < 1e-9);
        let b = lemma_threshold(&[BucketStats::new(4, 2).unwrap()]).unwrap();
        assert!((b - 1.0).abs() < 1e-12);
        let s = BucketStats::new(16, 3).unwrap();
        assert_eq!(lemma_threshold(&[s, s, s]).unwrap(), s.alpha.unwrap());
        assert!(lemma_threshold(&[]).is_err());
    }

    #[test]
    fn theorem_bounds_example() {
        let s = BucketStats::new(64, 1).unwrap();
        let b = theorem_bounds(&[s], 7.0 / 6.0).unwrap();
        assert!((b.pre_critical - 3.5 * 32.0 / 63f64.sqrt()).abs() < 1e-9);
        assert!((b.pre_critical - 14.11).abs() < 0.01);
        // post: lambda / (8 (1 - 3/4 lambda)) alpha* = (7/6) / (8 * 1/8) alpha*
        assert!((b.post_critical - 7.0 / 6.0 * b.alpha_star).abs() < 1e-9);
        assert_eq!(
            b.critical_round,
            (b.alpha_star.ln() / (7.0f64 / 6.0).ln()).ceil() as u64
        );
    }

    #[test]
    fn theorem_bounds_linear_in_alpha() {
        // n = 4m gives alpha = 2/sqrt(3) for any m; n/m fixed, compare two regimes.
        let s1 = BucketStats::new(100, 1).unwrap();
        let s2 = BucketStats::new(400, 1).unwrap();
        let lam = default_lambda(1);
        let b1 = theorem_bounds(&[s1], lam).unwrap();
        let b2 = theorem_bounds(&[s2], lam).unwrap();
        let r = b2.alpha_star / b1.alpha_star;
        assert!((b2.pre_critical / b1.pre_critical - r).abs() < 1e-12);
        assert!((b2.post_critical / b1.post_critical - r).abs() < 1e-12);
    }

    #[test]
    fn theorem_bounds_errors() {
        let s = BucketStats::new(8, 1).unwrap();
        assert!(matches!(
            theorem_bounds(&[s], 1.5),
            Err(Error::LambdaOutOfRange { .. })
        ));
        assert!(matches!(
            theorem_bounds(&[BucketStats::new(8, 7).unwrap()], 1.1),
            Err(Error::ClassicalRegime { .. })
        ));
        assert!(matches!(
            theorem_bounds(&[BucketStats::new(8, 0).unwrap()], 1.1),
            Err(Error::Degenerate { .. })
        ));
    }

    #[test]
    fn alpha_inequality_on_lattice() {
        for n in 2..=256usize {
            for m in 1..n {
                if 4 * m > 3 * n {
                    break;
                }
                let s = BucketStats::new(n, m).unwrap();
                assert!(s.alpha.unwrap() <= (n as f64 / m as f64).sqrt() + 1e-12);
            }
        }
    }

    #[test]
    fn comparison_all_marked() {
        let p = GridProblem::product(vec![
            BucketSpec::new(MarkedSet::all(4).unwrap()),
            BucketSpec::new(MarkedSet::all(3).unwrap()),
        ])
        .unwrap();
        let rows = empirical_vs_closed_form(&p, &[1.0, 2.0, 3.5], 2000, DrawPolicy::Capped, 1)
            .unwrap();
        for r in rows {
            assert_eq!(r.closed_form, 1.0);
            assert_eq!(r.empirical, 1.0);
            assert!(r.within_3_sigma);
        }
    }

    #[test]
    fn comparison_n4_single_mark() {
        let p = GridProblem::product(vec![BucketSpec::new(MarkedSet::new(4, [1]).unwrap())])
            .unwrap();
        let rows =
            empirical_vs_closed_form(&p, &[2.0], 100_000, DrawPolicy::Capped, 77).unwrap();
        assert!((rows[0].closed_form - 0.625).abs() < 1e-12);
        assert!(rows[0].within_3_sigma, "{rows:?}");
        assert!(rows[0].beyond_threshold);
        assert!(!rows[0].lemma_violation);
    }

    #[test]
    fn comparison_rejects_predicate_problems() {
        let p = GridProblem::with_predicate(
            vec![BucketSpec::new(MarkedSet::new(4, [1]).unwrap())],
            |_| true,
        )
        .unwrap();
        assert!(empirical_vs_closed_form(&p, &[1.0], 10, DrawPolicy::Capped, 0).is_err());
    }
}
