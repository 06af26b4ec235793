//! Binary search on cost bounds.
//!
//! Each round halves the bracket `(a, b)` at `mid`: a grid search with the
//! range oracle for `(a, mid)` is tried first, then `(mid, b)`. The bracket
//! shrinks toward the lower branch on success, toward the upper branch
//! otherwise, and the run stops early when neither branch finds a path.

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::baseline;
use crate::error::{Error, Result};
use crate::grid_search::{
    run_grid_search, BucketSpec, DrawPolicy, GridProblem, QueryLedger, ScheduleParams,
    TuplePredicate,
};
use crate::rng::derive_seed;
use crate::trajectory::solutions::{
    enumerate_solution_paths, in_range, project_marked_sets, SolutionSetQuery,
};
use crate::trajectory::CostModel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundInterval {
    pub a: f64,
    pub b: f64,
}

impl BoundInterval {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a < b) || a.is_nan() || b.is_nan() {
            return Err(Error::InvalidInterval { a, b });
        }
        Ok(Self { a, b })
    }

    pub fn width(&self) -> f64 {
        self.b - self.a
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.a + self.b)
    }

    /// Membership in the closed interval `[a, b]`.
    pub fn closure_contains(&self, c: f64) -> bool {
        self.a <= c && c <= self.b
    }
}

/// Accepts a tuple iff `a < cost < b`; evaluation errors reject.
pub fn range_oracle(cost: Arc<dyn CostModel>, a: f64, b: f64) -> Result<TuplePredicate> {
    BoundInterval::new(a, b)?;
    Ok(Arc::new(move |t: &[usize]| {
        cost.cost(t).map(|c| in_range(c, a, b)).unwrap_or(false)
    }))
}

/// Number of resamples before giving up on drawing a finite-cost path.
pub const UPPER_BOUND_ATTEMPTS: usize = 10_000;

/// Cost of a uniformly random path, redrawn while the cost is not finite.
pub fn initial_upper_bound<R: Rng + ?Sized>(cost: &dyn CostModel, rng: &mut R) -> Result<f64> {
    let sizes = cost.shape().sizes().to_vec();
    for _ in 0..UPPER_BOUND_ATTEMPTS {
        let path: Vec<usize> = sizes.iter().map(|&n| rng.gen_range(0..n)).collect();
        let c = cost.cost(&path)?;
        if c.is_finite() {
            return Ok(c);
        }
    }
    Err(Error::NoFinitePath {
        attempts: UPPER_BOUND_ATTEMPTS,
    })
}

/// A grid problem for one range together with, when known, whether any path satisfies it.
pub struct BranchProblem {
    pub problem: GridProblem,
    pub has_solution: Option<bool>,
}

/// Builds the search problem for a range `(a, b)`.
pub trait ProblemFactory {
    fn build(&self, a: f64, b: f64) -> Result<BranchProblem>;
}

impl<F> ProblemFactory for F
where
    F: Fn(f64, f64) -> Result<BranchProblem>,
{
    fn build(&self, a: f64, b: f64) -> Result<BranchProblem> {
        self(a, b)
    }
}

/// Local oracles are the per-column projections of the solution set; the
/// global oracle is the range predicate itself.
pub struct TrajectoryFactory {
    cost: Arc<dyn CostModel>,
    cap: u128,
}

impl TrajectoryFactory {
    pub fn new(cost: Arc<dyn CostModel>, cap: u128) -> Self {
        Self { cost, cap }
    }
}

impl ProblemFactory for TrajectoryFactory {
    fn build(&self, a: f64, b: f64) -> Result<BranchProblem> {
        let q = SolutionSetQuery::new(self.cost.as_ref(), a, b).with_cap(self.cap);
        let solutions = enumerate_solution_paths(&q)?;
        let marked = project_marked_sets(self.cost.shape(), &solutions)?;
        let buckets = marked.into_iter().map(BucketSpec::new).collect();
        let oracle = range_oracle(self.cost.clone(), a, b)?;
        Ok(BranchProblem {
            problem: GridProblem::new(buckets, crate::grid_search::GlobalOracle::Predicate(oracle))?,
            has_solution: Some(!solutions.is_empty()),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InnerSearch {
    /// Deterministic lexicographic scan of the whole product.
    Exhaustive { cap: u128 },
    /// Adaptive Grover grid search; `None` fields take the per-problem defaults.
    Grover {
        lambda: Option<f64>,
        max_rounds: Option<usize>,
        policy: DrawPolicy,
    },
}

impl Default for InnerSearch {
    fn default() -> Self {
        InnerSearch::Grover {
            lambda: None,
            max_rounds: None,
            policy: DrawPolicy::Capped,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BisectParams {
    pub max_count: usize,
    /// Added to the upper end of whichever branch is tested.
    pub epsilon: f64,
    pub seed: u64,
    pub inner: InnerSearch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Lower,
    Upper,
    Neither,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchAttempt {
    /// Open range handed to the oracle.
    pub range: (f64, f64),
    pub success: bool,
    pub tuple: Option<Vec<usize>>,
    pub ledger: QueryLedger,
    /// Whether the range holds any path, when the factory can tell.
    pub has_solution: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BisectRound {
    pub round: usize,
    pub interval: BoundInterval,
    pub mid: f64,
    pub lower: BranchAttempt,
    pub upper: Option<BranchAttempt>,
    pub branch: Branch,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub path: Vec<usize>,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BisectResult {
    pub interval: BoundInterval,
    pub rounds: usize,
    pub witness: Option<Witness>,
    pub trace: Vec<BisectRound>,
}

fn attempt(
    factory: &dyn ProblemFactory,
    range: (f64, f64),
    inner: &InnerSearch,
    seed: u64,
) -> Result<BranchAttempt> {
    let BranchProblem {
        problem,
        has_solution,
    } = factory.build(range.0, range.1)?;
    let (success, tuple, ledger) = match *inner {
        InnerSearch::Exhaustive { cap } => {
            let scan = baseline::exhaustive_search(&problem, cap)?;
            let ledger = QueryLedger {
                grover_iterations_per_bucket: vec![0; problem.k()],
                global_oracle_calls: scan.evaluations,
                rounds: 0,
            };
            (scan.found.is_some(), scan.found, ledger)
        }
        InnerSearch::Grover {
            lambda,
            max_rounds,
            policy,
        } => {
            let mut params = ScheduleParams::for_problem(&problem, seed);
            if let Some(l) = lambda {
                params.lambda = l;
            }
            if let Some(r) = max_rounds {
                params.max_rounds = r;
            }
            params.policy = policy;
            let out = run_grid_search(&problem, params)?;
            (out.success, out.tuple, out.ledger)
        }
    };
    Ok(BranchAttempt {
        range,
        success,
        tuple,
        ledger,
        has_solution,
    })
}

/// Runs up to `max_count` halving rounds from `(a0, b0)`.
pub fn run_bisect(
    factory: &dyn ProblemFactory,
    cost: &dyn CostModel,
    a0: f64,
    b0: f64,
    params: &BisectParams,
) -> Result<BisectResult> {
    if params.max_count == 0 {
        return Err(Error::ZeroMaxCount);
    }
    if !(params.epsilon >= 0.0 && params.epsilon.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "epsilon must be a non-negative number, got {}",
            params.epsilon
        )));
    }
    let mut interval = BoundInterval::new(a0, b0)?;
    let mut witness: Option<Witness> = None;
    let mut trace = Vec::new();

    let mut keep = |tuple: &Option<Vec<usize>>| -> Result<()> {
        if let Some(t) = tuple {
            let c = cost.cost(t)?;
            if witness.as_ref().is_none_or(|w| c < w.cost) {
                witness = Some(Witness {
                    path: t.clone(),
                    cost: c,
                });
            }
        }
        Ok(())
    };

    for round in 0..params.max_count {
        let mid = interval.mid();
        let seed = |branch: u64| derive_seed(params.seed, 2 * round as u64 + branch);
        let lower = attempt(
            factory,
            (interval.a, mid + params.epsilon),
            &params.inner,
            seed(0),
        )?;
        keep(&lower.tuple)?;
        let before = interval;
        let (upper, branch) = if lower.success {
            interval.b = mid;
            (None, Branch::Lower)
        } else {
            let upper = attempt(
                factory,
                (mid, interval.b + params.epsilon),
                &params.inner,
                seed(1),
            )?;
            keep(&upper.tuple)?;
            let branch = if upper.success {
                interval.a = mid;
                Branch::Upper
            } else {
                Branch::Neither
            };
            (Some(upper), branch)
        };
        trace.push(BisectRound {
            round: round + 1,
            interval: before,
            mid,
            lower,
            upper,
            branch,
        });
        if branch == Branch::Neither {
            break;
        }
    }

    Ok(BisectResult {
        interval,
        rounds: trace.len(),
        witness,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use crate::trajectory::{SeparableCost, TableCost};

    fn toy() -> Arc<dyn CostModel> {
        Arc::new(SeparableCost::new(vec![(1..=8).map(f64::from).collect()]).unwrap())
    }

    fn exhaustive(max_count: usize) -> BisectParams {
        BisectParams {
            max_count,
            epsilon: 0.0,
            seed: 7,
            inner: InnerSearch::Exhaustive { cap: 1_000 },
        }
    }

    #[test]
    fn range_oracle_truth_tables() {
        let c = toy();
        let f = range_oracle(c.clone(), 0.0, 4.0).unwrap();
        let accepted: Vec<usize> = (0..8).filter(|&x| f(&[x])).collect();
        assert_eq!(accepted, vec![0, 1, 2]);
        let g = range_oracle(c.clone(), 1.0, 2.0).unwrap();
        assert!((0..8).all(|x| !g(&[x])));
        // endpoints excluded
        let h = range_oracle(c.clone(), 3.0, 5.0).unwrap();
        assert!(!h(&[2]) && h(&[3]) && !h(&[4]));
        assert!(range_oracle(c, 2.0, 2.0).is_err());
    }

    #[test]
    fn toy_trace_by_hand() {
        let c = toy();
        let factory = TrajectoryFactory::new(c.clone(), 1_000);
        let r = run_bisect(&factory, c.as_ref(), 0.0, 8.0, &exhaustive(3)).unwrap();
        assert_eq!(r.interval, BoundInterval { a: 0.0, b: 2.0 });
        assert_eq!(r.rounds, 3);
        let branches: Vec<Branch> = r.trace.iter().map(|t| t.branch).collect();
        assert_eq!(branches, vec![Branch::Lower, Branch::Lower, Branch::Neither]);
        assert_eq!(r.trace[0].lower.range, (0.0, 4.0));
        assert_eq!(r.trace[1].lower.range, (0.0, 2.0));
        assert_eq!(r.trace[2].lower.range, (0.0, 1.0));
        assert_eq!(r.trace[2].upper.as_ref().unwrap().range, (1.0, 2.0));
        assert_eq!(r.trace[2].upper.as_ref().unwrap().has_solution, Some(false));
        let w = r.witness.unwrap();
        assert_eq!((w.path, w.cost), (vec![0], 1.0));
    }

    #[test]
    fn all_lower_rounds_halve_width() {
        // every cost sits below any midpoint reached in 4 rounds
        let c: Arc<dyn CostModel> = Arc::new(SeparableCost::new(vec![vec![0.5, 0.7]]).unwrap());
        let factory = TrajectoryFactory::new(c.clone(), 1_000);
        let r = run_bisect(&factory, c.as_ref(), 0.0, 64.0, &exhaustive(4)).unwrap();
        assert_eq!(r.rounds, 4);
        assert_eq!(r.interval.width(), 64.0 / 16.0);
    }

    #[test]
    fn upper_branch_moves_a() {
        let c: Arc<dyn CostModel> = Arc::new(SeparableCost::new(vec![vec![6.5, 7.0]]).unwrap());
        let factory = TrajectoryFactory::new(c.clone(), 1_000);
        let r = run_bisect(&factory, c.as_ref(), 0.0, 8.0, &exhaustive(2)).unwrap();
        assert_eq!(r.trace[0].branch, Branch::Upper);
        assert_eq!(r.interval, BoundInterval { a: 6.0, b: 8.0 });
    }

    #[test]
    fn epsilon_widens_tested_branch() {
        let c = toy();
        let factory = TrajectoryFactory::new(c.clone(), 1_000);
        let params = BisectParams {
            epsilon: 0.25,
            ..exhaustive(3)
        };
        let r = run_bisect(&factory, c.as_ref(), 0.0, 8.0, &params).unwrap();
        assert_eq!(r.trace[2].lower.range, (0.0, 1.25));
        // cost 1 now lies in (0, 1.25)
        assert_eq!(r.trace[2].branch, Branch::Lower);
        assert_eq!(r.interval, BoundInterval { a: 0.0, b: 1.0 });
    }

    #[test]
    fn rejects_bad_arguments() {
        let c = toy();
        let factory = TrajectoryFactory::new(c.clone(), 1_000);
        assert!(matches!(
            run_bisect(&factory, c.as_ref(), 0.0, 8.0, &exhaustive(0)),
            Err(Error::ZeroMaxCount)
        ));
        assert!(run_bisect(&factory, c.as_ref(), 8.0, 8.0, &exhaustive(1)).is_err());
    }

    #[test]
    fn grover_inner_search_is_seeded_and_monotone() {
        let c = toy();
        let factory = TrajectoryFactory::new(c.clone(), 1_000);
        let params = BisectParams {
            max_count: 6,
            epsilon: 0.0,
            seed: 11,
            inner: InnerSearch::default(),
        };
        let r1 = run_bisect(&factory, c.as_ref(), 0.0, 8.0, &params).unwrap();
        let r2 = run_bisect(&factory, c.as_ref(), 0.0, 8.0, &params).unwrap();
        assert_eq!(r1, r2);
        for w in r1.trace.windows(2) {
            assert!(w[1].interval.a >= w[0].interval.a && w[1].interval.b <= w[0].interval.b);
        }
        assert!(r1.interval.closure_contains(1.0));
    }

    #[test]
    fn initial_upper_bound_cases() {
        let c = toy();
        let mut rng = seeded(3);
        for _ in 0..50 {
            let b0 = initial_upper_bound(c.as_ref(), &mut rng).unwrap();
            assert!((1.0..=8.0).contains(&b0) && b0.fract() == 0.0);
        }
        let a = initial_upper_bound(c.as_ref(), &mut seeded(9)).unwrap();
        let b = initial_upper_bound(c.as_ref(), &mut seeded(9)).unwrap();
        assert_eq!(a, b);
        let single = SeparableCost::new(vec![vec![4.5]]).unwrap();
        assert_eq!(initial_upper_bound(&single, &mut rng).unwrap(), 4.5);
        let never = TableCost::new(crate::trajectory::Shape::new(vec![2]).unwrap(), vec![f64::INFINITY; 2])
            .unwrap();
        assert!(matches!(
            initial_upper_bound(&never, &mut rng),
            Err(Error::NoFinitePath { .. })
        ));
    }
}
