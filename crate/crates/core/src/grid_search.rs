//! Parallel Grover registers with an adaptively scaled iteration budget.
//!
//! Each round draws an iteration count `j_i` per bucket, independently and
//! uniformly from `{0, ..., ceil(m - 1)}`, runs `j_i` Grover iterations on a
//! fresh uniform register for that bucket, measures every register and hands
//! the resulting tuple to the global oracle. On failure `m` is multiplied by
//! `lambda`. A mandatory round limit turns "no solution" into a failure signal.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grover::{MarkedSet, Register};
use crate::rng::{seeded, SimRng};

/// One search dimension: its size and tabulated local oracle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BucketSpec {
    marked: MarkedSet,
}

impl BucketSpec {
    pub fn new(marked: MarkedSet) -> Self {
        Self { marked }
    }

    pub fn from_predicate(n: usize, local_oracle: impl Fn(usize) -> bool) -> Result<Self> {
        Ok(Self::new(MarkedSet::from_predicate(n, local_oracle)?))
    }

    pub fn n(&self) -> usize {
        self.marked.size()
    }

    pub fn marked(&self) -> &MarkedSet {
        &self.marked
    }

    pub fn is_marked(&self, i: usize) -> bool {
        self.marked.contains(i)
    }
}

pub type TuplePredicate = Arc<dyn Fn(&[usize]) -> bool + Send + Sync>;

/// Acceptance test applied classically to the measured tuple.
#[derive(Clone)]
pub enum GlobalOracle {
    /// Accepts iff every coordinate is locally marked.
    Product,
    Predicate(TuplePredicate),
}

impl fmt::Debug for GlobalOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GlobalOracle::Product => f.write_str("Product"),
            GlobalOracle::Predicate(_) => f.write_str("Predicate(..)"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct GridProblem {
    buckets: Vec<BucketSpec>,
    global: GlobalOracle,
}

impl GridProblem {
    pub fn new(buckets: Vec<BucketSpec>, global: GlobalOracle) -> Result<Self> {
        if buckets.is_empty() {
            return Err(Error::NoBuckets);
        }
        Ok(Self { buckets, global })
    }

    /// Global oracle is the conjunction of the local ones.
    pub fn product(buckets: Vec<BucketSpec>) -> Result<Self> {
        Self::new(buckets, GlobalOracle::Product)
    }

    pub fn with_predicate(
        buckets: Vec<BucketSpec>,
        global: impl Fn(&[usize]) -> bool + Send + Sync + 'static,
    ) -> Result<Self> {
        Self::new(buckets, GlobalOracle::Predicate(Arc::new(global)))
    }

    pub fn k(&self) -> usize {
        self.buckets.len()
    }

    pub fn buckets(&self) -> &[BucketSpec] {
        &self.buckets
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.buckets.iter().map(BucketSpec::n).collect()
    }

    pub fn global_oracle(&self) -> &GlobalOracle {
        &self.global
    }

    pub fn accepts(&self, tuple: &[usize]) -> bool {
        debug_assert_eq!(tuple.len(), self.k());
        match &self.global {
            GlobalOracle::Product => tuple
                .iter()
                .zip(&self.buckets)
                .all(|(&y, b)| b.is_marked(y)),
            GlobalOracle::Predicate(f) => f(tuple),
        }
    }
}

/// What a bucket does once `m` exceeds `sqrt(n_i)`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DrawPolicy {
    /// Draw from `{0, ..., ceil(sqrt(n_i))}`.
    #[default]
    Capped,
    /// Skip the bucket: its register stays uniform (`j_i = 0`).
    StrictPaper,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleParams {
    pub lambda: f64,
    pub max_rounds: usize,
    pub seed: u64,
    #[serde(default)]
    pub policy: DrawPolicy,
}

impl ScheduleParams {
    /// Default `lambda` and round limit for `problem`.
    pub fn for_problem(problem: &GridProblem, seed: u64) -> Self {
        let lambda = default_lambda(problem.k());
        Self {
            lambda,
            max_rounds: default_max_rounds(&problem.sizes(), lambda),
            seed,
            policy: DrawPolicy::Capped,
        }
    }

    pub fn validate(&self, k: usize) -> Result<()> {
        let upper = lambda_upper_bound(k);
        if !(self.lambda > 1.0 && self.lambda < upper) {
            return Err(Error::LambdaOutOfRange {
                lambda: self.lambda,
                upper,
                k,
            });
        }
        if self.max_rounds == 0 {
            return Err(Error::ZeroMaxRounds);
        }
        Ok(())
    }
}

/// Exclusive upper limit `4^k / (4^k - 1)` for `lambda`.
pub fn lambda_upper_bound(k: usize) -> f64 {
    1.0 / (1.0 - 0.25f64.powi(k as i32))
}

/// Midpoint of `(1, 4^k / (4^k - 1))`.
pub fn default_lambda(k: usize) -> f64 {
    1.0 + 0.5 * (lambda_upper_bound(k) - 1.0)
}

/// `4 * ceil(log_lambda(max_i sqrt(n_i))) + 64`.
pub fn default_max_rounds(sizes: &[usize], lambda: f64) -> usize {
    let largest = sizes.iter().copied().max().unwrap_or(1).max(1) as f64;
    let stages = (largest.sqrt().ln() / lambda.ln()).ceil().max(0.0) as usize;
    4 * stages + 64
}

/// Largest iteration count that may be drawn for a bucket of size `n` at budget `m`.
pub fn draw_upper(m: f64, n: usize, policy: DrawPolicy) -> usize {
    let root = (n as f64).sqrt();
    if m <= root {
        (m - 1.0).ceil().max(0.0) as usize
    } else {
        match policy {
            DrawPolicy::Capped => root.ceil() as usize,
            DrawPolicy::StrictPaper => 0,
        }
    }
}

/// Exact query counts for one run.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryLedger {
    pub grover_iterations_per_bucket: Vec<u64>,
    pub global_oracle_calls: u64,
    pub rounds: u64,
}

impl QueryLedger {
    pub fn new(k: usize) -> Self {
        Self {
            grover_iterations_per_bucket: vec![0; k],
            global_oracle_calls: 0,
            rounds: 0,
        }
    }

    pub fn total_grover_iterations(&self) -> u64 {
        self.grover_iterations_per_bucket.iter().sum()
    }

    fn record(&mut self, draws: &[usize]) {
        for (c, &j) in self.grover_iterations_per_bucket.iter_mut().zip(draws) {
            *c += j as u64;
        }
        self.global_oracle_calls += 1;
        self.rounds += 1;
    }

    /// Adds another ledger of the same width into this one.
    pub fn absorb(&mut self, other: &QueryLedger) {
        if self.grover_iterations_per_bucket.len() < other.grover_iterations_per_bucket.len() {
            self.grover_iterations_per_bucket
                .resize(other.grover_iterations_per_bucket.len(), 0);
        }
        for (c, o) in self
            .grover_iterations_per_bucket
            .iter_mut()
            .zip(&other.grover_iterations_per_bucket)
        {
            *c += o;
        }
        self.global_oracle_calls += other.global_oracle_calls;
        self.rounds += other.rounds;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub success: bool,
    pub tuple: Option<Vec<usize>>,
    pub rounds_used: usize,
    pub final_m: f64,
    pub ledger: QueryLedger,
}

/// One executed round.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    pub m: f64,
    pub draws: Vec<usize>,
    pub tuple: Vec<usize>,
    pub accepted: bool,
}

/// Lazily computed `G^j |psi>` for one bucket; `states[j]` is built from `states[j-1]`.
struct StateCache {
    marked: MarkedSet,
    states: Vec<Register>,
}

impl StateCache {
    fn new(bucket: &BucketSpec) -> Result<Self> {
        Ok(Self {
            marked: bucket.marked().clone(),
            states: vec![Register::uniform(bucket.n())?],
        })
    }

    fn state(&mut self, j: usize) -> &Register {
        while self.states.len() <= j {
            let mut next = self.states[self.states.len() - 1].clone();
            next.grover_step(&self.marked)
                .expect("cache register and marked set share a size");
            self.states.push(next);
        }
        &self.states[j]
    }
}

/// Draws and measures rounds for a fixed problem, reusing iterated register
/// states across rounds. Results are identical to preparing each register
/// from scratch.
pub struct RoundSampler<'a> {
    problem: &'a GridProblem,
    caches: Vec<StateCache>,
}

impl<'a> RoundSampler<'a> {
    pub fn new(problem: &'a GridProblem) -> Result<Self> {
        let caches = problem
            .buckets()
            .iter()
            .map(StateCache::new)
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { problem, caches })
    }

    /// Returns `(draws, tuple)` for one round at budget `m`.
    pub fn sample<R: Rng + ?Sized>(
        &mut self,
        m: f64,
        policy: DrawPolicy,
        rng: &mut R,
    ) -> (Vec<usize>, Vec<usize>) {
        let k = self.problem.k();
        let mut draws = Vec::with_capacity(k);
        let mut tuple = Vec::with_capacity(k);
        for (bucket, cache) in self.problem.buckets().iter().zip(self.caches.iter_mut()) {
            let upper = draw_upper(m, bucket.n(), policy);
            let j = rng.gen_range(0..=upper);
            let y = cache.state(j).measure(rng);
            draws.push(j);
            tuple.push(y);
        }
        (draws, tuple)
    }
}

/// A single round at budget `m`: returns the measured tuple and the ledger delta.
pub fn run_round<R: Rng + ?Sized>(
    problem: &GridProblem,
    m: f64,
    policy: DrawPolicy,
    rng: &mut R,
) -> Result<(Vec<usize>, QueryLedger)> {
    if !(m >= 1.0) {
        return Err(Error::InvalidArgument(format!("m must be at least 1, got {m}")));
    }
    let (draws, tuple) = RoundSampler::new(problem)?.sample(m, policy, rng);
    let mut delta = QueryLedger::new(problem.k());
    delta.record(&draws);
    Ok((tuple, delta))
}

/// Step-by-step execution of the adaptive schedule.
pub struct GridSearchRun<'a> {
    problem: &'a GridProblem,
    params: ScheduleParams,
    sampler: RoundSampler<'a>,
    rng: SimRng,
    m: f64,
    ledger: QueryLedger,
    found: Option<Vec<usize>>,
}

impl<'a> GridSearchRun<'a> {
    pub fn new(problem: &'a GridProblem, params: ScheduleParams) -> Result<Self> {
        params.validate(problem.k())?;
        Ok(Self {
            problem,
            params,
            sampler: RoundSampler::new(problem)?,
            rng: seeded(params.seed),
            m: 1.0,
            ledger: QueryLedger::new(problem.k()),
            found: None,
        })
    }

    pub fn is_finished(&self) -> bool {
        self.found.is_some() || self.ledger.rounds as usize >= self.params.max_rounds
    }

    /// Runs one round unless the run is finished.
    pub fn next_round(&mut self) -> Option<RoundRecord> {
        if self.is_finished() {
            return None;
        }
        let m = self.m;
        let (draws, tuple) = self.sampler.sample(m, self.params.policy, &mut self.rng);
        self.ledger.record(&draws);
        let accepted = self.problem.accepts(&tuple);
        if accepted {
            self.found = Some(tuple.clone());
        } else {
            self.m *= self.params.lambda;
        }
        Some(RoundRecord {
            m,
            draws,
            tuple,
            accepted,
        })
    }

    pub fn finish(mut self) -> SearchOutcome {
        while self.next_round().is_some() {}
        SearchOutcome {
            success: self.found.is_some(),
            tuple: self.found,
            rounds_used: self.ledger.rounds as usize,
            final_m: self.m,
            ledger: self.ledger,
        }
    }
}

/// Runs the adaptive schedule to success or `max_rounds`.
pub fn run_grid_search(problem: &GridProblem, params: ScheduleParams) -> Result<SearchOutcome> {
    Ok(GridSearchRun::new(problem, params)?.finish())
}
