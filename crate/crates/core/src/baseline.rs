//! Classical exhaustive search with exact oracle-call counts.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::grid_search::GridProblem;
use crate::trajectory::Shape;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanOutcome {
    /// First accepted tuple in lexicographic order.
    pub found: Option<Vec<usize>>,
    /// Global-oracle evaluations performed.
    pub evaluations: u64,
    /// Tuples accepted among those evaluated.
    pub accepted: u64,
}

/// Number of global-oracle calls a full scan makes: `prod n_i`.
pub fn full_scan_size(sizes: &[usize]) -> u128 {
    sizes
        .iter()
        .try_fold(1u128, |acc, &n| acc.checked_mul(n as u128))
        .unwrap_or(u128::MAX)
}

fn scan(problem: &GridProblem, stop_at_first: bool, cap: u128) -> Result<ScanOutcome> {
    let shape = Shape::new(problem.sizes())?;
    let total = shape.check_cap(cap)?;
    let mut out = ScanOutcome {
        found: None,
        evaluations: 0,
        accepted: 0,
    };
    // odometer walk in lexicographic order
    let sizes = shape.sizes();
    let mut tuple = vec![0usize; sizes.len()];
    for _ in 0..total {
        out.evaluations += 1;
        if problem.accepts(&tuple) {
            out.accepted += 1;
            if out.found.is_none() {
                out.found = Some(tuple.clone());
            }
            if stop_at_first {
                break;
            }
        }
        for i in (0..tuple.len()).rev() {
            tuple[i] += 1;
            if tuple[i] < sizes[i] {
                break;
            }
            tuple[i] = 0;
        }
    }
    Ok(out)
}

/// Scans tuples in lexicographic order until the global oracle accepts one.
pub fn exhaustive_search(problem: &GridProblem, cap: u128) -> Result<ScanOutcome> {
    scan(problem, true, cap)
}

/// Evaluates the global oracle on every tuple.
pub fn full_scan(problem: &GridProblem, cap: u128) -> Result<ScanOutcome> {
    scan(problem, false, cap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid_search::BucketSpec;
    use crate::grover::MarkedSet;

    fn problem(sizes: &[usize], marked: &[usize]) -> GridProblem {
        GridProblem::product(
            sizes
                .iter()
                .zip(marked)
                .map(|(&n, &m)| BucketSpec::new(MarkedSet::new(n, [m]).unwrap()))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn full_scan_counts_every_tuple() {
        let p = problem(&[4, 5, 6], &[1, 2, 3]);
        let out = full_scan(&p, 1_000).unwrap();
        assert_eq!(out.evaluations, 120);
        assert_eq!(out.accepted, 1);
        assert_eq!(out.found, Some(vec![1, 2, 3]));
        assert_eq!(full_scan_size(&[4, 5, 6]), 120);
    }

    #[test]
    fn first_hit_stops_early() {
        let p = problem(&[4, 5], &[1, 2]);
        let out = exhaustive_search(&p, 1_000).unwrap();
        // rank of (1, 2) is 7, so 8 evaluations
        assert_eq!(out.evaluations, 8);
        assert_eq!(out.found, Some(vec![1, 2]));
    }

    #[test]
    fn no_solution_and_cap() {
        let p = GridProblem::product(vec![BucketSpec::new(MarkedSet::empty(3).unwrap())]).unwrap();
        let out = exhaustive_search(&p, 10).unwrap();
        assert_eq!(out.found, None);
        assert_eq!(out.evaluations, 3);
        assert!(full_scan(&problem(&[4, 4], &[0, 0]), 15).is_err());
    }
}
