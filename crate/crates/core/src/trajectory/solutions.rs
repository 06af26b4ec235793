//! Classical enumeration of solution paths for a cost range.
//!
//! Used to build oracles for the quantum search layer and to check its
//! answers on desk-scale grids.

use rayon::prelude::*;

use super::cost::CostModel;
use super::grid::Shape;
use crate::error::{Error, Result};
use crate::grover::MarkedSet;

pub const DEFAULT_ENUMERATION_CAP: u128 = 10_000_000;

/// Paths with `a < cost < b` under `cost`, enumerated within `cap`.
#[derive(Clone, Copy)]
pub struct SolutionSetQuery<'a> {
    pub bounds: (f64, f64),
    pub cost: &'a dyn CostModel,
    pub cap: u128,
}

impl<'a> SolutionSetQuery<'a> {
    pub fn new(cost: &'a dyn CostModel, a: f64, b: f64) -> Self {
        Self {
            bounds: (a, b),
            cost,
            cap: DEFAULT_ENUMERATION_CAP,
        }
    }

    pub fn with_cap(mut self, cap: u128) -> Self {
        self.cap = cap;
        self
    }
}

/// Strict range test. NaN never lies in a range.
pub fn in_range(c: f64, a: f64, b: f64) -> bool {
    a < c && c < b
}

/// All solution paths in lexicographic order.
pub fn enumerate_solution_paths(q: &SolutionSetQuery<'_>) -> Result<Vec<Vec<usize>>> {
    let (a, b) = q.bounds;
    if !(a < b) {
        return Err(Error::InvalidInterval { a, b });
    }
    let shape = q.cost.shape();
    let total = shape.check_cap(q.cap)?;
    let hits = (0..total)
        .into_par_iter()
        .map(|i| {
            let p = shape.path_at(i);
            q.cost.cost(&p).map(|c| in_range(c, a, b).then_some(p))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(hits.into_iter().flatten().collect())
}

/// Per-column projections of `solutions`.
pub fn project_marked_sets(shape: &Shape, solutions: &[Vec<usize>]) -> Result<Vec<MarkedSet>> {
    let mut masks: Vec<Vec<bool>> = shape.sizes().iter().map(|&n| vec![false; n]).collect();
    for p in solutions {
        for (mask, &y) in masks.iter_mut().zip(p) {
            mask[y] = true;
        }
    }
    masks
        .into_iter()
        .map(|m| MarkedSet::from_predicate(m.len(), |i| m[i]))
        .collect()
}

/// Local marked sets: value `v` is marked in column `i` iff some solution path has `p_i = v`.
pub fn derive_local_marked_sets(q: &SolutionSetQuery<'_>) -> Result<Vec<MarkedSet>> {
    project_marked_sets(q.cost.shape(), &enumerate_solution_paths(q)?)
}

/// Fraction of the product of local marked sets whose cost falls outside the
/// range; 0 means the product oracle is exact. An empty product gives 0.
pub fn cross_path_rate(q: &SolutionSetQuery<'_>) -> Result<f64> {
    let solutions = enumerate_solution_paths(q)?;
    let marked = project_marked_sets(q.cost.shape(), &solutions)?;
    let product: f64 = marked.iter().map(|m| m.count() as f64).product();
    if product == 0.0 {
        return Ok(0.0);
    }
    Ok((product - solutions.len() as f64) / product)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub path: Vec<usize>,
    pub cost: f64,
}

/// Cheapest path, ties broken by lexicographic order; NaN costs count as `+inf`.
pub fn brute_force_minimum(cost: &dyn CostModel, cap: u128) -> Result<Minimum> {
    let shape = cost.shape();
    let total = shape.check_cap(cap)?;
    let best = (0..total)
        .into_par_iter()
        .map(|i| {
            let c = cost.cost(&shape.path_at(i))?;
            Ok((if c.is_nan() { f64::INFINITY } else { c }, i))
        })
        .try_reduce(
            || (f64::INFINITY, usize::MAX),
            |x, y| Ok(if y.0 < x.0 || (y.0 == x.0 && y.1 < x.1) { y } else { x }),
        )?;
    let index = if best.1 == usize::MAX { 0 } else { best.1 };
    Ok(Minimum {
        path: shape.path_at(index),
        cost: best.0,
    })
}
