//! Path costs.
//!
//! [`CostModel`] is the interface every search layer consumes. The
//! brachistochrone model integrates the travel time along the interpolated
//! curve; [`SeparableCost`] and [`TableCost`] cover toy problems and cached
//! desk-scale grids.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::{Grid, Shape};
use super::interp::{Interpolant, Interpolation};
use super::quadrature::{integrate, QuadratureConfig, Singularity};
use crate::error::{Error, Result};

pub trait CostModel: Send + Sync {
    fn shape(&self) -> &Shape;

    /// Cost of `path`; `+inf` marks a path with no admissible curve.
    fn cost(&self, path: &[usize]) -> Result<f64>;
}

pub const DEFAULT_GRAVITY: f64 = 9.8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BrachistochroneConfig {
    /// m/s^2
    pub g: f64,
    pub quadrature: QuadratureConfig,
    pub interpolation: Interpolation,
    /// Interior sample points per smooth piece used to reject curves that dip to `y <= 0`.
    pub positivity_samples: usize,
    /// Curves whose interior minimum is at or below this height count as touching the floor.
    pub contact_tol: f64,
}

impl Default for BrachistochroneConfig {
    fn default() -> Self {
        Self {
            g: DEFAULT_GRAVITY,
            quadrature: QuadratureConfig::default(),
            interpolation: Interpolation::Lagrange,
            positivity_samples: 512,
            contact_tol: 1e-9,
        }
    }
}

impl BrachistochroneConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.g > 0.0 && self.g.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "gravity must be positive, got {}",
                self.g
            )));
        }
        if !(self.contact_tol >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "contact_tol must be non-negative, got {}",
                self.contact_tol
            )));
        }
        self.quadrature.validate()
    }
}

/// `pi sqrt(1 + 4/pi^2) / sqrt(g)`: time along the straight line from `(0, 2)` to `(pi, 0)`.
pub fn straight_line_time(g: f64) -> f64 {
    let pi = std::f64::consts::PI;
    pi * (1.0 + 4.0 / (pi * pi)).sqrt() / g.sqrt()
}

/// `pi / sqrt(g)`: the cycloid optimum of the same travel-time functional,
/// a lower bound for every admissible curve.
pub fn cycloid_time(g: f64) -> f64 {
    std::f64::consts::PI / g.sqrt()
}

/// Smallest value of `curve` on the open interval `(a, b)`: dense sampling,
/// then golden-section refinement when the lowest sample is a local minimum
/// away from both ends (an end minimum is the boundary value and handled there).
fn interior_minimum(curve: &Interpolant, a: f64, b: f64, samples: usize) -> f64 {
    let h = (b - a) / (samples + 1) as f64;
    let (i_min, y_min) = (1..=samples)
        .map(|i| (i, curve.value(a + h * i as f64)))
        .fold((0, f64::INFINITY), |acc, s| if s.1 < acc.1 { s } else { acc });
    if i_min <= 1 || i_min >= samples {
        return y_min;
    }
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let (mut lo, mut hi) = (a + h * (i_min - 1) as f64, a + h * (i_min + 1) as f64);
    for _ in 0..60 {
        let x1 = hi - phi * (hi - lo);
        let x2 = lo + phi * (hi - lo);
        if curve.value(x1) < curve.value(x2) {
            hi = x2;
        } else {
            lo = x1;
        }
    }
    y_min.min(curve.value(0.5 * (lo + hi)))
}

fn positive_inside(curve: &Interpolant, cfg: &BrachistochroneConfig) -> bool {
    match curve {
        Interpolant::PiecewiseLinear { knots } => knots[1..knots.len() - 1]
            .iter()
            .all(|&(_, y)| y > cfg.contact_tol),
        Interpolant::Polynomial { knots, .. } => {
            let (a, b) = curve.x_range();
            let (ya, yb) = (knots[0].1, knots[knots.len() - 1].1);
            // a zero end value needs the curve to rise into the interval
            interior_minimum(curve, a, b, cfg.positivity_samples) > cfg.contact_tol
                && ya >= 0.0
                && yb >= 0.0
                && (ya > 0.0 || curve.slope(a) > 0.0)
                && (yb > 0.0 || curve.slope(b) < 0.0)
        }
    }
}

/// Travel time `int sqrt((1 + y'^2) / (2 g y)) dx` along the interpolated path.
///
/// Curves that are not strictly positive on the open interval, or that come
/// within `contact_tol` of the floor, get `+inf`.
pub fn brachistochrone_cost(grid: &Grid, path: &[usize], cfg: &BrachistochroneConfig) -> Result<f64> {
    let curve = Interpolant::new(grid.knots(path)?, cfg.interpolation);
    travel_time(&curve, cfg)
}

pub fn travel_time(curve: &Interpolant, cfg: &BrachistochroneConfig) -> Result<f64> {
    cfg.validate()?;
    if !positive_inside(curve, cfg) {
        return Ok(f64::INFINITY);
    }
    let two_g = 2.0 * cfg.g;
    let integrand = |x: f64| {
        let y = curve.value(x);
        if y <= 0.0 {
            return f64::NAN;
        }
        let s = curve.slope(x);
        ((1.0 + s * s) / (two_g * y)).sqrt()
    };
    // pieces always end on knots; a zero knot ordinate is an integrable singularity
    let zero_at = |x: f64| curve.knots().iter().any(|&(kx, ky)| kx == x && ky == 0.0);
    let mut total = 0.0;
    for (a, b) in curve.smooth_pieces() {
        let singular = match (zero_at(a), zero_at(b)) {
            (false, false) => Singularity::None,
            (true, false) => Singularity::Left,
            (false, true) => Singularity::Right,
            (true, true) => Singularity::Both,
        };
        let piece = integrate(integrand, a, b, singular, &cfg.quadrature)?;
        if !piece.value.is_finite() {
            return Ok(f64::INFINITY);
        }
        total += piece.value;
    }
    Ok(total)
}

#[derive(Debug, Clone)]
pub struct BrachistochroneCost {
    grid: Grid,
    cfg: BrachistochroneConfig,
}

impl BrachistochroneCost {
    pub fn new(grid: Grid, cfg: BrachistochroneConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self { grid, cfg })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn config(&self) -> &BrachistochroneConfig {
        &self.cfg
    }

    pub fn interpolant(&self, path: &[usize]) -> Result<Interpolant> {
        Ok(Interpolant::new(self.grid.knots(path)?, self.cfg.interpolation))
    }
}

impl CostModel for BrachistochroneCost {
    fn shape(&self) -> &Shape {
        self.grid.shape()
    }

    fn cost(&self, path: &[usize]) -> Result<f64> {
        brachistochrone_cost(&self.grid, path, &self.cfg)
    }
}

/// `cost(y) = sum_i terms[i][y_i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparableCost {
    shape: Shape,
    terms: Vec<Vec<f64>>,
}

impl SeparableCost {
    pub fn new(terms: Vec<Vec<f64>>) -> Result<Self> {
        let shape = Shape::new(terms.iter().map(Vec::len).collect())?;
        Ok(Self { shape, terms })
    }

    pub fn terms(&self) -> &[Vec<f64>] {
        &self.terms
    }
}

impl CostModel for SeparableCost {
    fn shape(&self) -> &Shape {
        &self.shape
    }

    fn cost(&self, path: &[usize]) -> Result<f64> {
        if !self.shape.contains(path) {
            return Err(Error::InvalidArgument(format!("path {path:?} outside shape")));
        }
        Ok(path.iter().zip(&self.terms).map(|(&y, t)| t[y]).sum())
    }
}

/// Costs stored for every path, indexed by lexicographic rank.
#[derive(Debug, Clone, PartialEq)]
pub struct TableCost {
    shape: Shape,
    values: Vec<f64>,
}

impl TableCost {
    pub fn new(shape: Shape, values: Vec<f64>) -> Result<Self> {
        let total = shape.check_cap(values.len() as u128)?;
        if total != values.len() {
            return Err(Error::InvalidArgument(format!(
                "table has {} values for {} paths",
                values.len(),
                total
            )));
        }
        Ok(Self { shape, values })
    }

    /// Evaluates `model` on every path, in parallel, within `cap`.
    pub fn tabulate(model: &dyn CostModel, cap: u128) -> Result<Self> {
        let shape = model.shape().clone();
        let total = shape.check_cap(cap)?;
        let values = (0..total)
            .into_par_iter()
            .map(|i| model.cost(&shape.path_at(i)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { shape, values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn lookup(&self, path: &[usize]) -> f64 {
        self.values[self.shape.index_of(path)]
    }
}

impl CostModel for TableCost {
    fn shape(&self) -> &Shape {
        &self.shape
    }

    fn cost(&self, path: &[usize]) -> Result<f64> {
        if !self.shape.contains(path) {
            return Err(Error::InvalidArgument(format!("path {path:?} outside shape")));
        }
        Ok(self.lookup(path))
    }
}
