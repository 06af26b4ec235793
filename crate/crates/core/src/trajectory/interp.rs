//! Continuous curves through a path's grid points.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interpolation {
    /// One global polynomial through every node.
    #[default]
    Lagrange,
    /// Straight segments between consecutive nodes.
    PiecewiseLinear,
}

/// Polynomial in monomial form, `coeffs[i]` multiplies `x^i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    /// Interpolating polynomial through `(xs[i], ys[i])` via Newton divided
    /// differences, expanded to monomial coefficients.
    pub fn interpolate(xs: &[f64], ys: &[f64]) -> Self {
        assert_eq!(xs.len(), ys.len());
        assert!(!xs.is_empty());
        let n = xs.len();
        let mut dd = ys.to_vec();
        for level in 1..n {
            for i in (level..n).rev() {
                dd[i] = (dd[i] - dd[i - 1]) / (xs[i] - xs[i - level]);
            }
        }
        // Horner-style expansion of the Newton form.
        let mut coeffs = vec![dd[n - 1]];
        for i in (0..n - 1).rev() {
            let mut next = vec![0.0; coeffs.len() + 1];
            for (d, c) in coeffs.iter().enumerate() {
                next[d + 1] += c;
                next[d] -= c * xs[i];
            }
            next[0] += dd[i];
            coeffs = next;
        }
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn value(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    pub fn slope(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (d, c)| acc * x + d as f64 * c)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Interpolant {
    Polynomial { poly: Polynomial, knots: Vec<(f64, f64)> },
    PiecewiseLinear { knots: Vec<(f64, f64)> },
}

impl Interpolant {
    pub fn new(knots: Vec<(f64, f64)>, mode: Interpolation) -> Self {
        match mode {
            Interpolation::Lagrange => {
                let xs: Vec<f64> = knots.iter().map(|k| k.0).collect();
                let ys: Vec<f64> = knots.iter().map(|k| k.1).collect();
                Interpolant::Polynomial {
                    poly: Polynomial::interpolate(&xs, &ys),
                    knots,
                }
            }
            Interpolation::PiecewiseLinear => Interpolant::PiecewiseLinear { knots },
        }
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        match self {
            Interpolant::Polynomial { knots, .. } | Interpolant::PiecewiseLinear { knots } => knots,
        }
    }

    pub fn x_range(&self) -> (f64, f64) {
        let k = self.knots();
        (k[0].0, k[k.len() - 1].0)
    }

    fn segment(knots: &[(f64, f64)], x: f64) -> usize {
        let i = knots.partition_point(|k| k.0 <= x);
        i.clamp(1, knots.len() - 1) - 1
    }

    pub fn value(&self, x: f64) -> f64 {
        match self {
            Interpolant::Polynomial { poly, .. } => poly.value(x),
            Interpolant::PiecewiseLinear { knots } => {
                let i = Self::segment(knots, x);
                let (x0, y0) = knots[i];
                let (x1, y1) = knots[i + 1];
                y0 + (y1 - y0) * (x - x0) / (x1 - x0)
            }
        }
    }

    pub fn slope(&self, x: f64) -> f64 {
        match self {
            Interpolant::Polynomial { poly, .. } => poly.slope(x),
            Interpolant::PiecewiseLinear { knots } => {
                let i = Self::segment(knots, x);
                let (x0, y0) = knots[i];
                let (x1, y1) = knots[i + 1];
                (y1 - y0) / (x1 - x0)
            }
        }
    }

    /// Intervals on which the curve is smooth: the whole range for a
    /// polynomial, each segment for a piecewise-linear curve.
    pub fn smooth_pieces(&self) -> Vec<(f64, f64)> {
        match self {
            Interpolant::Polynomial { .. } => vec![self.x_range()],
            Interpolant::PiecewiseLinear { knots } => {
                knots.windows(2).map(|w| (w[0].0, w[1].0)).collect()
            }
        }
    }

    /// `n` evenly spaced `(x, y)` samples including both ends.
    pub fn sample(&self, n: usize) -> Vec<(f64, f64)> {
        let (a, b) = self.x_range();
        match n {
            0 => Vec::new(),
            1 => vec![(a, self.value(a))],
            _ => (0..n)
                .map(|i| {
                    let x = if i == n - 1 {
                        b
                    } else {
                        a + (b - a) * i as f64 / (n - 1) as f64
                    };
                    (x, self.value(x))
                })
                .collect(),
        }
    }
}
