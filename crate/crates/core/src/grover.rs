//! Exact simulation of a single Grover register.
//!
//! A register holds real amplitudes over `n` items. The phase-flip oracle and
//! the inversion about the mean are both real-linear, so real storage is
//! exact for this algorithm family. Sizes need not be powers of two.
//!
//! [`analytic_amplitudes`] gives the closed-form state after `j` iterations
//! from the uniform superposition and is used to cross-check the statevector.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Componentwise tolerance for statevector vs. closed-form comparisons.
pub const AMPLITUDE_TOL: f64 = 1e-10;
/// Tolerance for identities that hold exactly up to rounding.
pub const EXACT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Register {
    amplitudes: Vec<f64>,
}

impl Register {
    /// Uniform superposition over `n` items, every amplitude `1/sqrt(n)`.
    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyRegister);
        }
        let a = 1.0 / (n as f64).sqrt();
        Ok(Self {
            amplitudes: vec![a; n],
        })
    }

    /// Wraps explicit amplitudes. Rejects empty, non-finite or non-normalized input.
    pub fn from_amplitudes(amplitudes: Vec<f64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::EmptyRegister);
        }
        let norm_sq: f64 = amplitudes.iter().map(|a| a * a).sum();
        if !norm_sq.is_finite() || (norm_sq - 1.0).abs() > AMPLITUDE_TOL {
            return Err(Error::NotNormalized { norm_sq });
        }
        Ok(Self { amplitudes })
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    pub fn norm_sq(&self) -> f64 {
        self.amplitudes.iter().map(|a| a * a).sum()
    }

    fn check_size(&self, marked: &MarkedSet) -> Result<()> {
        if marked.size() != self.len() {
            return Err(Error::SizeMismatch {
                register: self.len(),
                marked: marked.size(),
            });
        }
        Ok(())
    }

    /// Negates the amplitude of every marked item.
    pub fn apply_oracle(&mut self, marked: &MarkedSet) -> Result<()> {
        self.check_size(marked)?;
        for &i in marked.indices() {
            self.amplitudes[i] = -self.amplitudes[i];
        }
        Ok(())
    }

    /// `a_k -> 2 * mean(a) - a_k`, the action of `2|psi><psi| - I`.
    pub fn invert_about_mean(&mut self) {
        let mean = self.amplitudes.iter().sum::<f64>() / self.len() as f64;
        let twice = 2.0 * mean;
        for a in &mut self.amplitudes {
            *a = twice - *a;
        }
    }

    /// One Grover iteration: oracle, then inversion about the mean.
    pub fn grover_step(&mut self, marked: &MarkedSet) -> Result<()> {
        self.apply_oracle(marked)?;
        self.invert_about_mean();
        Ok(())
    }

    /// Applies `j` Grover iterations in place. `j = 0` leaves the register untouched.
    pub fn grover_iterate(&mut self, marked: &MarkedSet, j: usize) -> Result<()> {
        self.check_size(marked)?;
        for _ in 0..j {
            self.grover_step(marked)?;
        }
        Ok(())
    }

    /// Probability that a measurement lands on a marked item.
    pub fn success_probability(&self, marked: &MarkedSet) -> Result<f64> {
        self.check_size(marked)?;
        Ok(marked
            .indices()
            .iter()
            .map(|&i| self.amplitudes[i] * self.amplitudes[i])
            .sum())
    }

    /// Samples an index with probability `a[x]^2`. The register is not collapsed.
    pub fn measure<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let total = self.norm_sq();
        let u: f64 = rng.gen::<f64>() * total;
        let mut acc = 0.0;
        let mut last_nonzero = 0;
        for (i, a) in self.amplitudes.iter().enumerate() {
            let p = a * a;
            if p > 0.0 {
                acc += p;
                last_nonzero = i;
                if u < acc {
                    return i;
                }
            }
        }
        // rounding left u at or past the final partial sum
        last_nonzero
    }
}

/// The marked items of one bucket: a tabulated local oracle.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "MarkedSetRepr", into = "MarkedSetRepr")]
pub struct MarkedSet {
    size: usize,
    indices: Vec<usize>,
    mask: Vec<bool>,
}

#[derive(Serialize, Deserialize)]
struct MarkedSetRepr {
    size: usize,
    marked: Vec<usize>,
}

impl TryFrom<MarkedSetRepr> for MarkedSet {
    type Error = Error;
    fn try_from(r: MarkedSetRepr) -> Result<Self> {
        MarkedSet::new(r.size, r.marked)
    }
}

impl From<MarkedSet> for MarkedSetRepr {
    fn from(m: MarkedSet) -> Self {
        MarkedSetRepr {
            size: m.size,
            marked: m.indices,
        }
    }
}

impl MarkedSet {
    /// Duplicates are collapsed; indices must lie in `[0, size)`.
    pub fn new(size: usize, marked: impl IntoIterator<Item = usize>) -> Result<Self> {
        if size == 0 {
            return Err(Error::EmptyRegister);
        }
        let mut mask = vec![false; size];
        for i in marked {
            if i >= size {
                return Err(Error::IndexOutOfRange { index: i, size });
            }
            mask[i] = true;
        }
        Ok(Self::from_mask(mask))
    }

    pub fn from_predicate(size: usize, pred: impl Fn(usize) -> bool) -> Result<Self> {
        if size == 0 {
            return Err(Error::EmptyRegister);
        }
        Ok(Self::from_mask((0..size).map(pred).collect()))
    }

    fn from_mask(mask: Vec<bool>) -> Self {
        let indices = mask
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
            .collect();
        Self {
            size: mask.len(),
            indices,
            mask,
        }
    }

    pub fn empty(size: usize) -> Result<Self> {
        Self::new(size, [])
    }

    pub fn all(size: usize) -> Result<Self> {
        Self::new(size, 0..size)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Number of marked items, `M`.
    pub fn count(&self) -> usize {
        self.indices.len()
    }

    /// Marked indices in increasing order.
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn contains(&self, i: usize) -> bool {
        self.mask.get(i).copied().unwrap_or(false)
    }
}

/// Rotation angle `theta = asin(sqrt(M/N))` of the Grover operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleModel {
    theta: f64,
}

impl AngleModel {
    pub fn new(n: usize, marked: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyRegister);
        }
        if marked > n {
            return Err(Error::IndexOutOfRange {
                index: marked,
                size: n,
            });
        }
        let ratio = marked as f64 / n as f64;
        Ok(Self {
            theta: ratio.sqrt().asin(),
        })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Marked-class probability after `j` iterations, `sin^2((2j+1) theta)`.
    pub fn success_probability(&self, j: usize) -> f64 {
        let s = ((2 * j + 1) as f64 * self.theta).sin();
        s * s
    }
}

/// Closed-form `(marked, unmarked)` amplitudes after `j` iterations from the
/// uniform state: `(sin((2j+1)θ)/sqrt(M), cos((2j+1)θ)/sqrt(N-M))`.
///
/// `M = 0` and `M = n` are refused; the statevector handles those exactly.
pub fn analytic_amplitudes(n: usize, marked: usize, j: usize) -> Result<(f64, f64)> {
    if n == 0 {
        return Err(Error::EmptyRegister);
    }
    if marked == 0 || marked >= n {
        return Err(Error::Degenerate { n, marked });
    }
    let angle = AngleModel::new(n, marked)?;
    let phase = (2 * j + 1) as f64 * angle.theta();
    let alpha = 1.0 / (marked as f64).sqrt();
    let beta = 1.0 / ((n - marked) as f64).sqrt();
    Ok((alpha * phase.sin(), beta * phase.cos()))
}
