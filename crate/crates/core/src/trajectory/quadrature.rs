//! Composite Gauss-Legendre quadrature with panel doubling.
//!
//! Gauss-Legendre nodes are interior to every panel, so the integrand is
//! never evaluated at an interval end. An endpoint flagged as singular is
//! additionally handled by the substitution `x = end -/+ L u^2`, which turns
//! an inverse-square-root blow-up into a smooth integrand in `u`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureConfig {
    pub initial_panels: usize,
    pub nodes_per_panel: usize,
    /// Stop once doubling the panel count changes the value by at most this fraction.
    pub rel_tol: f64,
    pub max_panels: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            initial_panels: 4,
            nodes_per_panel: 8,
            rel_tol: 1e-8,
            max_panels: 1 << 14,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if self.initial_panels == 0 || self.nodes_per_panel == 0 {
            return Err(Error::InvalidArgument(
                "quadrature needs at least one panel and one node".into(),
            ));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "quadrature rel_tol must lie in (0, 1), got {}",
                self.rel_tol
            )));
        }
        if self.max_panels < self.initial_panels {
            return Err(Error::InvalidArgument(
                "max_panels must be at least initial_panels".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Singularity {
    None,
    Left,
    Right,
    Both,
}

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let half = n.div_ceil(2);
    for i in 0..half {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub panels: usize,
}

struct Rule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Rule {
    fn composite(&self, f: &impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
        let h = (b - a) / panels as f64;
        let mut total = 0.0;
        for p in 0..panels {
            let lo = a + p as f64 * h;
            let mid = lo + 0.5 * h;
            let mut s = 0.0;
            for (x, w) in self.nodes.iter().zip(&self.weights) {
                let v = f(mid + 0.5 * h * x);
                if !v.is_finite() {
                    return f64::INFINITY;
                }
                s += w * v;
            }
            total += 0.5 * h * s;
        }
        total
    }
}

/// Integrates `f` over `[a, b]`. A non-finite integrand value at any node
/// yields `Ok(+inf)`; failure to meet `rel_tol` by `max_panels` is an error.
pub fn integrate(
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    singular: Singularity,
    cfg: &QuadratureConfig,
) -> Result<Integral> {
    integrate_dyn(&f, a, b, singular, cfg)
}

fn integrate_dyn(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    singular: Singularity,
    cfg: &QuadratureConfig,
) -> Result<Integral> {
    cfg.validate()?;
    if a == b {
        return Ok(Integral {
            value: 0.0,
            panels: 0,
        });
    }
    let (nodes, weights) = gauss_legendre(cfg.nodes_per_panel);
    let rule = Rule { nodes, weights };
    let len = b - a;

    match singular {
        Singularity::Both => {
            let mid = 0.5 * (a + b);
            let left = integrate_dyn(f, a, mid, Singularity::Left, cfg)?;
            let right = integrate_dyn(f, mid, b, Singularity::Right, cfg)?;
            Ok(Integral {
                value: left.value + right.value,
                panels: left.panels.max(right.panels),
            })
        }
        Singularity::None => doubling(&rule, &f, a, b, cfg),
        Singularity::Left => {
            let g = |u: f64| f(a + len * u * u) * 2.0 * len * u;
            doubling(&rule, &g, 0.0, 1.0, cfg)
        }
        Singularity::Right => {
            let g = |u: f64| f(b - len * u * u) * 2.0 * len * u;
            doubling(&rule, &g, 0.0, 1.0, cfg)
        }
    }
}

fn doubling(
    rule: &Rule,
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    cfg: &QuadratureConfig,
) -> Result<Integral> {
    let mut panels = cfg.initial_panels;
    let mut value = rule.composite(f, a, b, panels);
    while panels * 2 <= cfg.max_panels {
        if !value.is_finite() {
            return Ok(Integral {
                value: f64::INFINITY,
                panels,
            });
        }
        let next = rule.composite(f, a, b, panels * 2);
        panels *= 2;
        if !next.is_finite() {
            return Ok(Integral {
                value: f64::INFINITY,
                panels,
            });
        }
        if (next - value).abs() <= cfg.rel_tol * next.abs() {
            return Ok(Integral {
                value: next,
                panels,
            });
        }
        value = next;
    }
    Err(Error::NonConvergence {
        rel_tol: cfg.rel_tol,
        max_panels: cfg.max_panels,
    })
}
