//! Experiment configuration: JSON schema, defaults and validation.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::bisect::InnerSearch;
use crate::error::Error;
use crate::grid_search::{BucketSpec, DrawPolicy, GridProblem};
use crate::grover::MarkedSet;
use crate::trajectory::grid::{
    brachistochrone_grid_with_height, BRACHISTOCHRONE_END, BRACHISTOCHRONE_START,
};
use crate::trajectory::{
    BrachistochroneConfig, BrachistochroneCost, CostModel, Grid, SeparableCost, TableCost,
    DEFAULT_ENUMERATION_CAP,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Search,
    Bisect,
    Brachistochrone,
    Analyze,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Search => "search",
            Mode::Bisect => "bisect",
            Mode::Brachistochrone => "brachistochrone",
            Mode::Analyze => "analyze",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mode: Mode,
    #[serde(default)]
    pub seed: u64,
    /// Output directory; not echoed into reports.
    #[serde(default, skip_serializing)]
    pub out: Option<String>,
    #[serde(default)]
    pub search: SearchConfig,
    #[serde(default)]
    pub bisect: BisectConfig,
    #[serde(default)]
    pub brachistochrone: BrachistochroneRun,
    #[serde(default)]
    pub analyze: AnalyzeConfig,
}

impl ExperimentConfig {
    pub fn with_mode(mode: Mode) -> Self {
        Self {
            mode,
            seed: 0,
            out: None,
            search: SearchConfig::default(),
            bisect: BisectConfig::default(),
            brachistochrone: BrachistochroneRun::default(),
            analyze: AnalyzeConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BucketConfig {
    pub n: usize,
    pub marked: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    /// Ordinate counts for the evenly spaced default grid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sizes: Option<Vec<usize>>,
    /// Explicit ordinates per column; overrides `sizes`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub columns: Option<Vec<Vec<f64>>>,
    /// Column positions for explicit `columns`; default `pi i / (k + 1)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub abscissae: Option<Vec<f64>>,
    #[serde(default = "default_y_max")]
    pub y_max: f64,
    #[serde(default)]
    pub physics: BrachistochroneConfig,
}

fn default_y_max() -> f64 {
    2.0
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            sizes: Some(vec![8, 8, 8]),
            columns: None,
            abscissae: None,
            y_max: default_y_max(),
            physics: BrachistochroneConfig::default(),
        }
    }
}

impl GridSpec {
    pub fn build(&self) -> Result<Grid, Error> {
        match (&self.columns, &self.sizes) {
            (Some(cols), _) => {
                let k = cols.len();
                let xs = self.abscissae.clone().unwrap_or_else(|| {
                    (1..=k)
                        .map(|i| std::f64::consts::PI * i as f64 / (k + 1) as f64)
                        .collect()
                });
                Grid::new(
                    cols.clone(),
                    xs,
                    BRACHISTOCHRONE_START,
                    BRACHISTOCHRONE_END,
                    (0.0, self.y_max.max(BRACHISTOCHRONE_START.1)),
                )
            }
            (None, Some(sizes)) => brachistochrone_grid_with_height(sizes, self.y_max),
            (None, None) => Err(Error::InvalidGrid("grid needs `sizes` or `columns`".into())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CostSpec {
    /// `cost(y) = sum_i terms[i][y_i]`.
    Separable { terms: Vec<Vec<f64>> },
    Brachistochrone(GridSpec),
}

impl Default for CostSpec {
    fn default() -> Self {
        CostSpec::Separable {
            terms: vec![(1..=8).map(f64::from).collect()],
        }
    }
}

impl CostSpec {
    /// Cost model with every path precomputed, within `cap`.
    pub fn tabulated(&self, cap: u128) -> Result<Arc<dyn CostModel>, Error> {
        match self {
            CostSpec::Separable { terms } => Ok(Arc::new(SeparableCost::new(terms.clone())?)),
            CostSpec::Brachistochrone(spec) => {
                let model = BrachistochroneCost::new(spec.build()?, spec.physics)?;
                Ok(Arc::new(TableCost::tabulate(&model, cap)?))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchConfig {
    /// Product-mode buckets.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub buckets: Option<Vec<BucketConfig>>,
    /// Cost-mode problem; requires `range`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cost: Option<CostSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub range: Option<(f64, f64)>,
    pub lambda: Option<f64>,
    pub max_rounds: Option<usize>,
    pub strict_paper: bool,
    pub cap: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            buckets: None,
            cost: None,
            range: None,
            lambda: None,
            max_rounds: None,
            strict_paper: false,
            cap: DEFAULT_ENUMERATION_CAP as u64,
        }
    }
}

impl SearchConfig {
    /// Three buckets of 64 with one marked item each, when neither mode is configured.
    pub fn effective_buckets(&self) -> Vec<BucketConfig> {
        self.buckets.clone().unwrap_or_else(|| {
            vec![
                BucketConfig {
                    n: 64,
                    marked: vec![0],
                };
                3
            ]
        })
    }
}

pub fn product_problem(buckets: &[BucketConfig]) -> Result<GridProblem, Error> {
    let specs = buckets
        .iter()
        .map(|b| MarkedSet::new(b.n, b.marked.iter().copied()).map(BucketSpec::new))
        .collect::<Result<Vec<_>, _>>()?;
    GridProblem::product(specs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InnerKind {
    Exhaustive,
    #[default]
    Grover,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BisectConfig {
    pub cost: CostSpec,
    pub a0: f64,
    /// Drawn from a random path's cost when absent.
    pub b0: Option<f64>,
    pub max_count: usize,
    pub epsilon: f64,
    pub inner: InnerKind,
    pub lambda: Option<f64>,
    pub max_rounds: Option<usize>,
    pub strict_paper: bool,
    pub cap: u64,
}

impl Default for BisectConfig {
    fn default() -> Self {
        Self {
            cost: CostSpec::default(),
            a0: 0.0,
            b0: None,
            max_count: 10,
            epsilon: 0.0,
            inner: InnerKind::Grover,
            lambda: None,
            max_rounds: None,
            strict_paper: false,
            cap: DEFAULT_ENUMERATION_CAP as u64,
        }
    }
}

impl BisectConfig {
    pub fn inner_search(&self) -> InnerSearch {
        match self.inner {
            InnerKind::Exhaustive => InnerSearch::Exhaustive {
                cap: self.cap as u128,
            },
            InnerKind::Grover => InnerSearch::Grover {
                lambda: self.lambda,
                max_rounds: self.max_rounds,
                policy: policy(self.strict_paper),
            },
        }
    }
}

pub fn policy(strict_paper: bool) -> DrawPolicy {
    if strict_paper {
        DrawPolicy::StrictPaper
    } else {
        DrawPolicy::Capped
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BrachistochroneRun {
    pub grid: GridSpec,
    pub brute_force: bool,
    /// Interpolated `(x, y)` points written for the best path.
    pub samples: usize,
    pub cap: u64,
    /// Bisection over the same grid, skipped when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bisect: Option<BrachistochroneBisect>,
}

impl Default for BrachistochroneRun {
    fn default() -> Self {
        Self {
            grid: GridSpec::default(),
            brute_force: true,
            samples: 201,
            cap: DEFAULT_ENUMERATION_CAP as u64,
            bisect: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BrachistochroneBisect {
    pub a0: f64,
    pub b0: Option<f64>,
    pub max_count: usize,
    pub epsilon: f64,
    pub inner: InnerKind,
    pub lambda: Option<f64>,
    pub max_rounds: Option<usize>,
    pub strict_paper: bool,
}

impl Default for BrachistochroneBisect {
    fn default() -> Self {
        Self {
            a0: 0.0,
            b0: None,
            max_count: 10,
            epsilon: 0.0,
            inner: InnerKind::Grover,
            lambda: None,
            max_rounds: None,
            strict_paper: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyzeBucket {
    pub n: usize,
    pub m_marked: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalyzeConfig {
    pub buckets: Vec<AnalyzeBucket>,
    /// Sweep start; defaults to the first integer above `alpha*`.
    pub m_from: Option<usize>,
    /// Sweep end (inclusive); defaults to `floor(4 alpha*)`.
    pub m_to: Option<usize>,
    pub trials: u64,
    pub runtime_trials: u64,
    pub lambda: Option<f64>,
    pub max_rounds: Option<usize>,
    pub strict_paper: bool,
}

impl Default for AnalyzeConfig {
    fn default() -> Self {
        Self {
            buckets: vec![
                AnalyzeBucket {
                    n: 64,
                    m_marked: 1,
                };
                3
            ],
            m_from: None,
            m_to: None,
            trials: 20_000,
            runtime_trials: 200,
            lambda: None,
            max_rounds: None,
            strict_paper: false,
        }
    }
}

impl AnalyzeConfig {
    /// Product problem with the first `m_marked` items of each bucket marked.
    pub fn problem(&self) -> Result<GridProblem, Error> {
        let buckets: Vec<BucketConfig> = self
            .buckets
            .iter()
            .map(|b| BucketConfig {
                n: b.n,
                marked: (0..b.m_marked.min(b.n)).collect(),
            })
            .collect();
        if let Some(b) = self.buckets.iter().find(|b| b.m_marked > b.n) {
            return Err(Error::InvalidArgument(format!(
                "bucket with n = {} cannot have {} marked items",
                b.n, b.m_marked
            )));
        }
        product_problem(&buckets)
    }
}

/// Configuration problem with a position in the source file when one is known.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub source_name: String,
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.line, self.column) {
            (Some(l), Some(c)) => write!(f, "{}:{}:{}: {}", self.source_name, l, c, self.message),
            (Some(l), None) => write!(f, "{}:{}: {}", self.source_name, l, self.message),
            _ => write!(f, "{}: {}", self.source_name, self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

/// Parsed configuration together with its source text, for locating validation errors.
pub struct LoadedConfig {
    pub config: ExperimentConfig,
    source_name: String,
    text: Option<String>,
}

impl LoadedConfig {
    pub fn parse(source_name: &str, text: &str) -> Result<Self, ConfigError> {
        let config: ExperimentConfig = serde_json::from_str(text).map_err(|e| ConfigError {
            source_name: source_name.to_string(),
            line: Some(e.line()),
            column: Some(e.column()),
            message: e.to_string(),
        })?;
        Ok(Self {
            config,
            source_name: source_name.to_string(),
            text: Some(text.to_string()),
        })
    }

    pub fn from_defaults(mode: Mode) -> Self {
        Self {
            config: ExperimentConfig::with_mode(mode),
            source_name: "<defaults>".into(),
            text: None,
        }
    }

    /// Error pointing at the first line that mentions `key`.
    pub fn error_at(&self, key: &str, message: impl Into<String>) -> ConfigError {
        let needle = format!("\"{key}\"");
        let pos = self.text.as_deref().and_then(|t| {
            t.lines()
                .enumerate()
                .find_map(|(i, l)| l.find(&needle).map(|c| (i + 1, c + 1)))
        });
        ConfigError {
            source_name: self.source_name.clone(),
            line: pos.map(|p| p.0),
            column: pos.map(|p| p.1),
            message: message.into(),
        }
    }

    /// Checks cross-field constraints for the selected mode.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let c = &self.config;
        match c.mode {
            Mode::Search => {
                let s = &c.search;
                match (&s.buckets, &s.cost) {
                    (Some(_), Some(_)) => {
                        return Err(self.error_at("cost", "give either `buckets` or `cost`, not both"))
                    }
                    (None, Some(_)) if s.range.is_none() => {
                        return Err(self.error_at("cost", "cost-mode search needs `range`"))
                    }
                    _ => {}
                }
                if let Some((a, b)) = s.range {
                    if !(a < b) {
                        return Err(self.error_at("range", format!("empty range ({a}, {b})")));
                    }
                }
                if let Some(bs) = &s.buckets {
                    if bs.is_empty() {
                        return Err(self.error_at("buckets", "at least one bucket is required"));
                    }
                }
                if s.max_rounds == Some(0) {
                    return Err(self.error_at("max_rounds", "max_rounds must be positive"));
                }
            }
            Mode::Bisect => {
                let b = &c.bisect;
                if b.max_count == 0 {
                    return Err(self.error_at("max_count", "max_count must be positive"));
                }
                if let Some(b0) = b.b0 {
                    if !(b.a0 < b0) {
                        return Err(self.error_at("b0", format!("need a0 < b0, got ({}, {b0})", b.a0)));
                    }
                }
                if !(b.epsilon >= 0.0) {
                    return Err(self.error_at("epsilon", "epsilon must be non-negative"));
                }
                if b.max_rounds == Some(0) {
                    return Err(self.error_at("max_rounds", "max_rounds must be positive"));
                }
            }
            Mode::Brachistochrone => {
                let r = &c.brachistochrone;
                if let Some(b) = &r.bisect {
                    if b.max_count == 0 {
                        return Err(self.error_at("max_count", "max_count must be positive"));
                    }
                    if let Some(b0) = b.b0 {
                        if !(b.a0 < b0) {
                            return Err(self.error_at("b0", format!("need a0 < b0, got ({}, {b0})", b.a0)));
                        }
                    }
                }
                if !r.brute_force && r.bisect.is_none() {
                    return Err(self.error_at("brute_force", "nothing to run: enable brute_force or bisect"));
                }
                r.grid.build().map_err(|e| self.error_at("grid", e.to_string()))?;
            }
            Mode::Analyze => {
                let a = &c.analyze;
                if a.buckets.is_empty() {
                    return Err(self.error_at("buckets", "at least one bucket is required"));
                }
                if a.trials == 0 || a.runtime_trials == 0 {
                    return Err(self.error_at("trials", "trial counts must be positive"));
                }
                if let (Some(lo), Some(hi)) = (a.m_from, a.m_to) {
                    if lo > hi {
                        return Err(self.error_at("m_from", format!("empty sweep range [{lo}, {hi}]")));
                    }
                }
                if a.m_from == Some(0) {
                    return Err(self.error_at("m_from", "m starts at 1"));
                }
            }
        }
        Ok(())
    }
}
