//! Experiment runner behind the `qgrid` binary.
//!
//! Exit codes: 0 success, 1 configuration or usage error, 2 search exhausted.

pub mod config;
pub mod report;

use std::fs;
use std::path::{Path, PathBuf};

use clap::Parser;
use serde::Serialize;

use crate::analysis::{
    empirical_vs_closed_form, lemma_threshold, problem_stats, runtime_experiment, theorem_bounds,
    ComparisonRow, RuntimeBounds, RuntimeSummary,
};
use crate::bisect::{initial_upper_bound, run_bisect, BisectParams, BisectResult, TrajectoryFactory, ProblemFactory};
use crate::error::Error;
use crate::grid_search::{
    default_lambda, default_max_rounds, run_grid_search, ScheduleParams, SearchOutcome,
};
use crate::rng::{derive_seed, seeded};
use crate::trajectory::{
    brute_force_minimum, cycloid_time, straight_line_time, BrachistochroneCost, CostModel,
    TableCost,
};
use config::{
    policy, product_problem, BrachistochroneBisect, ConfigError, ExperimentConfig, InnerKind,
    LoadedConfig, Mode,
};
use report::{write_csv, write_json, Report};

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_EXHAUSTED: u8 = 2;

/// Seed stream reserved for drawing an automatic upper bound.
const B0_STREAM: u64 = u64::MAX;

#[derive(Debug, Parser)]
#[command(name = "qgrid", version, about = "Parallel-Grover grid search experiments")]
pub struct Args {
    /// JSON experiment configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Overrides the configured mode; required without --config.
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory for reports and tables.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Leave buckets uniform once m exceeds sqrt(n) instead of capping the draw range.
    #[arg(long)]
    pub strict_paper: bool,
    #[arg(long)]
    pub max_rounds: Option<usize>,
    #[arg(long)]
    pub max_count: Option<usize>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Run(#[from] Error),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Usage(String),
}

/// Result of one command: exit code and the files written.
#[derive(Debug)]
pub struct Completed {
    pub exit_code: u8,
    pub report: PathBuf,
    pub summary: String,
}

pub fn load(args: &Args) -> Result<LoadedConfig, CliError> {
    let mut loaded = match (&args.config, args.mode) {
        (Some(path), _) => {
            let text = fs::read_to_string(path).map_err(|e| {
                CliError::Usage(format!("cannot read {}: {e}", path.display()))
            })?;
            LoadedConfig::parse(&path.display().to_string(), &text)?
        }
        (None, Some(mode)) => LoadedConfig::from_defaults(mode),
        (None, None) => return Err(CliError::Usage("need --config or --mode".into())),
    };
    let c = &mut loaded.config;
    if let Some(mode) = args.mode {
        c.mode = mode;
    }
    if let Some(seed) = args.seed {
        c.seed = seed;
    }
    if let Some(out) = &args.out {
        c.out = Some(out.display().to_string());
    }
    if args.strict_paper {
        c.search.strict_paper = true;
        c.bisect.strict_paper = true;
        c.analyze.strict_paper = true;
        if let Some(b) = &mut c.brachistochrone.bisect {
            b.strict_paper = true;
        }
    }
    if let Some(r) = args.max_rounds {
        c.search.max_rounds = Some(r);
        c.bisect.max_rounds = Some(r);
        c.analyze.max_rounds = Some(r);
        if let Some(b) = &mut c.brachistochrone.bisect {
            b.max_rounds = Some(r);
        }
    }
    if let Some(n) = args.max_count {
        c.bisect.max_count = n;
        if let Some(b) = &mut c.brachistochrone.bisect {
            b.max_count = n;
        }
    }
    loaded.validate()?;
    Ok(loaded)
}

/// Parses arguments, runs the selected command and returns the exit code.
pub fn main_with_args(argv: impl IntoIterator<Item = std::ffi::OsString>) -> u8 {
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let result = (|| {
        let loaded = load(&args)?;
        let mut pool = rayon::ThreadPoolBuilder::new();
        if let Some(j) = args.jobs {
            if j == 0 {
                return Err(CliError::Usage("--jobs must be positive".into()));
            }
            pool = pool.num_threads(j);
        }
        let pool = pool
            .build()
            .map_err(|e| CliError::Usage(format!("cannot start worker pool: {e}")))?;
        pool.install(|| run(&loaded.config))
    })();
    match result {
        Ok(done) => {
            println!("{}", done.summary);
            println!("report: {}", done.report.display());
            done.exit_code
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

pub fn run(config: &ExperimentConfig) -> Result<Completed, CliError> {
    let out = PathBuf::from(config.out.as_deref().unwrap_or("qgrid-out"));
    fs::create_dir_all(&out)?;
    match config.mode {
        Mode::Search => cmd_search(config, &out),
        Mode::Bisect => cmd_bisect(config, &out),
        Mode::Brachistochrone => cmd_brachistochrone(config, &out),
        Mode::Analyze => cmd_analyze(config, &out),
    }
}

fn num(x: f64) -> String {
    format!("{x}")
}

#[derive(Debug, Serialize)]
pub struct SearchResult {
    pub lambda: f64,
    pub max_rounds: usize,
    pub outcome: SearchOutcome,
    /// Cost of the accepted tuple in cost mode.
    pub cost: Option<f64>,
}

pub fn cmd_search(config: &ExperimentConfig, out: &Path) -> Result<Completed, CliError> {
    let s = &config.search;
    let (problem, cost) = match (&s.cost, s.range) {
        (Some(spec), Some((a, b))) => {
            let cost = spec.tabulated(s.cap as u128)?;
            let factory = TrajectoryFactory::new(cost.clone(), s.cap as u128);
            (factory.build(a, b)?.problem, Some(cost))
        }
        _ => (product_problem(&s.effective_buckets())?, None),
    };
    let mut params = ScheduleParams::for_problem(&problem, config.seed);
    if let Some(l) = s.lambda {
        params.lambda = l;
    }
    if let Some(r) = s.max_rounds {
        params.max_rounds = r;
    }
    params.policy = policy(s.strict_paper);
    let outcome = run_grid_search(&problem, params)?;
    let tuple_cost = match (&cost, &outcome.tuple) {
        (Some(c), Some(t)) => Some(c.cost(t)?),
        _ => None,
    };
    let summary = format!(
        "search: success={} rounds={} grover_iterations={}",
        outcome.success,
        outcome.rounds_used,
        outcome.ledger.total_grover_iterations()
    );
    let exit_code = if outcome.success { EXIT_OK } else { EXIT_EXHAUSTED };
    let result = SearchResult {
        lambda: params.lambda,
        max_rounds: params.max_rounds,
        outcome,
        cost: tuple_cost,
    };
    let report = out.join("search.json");
    write_json(&report, &Report::new(config, vec![], result))?;
    Ok(Completed {
        exit_code,
        report,
        summary,
    })
}

#[derive(Debug, Serialize)]
pub struct BisectReport {
    pub a0: f64,
    pub b0: f64,
    pub b0_drawn: bool,
    pub bisect: BisectResult,
}

fn bisect_on(
    cost: std::sync::Arc<dyn CostModel>,
    cap: u128,
    a0: f64,
    b0: Option<f64>,
    params: BisectParams,
) -> Result<BisectReport, CliError> {
    let (b0, drawn) = match b0 {
        Some(b) => (b, false),
        None => {
            let mut rng = seeded(derive_seed(params.seed, B0_STREAM));
            (initial_upper_bound(cost.as_ref(), &mut rng)?, true)
        }
    };
    if !(a0 < b0) {
        return Err(Error::InvalidInterval { a: a0, b: b0 }.into());
    }
    let factory = TrajectoryFactory::new(cost.clone(), cap);
    let bisect = run_bisect(&factory, cost.as_ref(), a0, b0, &params)?;
    Ok(BisectReport {
        a0,
        b0,
        b0_drawn: drawn,
        bisect,
    })
}

pub fn cmd_bisect(config: &ExperimentConfig, out: &Path) -> Result<Completed, CliError> {
    let b = &config.bisect;
    let cap = b.cap as u128;
    let cost = b.cost.tabulated(cap)?;
    let params = BisectParams {
        max_count: b.max_count,
        epsilon: b.epsilon,
        seed: config.seed,
        inner: b.inner_search(),
    };
    let result = bisect_on(cost, cap, b.a0, b.b0, params)?;
    let summary = format!(
        "bisect: interval=({}, {}) rounds={}",
        result.bisect.interval.a, result.bisect.interval.b, result.bisect.rounds
    );
    let report = out.join("bisect.json");
    write_json(&report, &Report::new(config, vec![], result))?;
    Ok(Completed {
        exit_code: EXIT_OK,
        report,
        summary,
    })
}

#[derive(Debug, Serialize)]
pub struct BruteForceResult {
    pub path: Vec<usize>,
    pub cost: f64,
    pub paths_evaluated: u64,
    pub finite_paths: u64,
}

#[derive(Debug, Serialize)]
pub struct BrachistochroneReport {
    pub k: usize,
    pub sizes: Vec<usize>,
    pub straight_line_cost: f64,
    pub cycloid_floor: f64,
    pub brute_force: Option<BruteForceResult>,
    pub bisect: Option<BisectReport>,
}

fn brachistochrone_bisect_params(b: &BrachistochroneBisect, seed: u64, cap: u128) -> BisectParams {
    BisectParams {
        max_count: b.max_count,
        epsilon: b.epsilon,
        seed,
        inner: match b.inner {
            InnerKind::Exhaustive => crate::bisect::InnerSearch::Exhaustive { cap },
            InnerKind::Grover => crate::bisect::InnerSearch::Grover {
                lambda: b.lambda,
                max_rounds: b.max_rounds,
                policy: policy(b.strict_paper),
            },
        },
    }
}

pub fn cmd_brachistochrone(config: &ExperimentConfig, out: &Path) -> Result<Completed, CliError> {
    let r = &config.brachistochrone;
    let cap = r.cap as u128;
    let grid = r.grid.build()?;
    let model = BrachistochroneCost::new(grid, r.grid.physics)?;
    let table = std::sync::Arc::new(TableCost::tabulate(&model, cap)?);
    let g = r.grid.physics.g;
    let mut tables = Vec::new();

    let brute_force = if r.brute_force {
        let best = brute_force_minimum(table.as_ref(), cap)?;
        let shape = table.shape();
        let rows: Vec<Vec<String>> = table
            .values()
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let mut row: Vec<String> = shape.path_at(i).iter().map(|y| y.to_string()).collect();
                row.push(num(*c));
                row
            })
            .collect();
        let mut header: Vec<String> = (1..=shape.k()).map(|i| format!("y{i}")).collect();
        header.push("cost".into());
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        write_csv(&out.join("paths.csv"), &header, &rows)?;
        tables.push("paths.csv".to_string());

        let samples: Vec<Vec<String>> = model
            .interpolant(&best.path)?
            .sample(r.samples)
            .into_iter()
            .map(|(x, y)| vec![num(x), num(y)])
            .collect();
        write_csv(&out.join("samples.csv"), &["x", "y"], &samples)?;
        tables.push("samples.csv".to_string());

        Some(BruteForceResult {
            path: best.path,
            cost: best.cost,
            paths_evaluated: table.values().len() as u64,
            finite_paths: table.values().iter().filter(|c| c.is_finite()).count() as u64,
        })
    } else {
        None
    };

    let bisect = match &r.bisect {
        Some(b) => {
            let params = brachistochrone_bisect_params(b, config.seed, cap);
            Some(bisect_on(table.clone(), cap, b.a0, b.b0, params)?)
        }
        None => None,
    };

    let result = BrachistochroneReport {
        k: table.shape().k(),
        sizes: table.shape().sizes().to_vec(),
        straight_line_cost: straight_line_time(g),
        cycloid_floor: cycloid_time(g),
        brute_force,
        bisect,
    };
    let summary = match (&result.brute_force, &result.bisect) {
        (Some(bf), _) => format!("brachistochrone: min cost {} at {:?}", bf.cost, bf.path),
        (None, Some(b)) => format!(
            "brachistochrone: bisect interval ({}, {})",
            b.bisect.interval.a, b.bisect.interval.b
        ),
        (None, None) => "brachistochrone: nothing run".into(),
    };
    let report = out.join("brachistochrone.json");
    write_json(&report, &Report::new(config, tables, result))?;
    Ok(Completed {
        exit_code: EXIT_OK,
        report,
        summary,
    })
}

#[derive(Debug, Serialize)]
pub struct AnalyzeReport {
    pub alpha_star: f64,
    pub m_range: (usize, usize),
    pub comparison: Vec<ComparisonRow>,
    pub lemma_violations: usize,
    pub lambda: f64,
    pub max_rounds: usize,
    pub bounds: RuntimeBounds,
    pub runtime: RuntimeSummary,
    pub mean_within_bound: bool,
}

pub fn cmd_analyze(config: &ExperimentConfig, out: &Path) -> Result<Completed, CliError> {
    let a = &config.analyze;
    let problem = a.problem()?;
    let stats = problem_stats(&problem)?;
    let alpha_star = lemma_threshold(&stats)?;
    let m_from = a.m_from.unwrap_or(alpha_star.floor() as usize + 1);
    let m_to = a.m_to.unwrap_or((4.0 * alpha_star).floor() as usize);
    if m_from == 0 || m_from > m_to {
        return Err(CliError::Usage(format!("empty sweep range [{m_from}, {m_to}]")));
    }
    let pol = policy(a.strict_paper);
    let m_values: Vec<f64> = (m_from..=m_to).map(|m| m as f64).collect();
    let comparison = empirical_vs_closed_form(
        &problem,
        &m_values,
        a.trials,
        pol,
        derive_seed(config.seed, 0),
    )?;
    let lemma_violations = comparison.iter().filter(|r| r.lemma_violation).count();

    let k = problem.k();
    let lambda = a.lambda.unwrap_or_else(|| default_lambda(k));
    let max_rounds = a
        .max_rounds
        .unwrap_or_else(|| default_max_rounds(&problem.sizes(), lambda));
    let bounds = theorem_bounds(&stats, lambda)?;
    let runtime = runtime_experiment(
        &problem,
        lambda,
        max_rounds,
        pol,
        a.runtime_trials,
        derive_seed(config.seed, 1),
    )?;
    let mean_within_bound = runtime.mean_total_iterations <= bounds.total();

    let rows: Vec<Vec<String>> = comparison
        .iter()
        .map(|r| {
            vec![
                num(r.m),
                r.range_sizes
                    .iter()
                    .map(|d| d.to_string())
                    .collect::<Vec<_>>()
                    .join(";"),
                r.trials.to_string(),
                r.successes.to_string(),
                num(r.empirical),
                num(r.closed_form),
                num(r.sigma),
                r.within_3_sigma.to_string(),
                r.beyond_threshold.to_string(),
                num(r.lemma_floor),
                r.lemma_violation.to_string(),
            ]
        })
        .collect();
    write_csv(
        &out.join("comparison.csv"),
        &[
            "m",
            "range_sizes",
            "trials",
            "successes",
            "empirical",
            "closed_form",
            "sigma",
            "within_3_sigma",
            "beyond_threshold",
            "lemma_floor",
            "lemma_violation",
        ],
        &rows,
    )?;
    let join = |v: Vec<String>| v.join(";");
    write_csv(
        &out.join("runtime.csv"),
        &[
            "k",
            "sizes",
            "marked",
            "lambda",
            "max_rounds",
            "trials",
            "successes",
            "mean_total_iterations",
            "std_total_iterations",
            "mean_rounds",
            "max_rounds_used",
            "alpha_star",
            "pre_critical",
            "post_critical",
            "bound_total",
            "mean_within_bound",
        ],
        &[vec![
            k.to_string(),
            join(stats.iter().map(|s| s.n.to_string()).collect()),
            join(stats.iter().map(|s| s.m_marked.to_string()).collect()),
            num(lambda),
            max_rounds.to_string(),
            runtime.trials.to_string(),
            runtime.successes.to_string(),
            num(runtime.mean_total_iterations),
            num(runtime.std_total_iterations),
            num(runtime.mean_rounds),
            runtime.max_rounds_used.to_string(),
            num(bounds.alpha_star),
            num(bounds.pre_critical),
            num(bounds.post_critical),
            num(bounds.total()),
            mean_within_bound.to_string(),
        ]],
    )?;

    let summary = format!(
        "analyze: m in [{m_from}, {m_to}], lemma violations {lemma_violations}, mean iterations {:.1} vs bound {:.1}",
        runtime.mean_total_iterations,
        bounds.total()
    );
    let result = AnalyzeReport {
        alpha_star,
        m_range: (m_from, m_to),
        comparison,
        lemma_violations,
        lambda,
        max_rounds,
        bounds,
        runtime,
        mean_within_bound,
    };
    let report = out.join("analyze.json");
    write_json(
        &report,
        &Report::new(
            config,
            vec!["comparison.csv".into(), "runtime.csv".into()],
            result,
        ),
    )?;
    Ok(Completed {
        exit_code: EXIT_OK,
        report,
        summary,
    })
}
