//! Command-line front end: read a config or preset, validate every grid point,
//! run the estimators and write one CSV row per point.

pub mod config;
mod output;
mod plot;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::Parser;
use heavytail::checks::property_suite;
use heavytail::crossing::BlockRegime;
use heavytail::{
    required_samples, run, BlockScheme, CrossingEstimator, CrossingProblem, Error, IncrementModel, LdEstimator,
    LdProblem, Replicate, RunOptions, RunStats,
};

pub use config::{ExperimentConfig, ExperimentKind, ModelSpec, Planning, RegimeSpec};
pub use output::{CsvSink, Row};

pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_OUTPUT: &str = "results.csv";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("regime validation failed: {0}")]
    Regime(String),
    #[error("runtime failure: {0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Regime(_) => 3,
            CliError::Runtime(_) => 4,
        }
    }
}

/// Sort a core error raised while setting up a grid point.
fn setup_error(e: Error) -> CliError {
    match e {
        Error::Regime(r) => CliError::Regime(format!("{r} (from: {})", r.source_result())),
        other => CliError::Config(other.to_string()),
    }
}

#[derive(Debug, Parser)]
#[command(name = "heavytail", version, about = "Rare-event estimators for heavy-tailed random walks")]
pub struct Args {
    /// JSON experiment config.
    #[arg(long, conflicts_with = "preset")]
    pub config: Option<PathBuf>,
    /// Built-in experiment: table1, table2, table3 or property_suite.
    #[arg(long)]
    pub preset: Option<String>,
    /// Root seed; every row records the seed it was run with.
    #[arg(long, env = "HEAVYTAIL_SEED")]
    pub seed: Option<u64>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    pub threads: Option<usize>,
    /// CSV output path.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Directory for SVG plots of the estimate and CV against the grid.
    #[arg(long)]
    pub emit_plots: Option<PathBuf>,
    /// Leave `wall_seconds` empty so that output is byte-stable.
    #[arg(long)]
    pub no_timing: bool,
}

/// A validated grid point, ready to run.
enum Job {
    Ld { n: u64, b: f64, est: LdEstimator },
    Crossing { b: f64, r: u64, regime: BlockRegime, est: CrossingEstimator },
}

fn load_config(args: &Args) -> Result<ExperimentConfig, CliError> {
    let cfg = match (&args.config, &args.preset) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            ExperimentConfig::from_json(&text)?
        }
        (None, Some(name)) => ExperimentConfig::preset(name)?,
        (None, None) => return Err(CliError::Config("pass --config <path> or --preset <name>".into())),
    };
    Ok(cfg.with_defaults())
}

fn build_jobs(cfg: &ExperimentConfig) -> Result<Vec<Job>, CliError> {
    let model = || -> Result<IncrementModel, CliError> {
        cfg.model.as_ref().ok_or_else(|| CliError::Config("missing \"model\"".into()))?.build().map_err(setup_error)
    };
    let mut jobs = Vec::new();
    if cfg.is_large_deviation() {
        let model = model()?;
        let ns = cfg.n.as_deref().unwrap_or_default();
        let bs: Vec<Box<dyn Fn(u64) -> f64>> = match (&cfg.b, cfg.b_per_n) {
            (Some(_), Some(_)) => return Err(CliError::Config("give either \"b\" or \"b_per_n\", not both".into())),
            (Some(bs), None) => bs.iter().map(|&b| Box::new(move |_| b) as Box<dyn Fn(u64) -> f64>).collect(),
            (None, Some(f)) => vec![Box::new(move |n| f * n as f64)],
            (None, None) => return Err(CliError::Config("large-deviation runs need \"b\" or \"b_per_n\"".into())),
        };
        if ns.is_empty() || bs.is_empty() {
            return Err(CliError::Config("empty grid: \"n\" and \"b\" need at least one value".into()));
        }
        for &n in ns {
            for b in &bs {
                let b = b(n);
                let problem = LdProblem::new(model.clone(), n, b).map_err(setup_error)?;
                jobs.push(Job::Ld { n, b, est: LdEstimator::new(problem).map_err(setup_error)? });
            }
        }
    } else if cfg.is_crossing() {
        let model = model()?;
        let bs = cfg.b.as_deref().unwrap_or_default();
        let rs = cfg.r.as_deref().unwrap_or_default();
        if bs.is_empty() || rs.is_empty() {
            return Err(CliError::Config("empty grid: \"b\" and \"r\" need at least one value".into()));
        }
        if cfg.n.is_some() || cfg.b_per_n.is_some() {
            return Err(CliError::Config("\"n\" and \"b_per_n\" apply to large-deviation runs only".into()));
        }
        let mu = match (cfg.mu, CrossingProblem::queue_drift(&model)) {
            (Some(mu), _) | (None, Some(mu)) => mu,
            (None, None) => return Err(CliError::Config("crossing runs need \"mu\" unless the model is a queue".into())),
        };
        let regime: BlockRegime = cfg.regime.unwrap_or(RegimeSpec::FiniteVariance).into();
        for &r in rs {
            let scheme = BlockScheme::new(r).map_err(setup_error)?;
            for &b in bs {
                let problem = CrossingProblem::new(model.clone(), mu, b, scheme).map_err(setup_error)?;
                let est = CrossingEstimator::new(problem, regime).map_err(setup_error)?;
                jobs.push(Job::Crossing { b, r, regime, est });
            }
        }
    }
    Ok(jobs)
}

fn run_one<E: Replicate>(est: &E, cfg: &ExperimentConfig, seed: u64, opts: RunOptions) -> Result<RunStats, CliError> {
    let runtime = |e: heavytail::harness::RunError| CliError::Runtime(e.to_string());
    let reps = match cfg.planning {
        None => cfg.replications,
        Some(plan) => {
            let pilot = run(est, plan.pilot.max(2), seed, opts).map_err(runtime)?;
            let cv = if pilot.cv.is_finite() { pilot.cv } else { f64::INFINITY };
            let wanted = if cv.is_finite() {
                required_samples(cv, plan.epsilon, plan.delta).map_err(|e| CliError::Config(e.to_string()))?
            } else {
                plan.max_replications
            };
            log::info!("pilot cv {cv:.3}: planning {wanted} replications (cap {})", plan.max_replications);
            wanted.min(plan.max_replications).max(plan.pilot.max(2))
        }
    };
    run(est, reps, seed, opts).map_err(runtime)
}

fn validate(cfg: &ExperimentConfig) -> Result<(), CliError> {
    if cfg.replications == 0 {
        return Err(CliError::Config("\"replications\" must be at least 1".into()));
    }
    if let Some(p) = cfg.planning {
        if !(p.epsilon > 0.0 && p.epsilon < 1.0 && p.delta > 0.0 && p.delta < 1.0) {
            return Err(CliError::Config("planning epsilon and delta must lie in (0, 1)".into()));
        }
    }
    Ok(())
}

/// Parses `argv` and runs the experiment.
pub fn run_cli<I, T>(argv: I) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            print!("{e}");
            return Ok(());
        }
        Err(e) => return Err(CliError::Config(e.to_string())),
    };
    run_args(&args)
}

pub fn run_args(args: &Args) -> Result<(), CliError> {
    let cfg = load_config(args)?;
    validate(&cfg)?;
    let seed = args.seed.or(cfg.seed).unwrap_or(DEFAULT_SEED);
    let threads = args.threads.or(cfg.threads).unwrap_or(0);
    let out = args.out.clone().or_else(|| cfg.output.clone()).unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT));
    let opts = RunOptions { threads, ..RunOptions::default() };
    let label = cfg.experiment.name();

    if cfg.experiment == ExperimentKind::PropertySuite {
        let t = Instant::now();
        let checks = property_suite(seed, cfg.property_draws.unwrap_or(20_000)).map_err(setup_error)?;
        let secs = (!args.no_timing).then(|| t.elapsed().as_secs_f64());
        let mut sink = CsvSink::create(&out)?;
        for c in &checks {
            sink.push(&Row::property(label, c, seed, secs))?;
        }
        for c in &checks {
            println!("{:<28} {}  {}", c.name, if c.passed { "PASS" } else { "FAIL" }, c.detail);
        }
        println!("wrote {}", out.display());
        return match checks.iter().find(|c| !c.passed) {
            Some(c) => Err(CliError::Runtime(format!("property {} failed: {}", c.name, c.detail))),
            None => Ok(()),
        };
    }

    // Every grid point is validated before any sampling starts.
    let jobs = build_jobs(&cfg)?;
    let mut sink = CsvSink::create(&out)?;
    let mut rows = Vec::with_capacity(jobs.len());
    for job in &jobs {
        let t = Instant::now();
        let row = match job {
            Job::Ld { n, b, est } => {
                let s = run_one(est, &cfg, seed, opts)?;
                Row::large_deviation(label, *n, *b, &s)
            }
            Job::Crossing { b, r, regime, est } => {
                let s = run_one(est, &cfg, seed, opts)?;
                Row::crossing(label, *b, *r, regime.name(), &s)
            }
        };
        let secs = (!args.no_timing).then(|| t.elapsed().as_secs_f64());
        let row = Row { wall_seconds: secs, ..row };
        log::info!("{}", row.describe());
        sink.push(&row)?;
        rows.push(row);
    }
    print!("{}", output::summary(&rows));
    println!("wrote {}", out.display());
    if let Some(dir) = &args.emit_plots {
        emit_plots(dir, &rows)?;
    }
    Ok(())
}

fn emit_plots(dir: &Path, rows: &[Row]) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Runtime(format!("cannot write plots to {}: {e}", dir.display()));
    std::fs::create_dir_all(dir).map_err(io)?;
    for (file, svg) in plot::render(rows) {
        let path = dir.join(file);
        std::fs::write(&path, svg).map_err(io)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}
