use std::fmt::Write as _;
use std::path::Path;

use heavytail::checks::PropertyCheck;
use heavytail::RunStats;
use serde::Serialize;

use crate::CliError;

/// One CSV row. Field order is the column order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub experiment: String,
    pub n: Option<u64>,
    pub b: Option<f64>,
    pub r: Option<u64>,
    pub regime: Option<String>,
    #[serde(rename = "N")]
    pub replications: u64,
    pub estimate: f64,
    pub std_error: Option<f64>,
    pub cv: Option<f64>,
    pub mean_work: Option<f64>,
    pub max_work: Option<u64>,
    pub seed: u64,
    pub wall_seconds: Option<f64>,
}

pub const HEADER: &str = "experiment,n,b,r,regime,N,estimate,std_error,cv,mean_work,max_work,seed,wall_seconds";

impl Row {
    fn from_stats(experiment: &str, s: &RunStats) -> Self {
        Self {
            experiment: experiment.into(),
            n: None,
            b: None,
            r: None,
            regime: None,
            replications: s.n_reps,
            estimate: s.mean,
            std_error: Some(s.std_error),
            cv: s.cv.is_finite().then_some(s.cv),
            mean_work: Some(s.mean_work),
            max_work: Some(s.max_work),
            seed: s.seed,
            wall_seconds: None,
        }
    }

    pub fn large_deviation(experiment: &str, n: u64, b: f64, s: &RunStats) -> Self {
        Self { n: Some(n), b: Some(b), ..Self::from_stats(experiment, s) }
    }

    pub fn crossing(experiment: &str, b: f64, r: u64, regime: &str, s: &RunStats) -> Self {
        Self { b: Some(b), r: Some(r), regime: Some(regime.into()), ..Self::from_stats(experiment, s) }
    }

    /// `estimate` is 1 for a passing check and 0 otherwise.
    pub fn property(experiment: &str, c: &PropertyCheck, seed: u64, wall_seconds: Option<f64>) -> Self {
        Self {
            experiment: format!("{experiment}:{}", c.name),
            n: None,
            b: None,
            r: None,
            regime: None,
            replications: c.trials,
            estimate: if c.passed { 1.0 } else { 0.0 },
            std_error: None,
            cv: None,
            mean_work: None,
            max_work: None,
            seed,
            wall_seconds,
        }
    }

    pub fn describe(&self) -> String {
        let grid = match (self.n, self.r) {
            (Some(n), _) => format!("n={n} b={}", fmt_opt(self.b)),
            (None, Some(r)) => format!("b={} r={r}", fmt_opt(self.b)),
            _ => String::new(),
        };
        format!(
            "{} {grid}: {:.4e} (se {}, cv {})",
            self.experiment,
            self.estimate,
            self.std_error.map_or("-".into(), |v| format!("{v:.3e}")),
            self.cv.map_or("-".into(), |v| format!("{v:.3}"))
        )
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or("-".into(), |v| format!("{v}"))
}

/// CSV file that receives rows as they complete, so a failed run keeps the
/// finished rows.
pub struct CsvSink {
    path: std::path::PathBuf,
    writer: csv::Writer<std::fs::File>,
}

impl CsvSink {
    pub fn create(path: &Path) -> Result<Self, CliError> {
        let writer = csv::WriterBuilder::new()
            .has_headers(false)
            .from_path(path)
            .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))?;
        let mut sink = Self { path: path.to_path_buf(), writer };
        sink.write(|w| w.write_record(HEADER.split(',')))?;
        Ok(sink)
    }

    fn write(&mut self, f: impl FnOnce(&mut csv::Writer<std::fs::File>) -> csv::Result<()>) -> Result<(), CliError> {
        let path = self.path.display().to_string();
        f(&mut self.writer).map_err(|e| CliError::Runtime(format!("cannot write {path}: {e}")))?;
        self.writer.flush().map_err(|e| CliError::Runtime(format!("cannot write {path}: {e}")))
    }

    pub fn push(&mut self, row: &Row) -> Result<(), CliError> {
        self.write(|w| w.serialize(row))
    }
}

/// Fixed-width table for the terminal.
pub fn summary(rows: &[Row]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<16} {:>6} {:>9} {:>4} {:<17} {:>7} {:>11} {:>10} {:>7} {:>10} {:>8}",
        "experiment", "n", "b", "r", "regime", "N", "estimate", "std_error", "cv", "mean_work", "seconds"
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{:<16} {:>6} {:>9} {:>4} {:<17} {:>7} {:>11.4e} {:>10} {:>7} {:>10} {:>8}",
            r.experiment,
            r.n.map_or("".into(), |v| v.to_string()),
            r.b.map_or("".into(), |v| format!("{v}")),
            r.r.map_or("".into(), |v| v.to_string()),
            r.regime.as_deref().unwrap_or(""),
            r.replications,
            r.estimate,
            r.std_error.map_or("".into(), |v| format!("{v:.3e}")),
            r.cv.map_or("".into(), |v| format!("{v:.3}")),
            r.mean_work.map_or("".into(), |v| format!("{v:.1}")),
            r.wall_seconds.map_or("".into(), |v| format!("{v:.2}")),
        );
    }
    out
}
