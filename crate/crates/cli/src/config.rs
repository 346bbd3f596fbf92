//! JSON experiment configuration and the built-in presets.
//!
//! ```json
//! {
//!   "experiment": "level_crossing",
//!   "model": { "kind": "queue", "service_alpha": 2.5, "load": 0.5 },
//!   "b": [100, 1000],
//!   "r": [2],
//!   "regime": { "kind": "finite_variance" },
//!   "replications": 10000
//! }
//! ```
//!
//! Large-deviation runs take an `n` grid and either a `b` grid (crossed with
//! `n`) or `b_per_n`, which sets `b = b_per_n * n`. Crossing runs take a `b`
//! grid crossed with `r` (default `[2]`); `mu` defaults to the queue drift for
//! the queue model and must be given otherwise.

use std::path::PathBuf;

use heavytail::crossing::BlockRegime;
use heavytail::{IncrementModel, Result as CoreResult};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    LargeDeviation,
    LevelCrossing,
    Table1,
    Table2,
    Table3,
    PropertySuite,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::LargeDeviation => "large_deviation",
            Self::LevelCrossing => "level_crossing",
            Self::Table1 => "table1",
            Self::Table2 => "table2",
            Self::Table3 => "table3",
            Self::PropertySuite => "property_suite",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    /// Mean-zero Pareto.
    ParetoCentered { alpha: f64 },
    /// `Pr{V > t} = (1 + t)^(-alpha)` on `[0, ∞)`.
    ParetoService { alpha: f64 },
    /// `Pr{X > x} = x^(-alpha)` on `[1, ∞)`.
    ParetoPure { alpha: f64 },
    /// Pareto scale times a unit Laplace variable.
    LambdaLaplace { alpha: f64 },
    /// M/G/1 increment with Pareto service and Poisson arrivals.
    Queue { service_alpha: f64, load: f64 },
    /// Finitely many atoms `[value, probability]`.
    Discrete { atoms: Vec<(f64, f64)> },
}

impl ModelSpec {
    pub fn build(&self) -> CoreResult<IncrementModel> {
        match *self {
            Self::ParetoCentered { alpha } => IncrementModel::pareto_centered(alpha),
            Self::ParetoService { alpha } => IncrementModel::pareto_service(alpha),
            Self::ParetoPure { alpha } => IncrementModel::pareto_pure(alpha),
            Self::LambdaLaplace { alpha } => IncrementModel::lambda_laplace(alpha),
            Self::Queue { service_alpha, load } => IncrementModel::queue(service_alpha, load),
            Self::Discrete { ref atoms } => IncrementModel::discrete(atoms),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RegimeSpec {
    FiniteVariance,
    StrongEfficiency {
        #[serde(default)]
        beta: Option<f64>,
        /// Admit `alpha = 1.5`.
        #[serde(default)]
        allow_boundary: bool,
    },
    SubStrong {
        #[serde(default)]
        beta: Option<f64>,
        #[serde(default)]
        gamma: Option<f64>,
    },
}

impl From<RegimeSpec> for BlockRegime {
    fn from(r: RegimeSpec) -> Self {
        match r {
            RegimeSpec::FiniteVariance => BlockRegime::FiniteVariance,
            RegimeSpec::StrongEfficiency { beta, allow_boundary } => {
                BlockRegime::StrongEfficiency { beta, allow_boundary }
            }
            RegimeSpec::SubStrong { beta, gamma } => BlockRegime::SubStrong { beta, gamma },
        }
    }
}

/// Sample-size planning: a pilot run estimates the CV, then the main run uses
/// `ceil(cv^2 / (delta epsilon^2))` replications, capped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Planning {
    pub epsilon: f64,
    pub delta: f64,
    #[serde(default = "default_pilot")]
    pub pilot: u64,
    #[serde(default = "default_cap")]
    pub max_replications: u64,
}

fn default_pilot() -> u64 {
    1000
}

fn default_cap() -> u64 {
    1_000_000
}

fn default_replications() -> u64 {
    10_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub model: Option<ModelSpec>,
    #[serde(default)]
    pub n: Option<Vec<u64>>,
    #[serde(default)]
    pub b: Option<Vec<f64>>,
    #[serde(default)]
    pub b_per_n: Option<f64>,
    #[serde(default)]
    pub mu: Option<f64>,
    #[serde(default)]
    pub r: Option<Vec<u64>>,
    #[serde(default)]
    pub regime: Option<RegimeSpec>,
    #[serde(default = "default_replications")]
    pub replications: u64,
    #[serde(default)]
    pub planning: Option<Planning>,
    /// Draws per sampling check in the property suite.
    #[serde(default)]
    pub property_draws: Option<u64>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub threads: Option<usize>,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("cannot parse config: {e}")))
    }

    fn bare(experiment: ExperimentKind) -> Self {
        Self {
            experiment,
            model: None,
            n: None,
            b: None,
            b_per_n: None,
            mu: None,
            r: None,
            regime: None,
            replications: default_replications(),
            planning: None,
            property_draws: None,
            seed: None,
            threads: None,
            output: None,
        }
    }

    pub fn preset(name: &str) -> Result<Self, CliError> {
        let kind = match name {
            "table1" => ExperimentKind::Table1,
            "table2" => ExperimentKind::Table2,
            "table3" => ExperimentKind::Table3,
            "property_suite" => ExperimentKind::PropertySuite,
            other => {
                return Err(CliError::Config(format!(
                    "unknown preset {other:?}; expected table1, table2, table3 or property_suite"
                )))
            }
        };
        Ok(Self::bare(kind))
    }

    /// Fills in the table defaults for anything the config left out.
    pub fn with_defaults(mut self) -> Self {
        let queue = ModelSpec::Queue { service_alpha: 2.5, load: 0.5 };
        match self.experiment {
            ExperimentKind::Table1 => {
                self.model.get_or_insert(ModelSpec::LambdaLaplace { alpha: 4.0 });
                self.n.get_or_insert_with(|| vec![100, 500, 1000]);
                if self.b.is_none() {
                    self.b_per_n.get_or_insert(1.0);
                }
            }
            ExperimentKind::Table2 => {
                self.model.get_or_insert(queue);
                self.b.get_or_insert_with(|| vec![1e2, 1e3, 1e4]);
                self.r.get_or_insert_with(|| vec![2]);
            }
            ExperimentKind::Table3 => {
                self.model.get_or_insert(queue);
                self.b.get_or_insert_with(|| vec![1e3]);
                self.r.get_or_insert_with(|| vec![2, 10, 100]);
            }
            ExperimentKind::LevelCrossing => {
                self.r.get_or_insert_with(|| vec![2]);
            }
            ExperimentKind::LargeDeviation | ExperimentKind::PropertySuite => {}
        }
        if matches!(self.experiment, ExperimentKind::Table2 | ExperimentKind::Table3 | ExperimentKind::LevelCrossing) {
            self.regime.get_or_insert(RegimeSpec::FiniteVariance);
        }
        self
    }

    pub fn is_crossing(&self) -> bool {
        matches!(self.experiment, ExperimentKind::LevelCrossing | ExperimentKind::Table2 | ExperimentKind::Table3)
    }

    pub fn is_large_deviation(&self) -> bool {
        matches!(self.experiment, ExperimentKind::LargeDeviation | ExperimentKind::Table1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_parses() {
        let c = ExperimentConfig::from_json(r#"{"experiment": "table2"}"#).unwrap().with_defaults();
        assert_eq!(c.b.as_deref(), Some(&[1e2, 1e3, 1e4][..]));
        assert_eq!(c.regime, Some(RegimeSpec::FiniteVariance));
        assert_eq!(c.replications, 10_000);
    }

    #[test]
    fn tagged_model_and_regime() {
        let c = ExperimentConfig::from_json(
            r#"{"experiment": "level_crossing",
                "model": {"kind": "pareto_centered", "alpha": 1.75},
                "regime": {"kind": "strong_efficiency", "beta": 2.25},
                "b": [100], "mu": 1.0}"#,
        )
        .unwrap();
        assert_eq!(c.model, Some(ModelSpec::ParetoCentered { alpha: 1.75 }));
        assert_eq!(c.regime, Some(RegimeSpec::StrongEfficiency { beta: Some(2.25), allow_boundary: false }));
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(ExperimentConfig::from_json(r#"{"experiment": "table1", "nn": [1]}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"experiment": "table9"}"#).is_err());
        assert!(ExperimentConfig::preset("table4").is_err());
    }
}
