//! Scenario files: JSON with a `schema` version, strict keys and
//! whole-file validation.

use std::fmt;
use std::path::{Path, PathBuf};

use freshopt::{DemandDistribution, MarketParams, OptionContract, Overconfidence, SweepMode};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const SCHEMA_VERSION: u32 = 1;

/// The baseline scenario shipped with the crate; used when no `--config` is
/// given.
pub const BASELINE_JSON: &str = include_str!("../examples/baseline.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comment: Option<String>,
    pub demand: DemandDistribution,
    pub market: MarketParams,
    #[serde(default)]
    pub contract: Option<OptionContract>,
    #[serde(default = "default_overconfidence")]
    pub overconfidence: Overconfidence,
    #[serde(default)]
    pub oracle: OracleConfig,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
}

fn default_overconfidence() -> Overconfidence {
    Overconfidence::RATIONAL
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleConfig {
    pub samples: u64,
    pub seed: u64,
    pub grid_step: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            samples: 1_000_000,
            seed: 42,
            grid_step: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub mode: SweepMode,
    #[serde(default)]
    pub fixed: Option<f64>,
    #[serde(default)]
    pub k_grid: KGridConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KGridConfig {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Default for KGridConfig {
    fn default() -> Self {
        Self {
            start: 0.75,
            stop: 1.5,
            step: 0.01,
        }
    }
}

/// A failed check at a dotted field path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldError {
    pub path: String,
    pub message: String,
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config file {} not found", .0.display())]
    NotFound(PathBuf),

    #[error("cannot read {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at line {line}, column {column}: {message}")]
    ParseError {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid config:\n{}", format_fields(.0))]
    ValidationError(Vec<FieldError>),
}

fn format_fields(errors: &[FieldError]) -> String {
    errors
        .iter()
        .map(|e| format!("  {e}"))
        .collect::<Vec<_>>()
        .join("\n")
}

pub fn load_config(path: &Path) -> Result<ScenarioConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| match source.kind() {
        std::io::ErrorKind::NotFound => ConfigError::NotFound(path.to_path_buf()),
        _ => ConfigError::Io {
            path: path.to_path_buf(),
            source,
        },
    })?;
    parse_config(&text)
}

/// Parses and validates a config held in memory.
///
/// Malformed JSON is a [`ConfigError::ParseError`]. Well-formed JSON with the
/// wrong shape (unknown or missing keys, wrong types) stops at the first such
/// problem; value checks then run over the whole file and are reported
/// together.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let mut de = serde_json::Deserializer::from_str(text);
    let config: ScenarioConfig = match serde_path_to_error::deserialize(&mut de) {
        Ok(c) => c,
        Err(err) => {
            let path = err.path().to_string();
            let inner = err.into_inner();
            return Err(match inner.classify() {
                serde_json::error::Category::Syntax | serde_json::error::Category::Eof => {
                    ConfigError::ParseError {
                        line: inner.line(),
                        column: inner.column(),
                        message: strip_position(&inner),
                    }
                }
                _ => ConfigError::ValidationError(vec![FieldError {
                    path: if path == "." { "(root)".to_string() } else { path },
                    message: strip_position(&inner),
                }]),
            });
        }
    };
    de.end().map_err(|e| ConfigError::ParseError {
        line: e.line(),
        column: e.column(),
        message: strip_position(&e),
    })?;
    let errors = config.validate();
    if errors.is_empty() {
        Ok(config)
    } else {
        Err(ConfigError::ValidationError(errors))
    }
}

// serde_json appends " at line L column C"; position is reported separately.
fn strip_position(e: &serde_json::Error) -> String {
    let full = e.to_string();
    match full.rfind(" at line ") {
        Some(i) => full[..i].to_string(),
        None => full,
    }
}

impl ScenarioConfig {
    pub fn baseline() -> Self {
        parse_config(BASELINE_JSON).expect("shipped baseline config is valid")
    }

    /// All value-level problems, each with its field path.
    pub fn validate(&self) -> Vec<FieldError> {
        let mut out = Vec::new();
        let mut push = |path: String, message: String| out.push(FieldError { path, message });

        if self.schema != SCHEMA_VERSION {
            push(
                "schema".to_string(),
                format!(
                    "unsupported schema version {}, expected {SCHEMA_VERSION}",
                    self.schema
                ),
            );
        }
        for (field, msg) in self.demand.violations() {
            push(format!("demand.params.{field}"), msg);
        }
        let market_violations = self.market.violations();
        let market_ok = market_violations.is_empty();
        for (field, msg) in market_violations {
            push(format!("market.{field}"), msg);
        }
        if let (Some(contract), true) = (&self.contract, market_ok) {
            for (field, msg) in contract.violations(&self.market) {
                push(format!("contract.{field}"), msg);
            }
        }
        if !self.overconfidence.is_valid() {
            push(
                "overconfidence".to_string(),
                format!("must be finite and > 0, got {}", self.overconfidence.value()),
            );
        }
        if self.oracle.samples == 0 {
            push("oracle.samples".to_string(), "must be >= 1".to_string());
        }
        if !(self.oracle.grid_step.is_finite() && self.oracle.grid_step > 0.0) {
            push(
                "oracle.grid_step".to_string(),
                format!("must be finite and > 0, got {}", self.oracle.grid_step),
            );
        }
        if let Some(sweep) = &self.sweep {
            match (sweep.mode, sweep.fixed) {
                (SweepMode::FixedContract, _) if self.contract.is_none() => push(
                    "sweep.mode".to_string(),
                    "fixed-contract needs a top-level contract".to_string(),
                ),
                (SweepMode::FixedExercisePrice | SweepMode::FixedPremium, None) => push(
                    "sweep.fixed".to_string(),
                    format!("required for {}", sweep.mode.name()),
                ),
                (SweepMode::FixedExercisePrice | SweepMode::FixedPremium, Some(v))
                    if !(v.is_finite() && v > 0.0) =>
                {
                    push(
                        "sweep.fixed".to_string(),
                        format!("must be finite and > 0, got {v}"),
                    )
                }
                _ => {}
            }
            let KGridConfig { start, stop, step } = sweep.k_grid;
            if !(start.is_finite() && start > 0.0) {
                push(
                    "sweep.k_grid.start".to_string(),
                    format!("must be finite and > 0, got {start}"),
                );
            }
            if !(stop.is_finite() && stop >= start) {
                push(
                    "sweep.k_grid.stop".to_string(),
                    format!("must be finite and >= start, got {stop}"),
                );
            }
            if !(step.is_finite() && step > 0.0) {
                push(
                    "sweep.k_grid.step".to_string(),
                    format!("must be finite and > 0, got {step}"),
                );
            }
        }
        out
    }
}
