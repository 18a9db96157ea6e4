use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::CliError;
use crate::harness::{AgentVariant, OracleTolerances};
use crate::instances::InstanceSpec;

/// Current experiment config schema version.
pub const CONFIG_VERSION: u32 = 1;

/// Seeds as an explicit list or as `base + i` for `i < count`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Seeds {
    List(Vec<u64>),
    Range { base: u64, count: u64 },
}

impl Seeds {
    pub fn expand(&self) -> Vec<u64> {
        match self {
            Seeds::List(v) => v.clone(),
            Seeds::Range { base, count } => (0..*count).map(|i| base + i).collect(),
        }
    }
}

fn default_delta() -> f64 {
    0.1
}

fn default_workers() -> usize {
    1
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

/// A full experiment: the cross product of instances, variants, horizons and seeds.
///
/// ```toml
/// version = 1
/// t_grid = [4096, 8192]
/// seeds = { base = 0, count = 10 }
/// delta = 0.1
/// output_dir = "out"
/// workers = 4
///
/// [[instances]]
/// family = "two_state_pair"
/// b = 10.0
/// member = "p1"
///
/// [[variants]]
/// label = "focus"
/// h_policy = { kind = "prior" }
/// gamma_policy = { kind = "avg_mode" }
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: u32,
    pub instances: Vec<InstanceSpec>,
    pub variants: Vec<AgentVariant>,
    pub t_grid: Vec<u64>,
    pub seeds: Seeds,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    #[serde(default = "default_workers")]
    pub workers: usize,
    /// Record per-episode tables and write an optimism audit.
    #[serde(default)]
    pub snapshots: bool,
    #[serde(default)]
    pub oracle: OracleTolerances,
}

fn schema(path: &str, message: impl Into<String>) -> CliError {
    CliError::Schema { path: path.into(), message: message.into() }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.version != CONFIG_VERSION {
            return Err(schema("version", format!("unsupported version {}, expected {CONFIG_VERSION}", self.version)));
        }
        if self.instances.is_empty() {
            return Err(schema("instances", "at least one instance is required"));
        }
        if self.variants.is_empty() {
            return Err(schema("variants", "at least one variant is required"));
        }
        let mut labels = BTreeSet::new();
        for (i, v) in self.variants.iter().enumerate() {
            if !labels.insert(v.label.as_str()) {
                return Err(schema(&format!("variants[{i}].label"), format!("duplicate label {:?}", v.label)));
            }
        }
        if self.t_grid.is_empty() {
            return Err(schema("t_grid", "at least one horizon is required"));
        }
        if self.t_grid[0] == 0 {
            return Err(schema("t_grid[0]", "horizons must be positive"));
        }
        for (i, w) in self.t_grid.windows(2).enumerate() {
            if w[1] <= w[0] {
                return Err(schema(&format!("t_grid[{}]", i + 1), "not strictly increasing"));
            }
        }
        let seeds = self.seeds.expand();
        if seeds.is_empty() {
            return Err(schema("seeds", "at least one seed is required"));
        }
        if seeds.iter().collect::<BTreeSet<_>>().len() != seeds.len() {
            return Err(schema("seeds", "seeds must be distinct"));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(schema("delta", format!("must lie in (0, 1), got {}", self.delta)));
        }
        if self.workers == 0 {
            return Err(schema("workers", "must be at least 1"));
        }
        if !(self.oracle.discounted > 0.0 && self.oracle.gain > 0.0) {
            return Err(schema("oracle", "tolerances must be positive"));
        }
        Ok(())
    }
}

/// Parses and validates a config from text. Diagnostics carry the line and
/// column reported by the TOML reader, or the offending field path.
pub fn parse_config_str(text: &str) -> Result<ExperimentConfig, CliError> {
    let config: ExperimentConfig = toml::from_str(text).map_err(|e| {
        let message = e.message().to_string();
        let location = e.span().map(|span| {
            let line = text[..span.start].matches('\n').count() + 1;
            let col = span.start - text[..span.start].rfind('\n').map_or(0, |i| i + 1) + 1;
            format!("line {line}, column {col}")
        });
        let location = location.unwrap_or_else(|| "top level".into());
        let is_schema = ["unknown field", "missing field", "invalid type", "invalid value", "unknown variant"]
            .iter()
            .any(|k| message.contains(k));
        if is_schema {
            CliError::Schema { path: location, message }
        } else {
            CliError::Parse(format!("{location}: {message}"))
        }
    })?;
    config.validate()?;
    Ok(config)
}

pub fn parse_config(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    parse_config_str(&text)
}
