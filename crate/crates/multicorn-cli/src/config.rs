//! Declarative run configuration: TOML file, `--set` overrides and flags.

use std::path::{Path, PathBuf};

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("invalid TOML: {0}")]
    Syntax(String),
    #[error("{path}: {message}")]
    Schema { path: String, message: String },
    #[error("invalid override `{0}`: expected key.path=value")]
    Override(String),
}

/// Verdict thresholds of the experiments.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub e0_min_fraction: f64,
    pub e0_control_max_fraction: f64,
    /// Fraction of directly iterated probe pixels that must agree with the
    /// symmetric render.
    pub e1_probe_agreement: f64,
    pub e2_closed_form: f64,
    pub e4_deltoid: f64,
    pub e4_cusp: f64,
    pub e5_index_quarter: f64,
    pub e5_index_imaginary: f64,
    pub e5_cusp_index: f64,
    pub e5_cusp_distance: f64,
    pub e5_evidence_above: f64,
    pub e5_evidence_below: f64,
    pub e6_slope_relative: f64,
    pub e7_height_quarter: f64,
    pub e7_antisymmetry: f64,
    pub e7_min_samples: usize,
    pub e8_jump_factor: f64,
    pub e8_colanding: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            e0_min_fraction: 1.0,
            e0_control_max_fraction: 0.0,
            e1_probe_agreement: 0.999,
            e2_closed_form: 1e-9,
            e4_deltoid: 1e-6,
            e4_cusp: 1e-8,
            e5_index_quarter: 1e-6,
            e5_index_imaginary: 1e-6,
            e5_cusp_index: 5.0,
            e5_cusp_distance: 1e-2,
            e5_evidence_above: 1.1,
            e5_evidence_below: 0.9,
            e6_slope_relative: 0.1,
            e7_height_quarter: 1e-4,
            e7_antisymmetry: 1e-4,
            e7_min_samples: 50,
            e8_jump_factor: 10.0,
            e8_colanding: 1e-6,
        }
    }
}

/// Wall-clock budgets in seconds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(default, deny_unknown_fields)]
pub struct Budgets {
    pub e0: f64,
    pub e1: f64,
    pub e2: f64,
    pub e3: f64,
    pub e4: f64,
    /// Per traced arc.
    pub e5_per_arc: f64,
    pub e6: f64,
    pub e7: f64,
    pub e8: f64,
}

impl Default for Budgets {
    fn default() -> Self {
        Self {
            e0: 10.0,
            e1: 30.0,
            e2: 120.0,
            e3: 30.0,
            e4: 300.0,
            e5_per_arc: 300.0,
            e6: 120.0,
            e7: 300.0,
            e8: 300.0,
        }
    }
}

/// Problem sizes of the experiments.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(default, deny_unknown_fields)]
pub struct Sizes {
    pub e0_scan_points: usize,
    pub e0_grid: usize,
    pub e0_radius: f64,
    pub e0_control_modulus: f64,
    pub e1_pixels: usize,
    pub e1_zoom_pixels: usize,
    pub e1_max_iterations: u32,
    pub e2_max_period_d2: usize,
    pub e2_max_period_d3: usize,
    pub e3_max_degree: u32,
    pub e3_max_period: u32,
    pub e3_enumeration_limit: u64,
    pub e4_directions: usize,
    pub e4_period3_directions: usize,
    pub e5_arc_samples: usize,
    pub e7_arc_samples: usize,
    pub e7_antisymmetry_probes: usize,
    pub e8_offsets: Vec<f64>,
}

impl Default for Sizes {
    fn default() -> Self {
        Self {
            e0_scan_points: 64,
            e0_grid: 41,
            e0_radius: 1e-2,
            e0_control_modulus: 5.0,
            e1_pixels: 1024,
            e1_zoom_pixels: 512,
            e1_max_iterations: 500,
            e2_max_period_d2: 5,
            e2_max_period_d3: 3,
            e3_max_degree: 4,
            e3_max_period: 12,
            e3_enumeration_limit: 1_000_000,
            e4_directions: 360,
            e4_period3_directions: 96,
            e5_arc_samples: 48,
            e7_arc_samples: 64,
            e7_antisymmetry_probes: 8,
            e8_offsets: vec![1e-2, 1e-3, 1e-4],
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// Seed of the multistart random number generator.
    pub seed: Option<u64>,
    /// Worker threads; `MULTICORN_WORKERS` takes precedence.
    pub workers: Option<usize>,
    /// Directory receiving manifests and artifacts.
    pub output_dir: Option<PathBuf>,
    pub tolerances: Tolerances,
    pub budgets: Budgets,
    pub sizes: Sizes,
}

/// Default multistart seed.
pub const DEFAULT_SEED: u64 = 0x5eed;

impl Config {
    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }

    /// Parses TOML text, reporting the dotted path of any offending key.
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| ConfigError::Syntax(e.to_string()))?;
        Self::from_table(table)
    }

    pub fn from_table(table: toml::Table) -> Result<Self, ConfigError> {
        serde_path_to_error::deserialize(table).map_err(|e| ConfigError::Schema {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })
    }

    /// Loads an optional file and applies `key.path=value` overrides.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self, ConfigError> {
        let mut table = match path {
            Some(p) => std::fs::read_to_string(p)
                .map_err(|source| ConfigError::Read {
                    path: p.to_path_buf(),
                    source,
                })?
                .parse::<toml::Table>()
                .map_err(|e| ConfigError::Syntax(e.to_string()))?,
            None => toml::Table::new(),
        };
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        Self::from_table(table)
    }
}

fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<(), ConfigError> {
    let (key, raw) = assignment.split_once('=').ok_or_else(|| ConfigError::Override(assignment.into()))?;
    let parts: Vec<&str> = key.trim().split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(ConfigError::Override(assignment.into()));
    }
    // Bare words are taken as strings.
    let value = format!("v = {}", raw.trim())
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.trim().to_string()));
    let mut cur = table;
    for p in &parts[..parts.len() - 1] {
        let entry = cur
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry.as_table_mut().ok_or_else(|| ConfigError::Override(assignment.into()))?;
    }
    cur.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}
