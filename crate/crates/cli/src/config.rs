//! JSON experiment configuration.

use std::path::Path;

use frontlab::model::ModelConfig;
use frontlab::solver::SolverConfig;
use serde::{Deserialize, Serialize};

use crate::error::{io_err, CliError, Result};

fn default_level() -> f64 {
    0.5
}

fn default_window() -> f64 {
    0.5
}

fn default_speed_delta() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    #[serde(default = "default_level")]
    pub level: f64,
    /// Envelope slack; `0.1 r` when absent.
    #[serde(default)]
    pub epsilon: Option<f64>,
    /// Final fraction of the run used for fits.
    #[serde(default = "default_window")]
    pub window: f64,
    /// Truncation level for the compact-support speed search.
    #[serde(default = "default_speed_delta")]
    pub speed_delta: f64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            level: default_level(),
            epsilon: None,
            window: default_window(),
            speed_delta: default_speed_delta(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub name: String,
    pub model: ModelConfig,
    pub solver: SolverConfig,
    /// Equally spaced snapshots; used when `solver.snapshots` is empty.
    #[serde(default)]
    pub n_snapshots: Option<usize>,
    #[serde(default)]
    pub analysis: AnalysisConfig,
}

impl ExperimentConfig {
    pub fn from_value(value: serde_json::Value, context: &str) -> Result<Self> {
        let mut cfg: ExperimentConfig = serde_json::from_value(value).map_err(|source| CliError::Json {
            context: context.to_string(),
            source,
        })?;
        cfg.model.params.validate()?;
        if cfg.solver.snapshots.is_empty() {
            let n = cfg.n_snapshots.unwrap_or(100);
            cfg.solver.snapshots = SolverConfig::new(cfg.solver.t_end, n).snapshots;
        }
        Ok(cfg)
    }

    /// Reads the config and returns it with the raw JSON for echoing.
    pub fn load(path: &Path) -> Result<(Self, serde_json::Value)> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        let value: serde_json::Value = serde_json::from_str(&text).map_err(|source| CliError::Json {
            context: path.display().to_string(),
            source,
        })?;
        Ok((Self::from_value(value.clone(), &path.display().to_string())?, value))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_configs_parse() {
        let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
        for name in ["pme_poly", "noacc", "fde_kpp"] {
            let (cfg, _) = ExperimentConfig::load(&dir.join(format!("{name}.json"))).unwrap();
            assert_eq!(cfg.name, name);
            assert!(cfg.solver.snapshots.len() > 10);
            cfg.model.grid.build().unwrap();
        }
    }

    #[test]
    fn missing_field_is_rejected() {
        let v = serde_json::json!({"name": "x", "solver": {"t_end": 1.0}});
        assert!(matches!(ExperimentConfig::from_value(v, "inline"), Err(CliError::Json { .. })));
    }
}
