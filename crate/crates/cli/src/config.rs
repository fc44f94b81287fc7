use std::fs;
use std::path::{Path, PathBuf};

use autopr::experiments::SweepSpec;
use autopr::repartition::BetaBoundsMethod;
use autopr::{GaussianMeasurementModel, Mode, PriorConfig, SamplerConfig};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::CliError;

fn default_mode() -> Mode {
    Mode::AutoPr
}

fn yes() -> bool {
    true
}

/// Which optional files `run` writes next to `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmitOptions {
    #[serde(default = "yes")]
    pub dead_points: bool,
    #[serde(default = "yes")]
    pub equal_weights: bool,
    /// Simulated measurements as `data.csv` plus a JSON sidecar.
    #[serde(default)]
    pub dataset: bool,
}

impl Default for EmitOptions {
    fn default() -> Self {
        Self {
            dead_points: true,
            equal_weights: true,
            dataset: false,
        }
    }
}

/// A single run: simulate one dataset and sample its posterior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: GaussianMeasurementModel,
    pub prior: PriorConfig,
    pub theta_star: Vec<f64>,
    #[serde(default = "default_mode")]
    pub mode: Mode,
    /// β prior range in auto mode; defaults to `[β_min, 1]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_range: Option<(f64, f64)>,
    /// Dataset seed. The sampler seed is derived from it.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub sampler: SamplerConfig,
    #[serde(default)]
    pub beta_bounds: BetaBoundsMethod,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub emit: EmitOptions,
}

/// Only a prior, for `prior-curve`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriorFile {
    pub prior: PriorConfig,
}

pub fn load<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// Seeds are derived per repetition, so a seed in `[sampler]` would be
/// silently overwritten; refuse it instead.
pub fn reject_sampler_seed(sampler: &SamplerConfig) -> Result<(), CliError> {
    if sampler.seed != 0 {
        return Err(CliError::Config(
            "sampler.seed is derived from the dataset seed; set the top-level `seed` (run) or `base_seed` (sweep cases) instead"
                .into(),
        ));
    }
    Ok(())
}

pub fn load_sweep(path: &Path) -> Result<SweepSpec, CliError> {
    let spec: SweepSpec = load(path)?;
    reject_sampler_seed(&spec.sampler)?;
    Ok(spec)
}
