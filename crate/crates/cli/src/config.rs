//! Per-subcommand configuration documents. Every config is strict TOML
//! (unknown keys are rejected with the offending key named) and serializes
//! back out verbatim into the run manifest, so a manifest is sufficient to
//! re-run the command exactly.

use std::path::PathBuf;

use barter_core::abm::Placement;
use barter_core::analytics::{ExtraRegressor, FilterConfig};
use barter_core::error::{Error, Result};
use barter_core::model::{ModelParams, Stopping};
use barter_core::synth::SynthOptions;
use serde::{Deserialize, Serialize};

fn default_curve_grid() -> usize {
    1001
}
fn default_verify_n_grid() -> usize {
    200
}
fn default_verify_epsilon() -> f64 {
    1e-3
}
fn default_stopping() -> Stopping {
    Stopping::Literal
}
fn default_het_grid() -> usize {
    201
}
fn default_damping() -> f64 {
    0.5
}
fn default_max_sweeps() -> u64 {
    200
}
fn default_band_tol() -> f64 {
    0.05
}
fn default_placement() -> Placement {
    Placement::IidUniform
}
fn default_bins() -> usize {
    100
}
fn default_kde_points() -> usize {
    201
}
fn default_true() -> bool {
    true
}

/// `solve`: homogeneous club partition, outcome curve, followee ranges, and
/// a brute-force verification report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveConfig {
    pub params: ModelParams,
    #[serde(default = "default_stopping")]
    pub stopping: Stopping,
    /// Evenly spaced abilities for the outcome-curve and range tables.
    #[serde(default = "default_curve_grid")]
    pub curve_grid: usize,
    /// Deviation-scan resolution of the verification report.
    #[serde(default = "default_verify_n_grid")]
    pub verify_n_grid: usize,
    #[serde(default = "default_verify_epsilon")]
    pub verify_epsilon: f64,
}

/// `solve-het`: threshold fixed point and its outcome curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveHetConfig {
    pub params: ModelParams,
    #[serde(default = "default_het_grid")]
    pub grid_size: usize,
    #[serde(default = "default_damping")]
    pub damping: f64,
}

/// `simulate`: finite-population best-response dynamics plus a comparison
/// against the analytic partition for the same parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub params: ModelParams,
    pub n: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_placement")]
    pub placement: Placement,
    #[serde(default = "default_max_sweeps")]
    pub max_sweeps: u64,
    /// Half-width of the ability band around each analytic club interval
    /// when classifying simulated barter edges.
    #[serde(default = "default_band_tol")]
    pub band_tol: f64,
}

/// `synth`: materialize the follow graph and user metadata implied by an
/// equilibrium — either one loaded from a file or one solved from `params`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthConfig {
    /// Path to an equilibrium document written by `solve`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub equilibrium: Option<PathBuf>,
    /// Parameters to solve in-process instead (mutually exclusive with
    /// `equilibrium`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<ModelParams>,
    /// Stopping rule for the in-process solve; only valid with `params`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stopping: Option<Stopping>,
    pub n: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub generator: SynthOptions,
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        match (&self.equilibrium, &self.params) {
            (Some(_), Some(_)) => Err(Error::config(
                "give either `equilibrium` or `params`, not both".to_string(),
            )),
            (None, None) => Err(Error::config(
                "missing equilibrium source: set `equilibrium` or `params`".to_string(),
            )),
            (Some(_), None) if self.stopping.is_some() => Err(Error::config(
                "`stopping` applies only to an in-process solve from `params`".to_string(),
            )),
            _ => Ok(()),
        }
    }
}

/// `analyze`: load → filter → ability index → network stats → series /
/// followee distributions / densities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyzeConfig {
    pub edges: PathBuf,
    pub users: PathBuf,
    #[serde(default = "default_true")]
    pub has_header: bool,
    /// Fail on the first malformed edge line instead of skipping it.
    #[serde(default)]
    pub strict: bool,
    /// Percentile bins of every series table.
    #[serde(default = "default_bins")]
    pub bins: usize,
    /// Grid resolution of the density tables.
    #[serde(default = "default_kde_points")]
    pub kde_points: usize,
    #[serde(default)]
    pub extra_regressors: Vec<ExtraRegressor>,
    #[serde(default)]
    pub filters: FilterConfig,
}

/// `verify`: score a stored equilibrium against the brute-force deviation
/// scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    pub equilibrium: PathBuf,
    #[serde(default = "default_verify_n_grid")]
    pub n_grid: usize,
    #[serde(default = "default_verify_epsilon")]
    pub epsilon: f64,
}

/// Parses a strict TOML config, labeling errors with the file path.
pub fn parse<T: serde::de::DeserializeOwned>(path: &std::path::Path, text: &str) -> Result<T> {
    toml::from_str(text)
        .map_err(|e| Error::config(format!("{}: {}", path.display(), e.message())))
}
