//! Run configuration files.
//!
//! ```json
//! {
//!   "command": "deviations",
//!   "model": { "law": {...}, "window": [-6, 6], "functionals": [...] },
//!   "parameters": { "n_list": [64, 256], "x_grid": [0.3], "replicas": 100000, "seed": 7 },
//!   "out": "artifacts/deviations"
//! }
//! ```
//!
//! `out` is resolved against the directory of the config file. Unknown
//! fields are rejected at every level.

use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use cobound_core::process::ModelDescription;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::errors::ValidationError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CommandName {
    Decompose,
    Verify,
    Orlicz,
    Deviations,
    Limits,
    Tightness,
}

impl fmt::Display for CommandName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CommandName::Decompose => "decompose",
            CommandName::Verify => "verify",
            CommandName::Orlicz => "orlicz",
            CommandName::Deviations => "deviations",
            CommandName::Limits => "limits",
            CommandName::Tightness => "tightness",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: CommandName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelDescription>,
    #[serde(default)]
    pub parameters: serde_json::Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| ValidationError(format!("{}: {e}", path.display())))?;
        if let (Some(out), Some(dir)) = (&cfg.out, path.parent()) {
            if out.is_relative() {
                cfg.out = Some(dir.join(out));
            }
        }
        Ok(cfg)
    }

    /// Command parameters, with absent parameters read as `{}`.
    pub fn params<T: DeserializeOwned>(&self) -> Result<T> {
        let value = if self.parameters.is_null() {
            serde_json::Value::Object(Default::default())
        } else {
            self.parameters.clone()
        };
        serde_json::from_value(value)
            .map_err(|e| ValidationError(format!("{} parameters: {e}", self.command)).into())
    }

    pub fn model(&self) -> Result<&ModelDescription> {
        self.model
            .as_ref()
            .ok_or_else(|| ValidationError(format!("{} needs a model", self.command)).into())
    }

    /// Seed from the parameters, falling back to the model's.
    pub fn seed(&self, from_params: Option<u64>) -> Result<u64> {
        from_params
            .or_else(|| self.model.as_ref().and_then(|m| m.seed))
            .ok_or_else(|| {
                ValidationError(format!(
                    "{} is a Monte Carlo command and needs a seed",
                    self.command
                ))
                .into()
            })
    }
}

fn default_tol() -> f64 {
    1e-12
}

fn default_j_max() -> usize {
    4
}

fn default_l2_n_max() -> usize {
    5
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecomposeParams {
    pub k_range: [i64; 2],
    #[serde(default)]
    pub i_max: Option<usize>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    /// Largest `j` in the tail condition on `U`.
    #[serde(default = "default_j_max")]
    pub j_max: usize,
    /// Required `j0` beyond which the tail condition columns vanish.
    #[serde(default)]
    pub vanishing_by: Option<i64>,
    /// Column entries at or below this count as zero.
    #[serde(default = "default_tol")]
    pub zero_tol: f64,
    /// Also run the shift-invariant form (period-1 models).
    #[serde(default)]
    pub stationary: bool,
    #[serde(default = "default_l2_n_max")]
    pub l2_n_max: usize,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateRequest {
    pub n: u32,
    pub lambda: f64,
    #[serde(rename = "M")]
    pub m: f64,
}

fn default_k_max() -> u32 {
    200
}
fn default_n_max() -> u32 {
    20
}
fn default_c_tol() -> f64 {
    1e-16
}
fn default_n_list_orlicz() -> Vec<u32> {
    vec![1, 2, 3, 4, 5]
}
fn default_c_grid() -> Vec<f64> {
    vec![0.90, 0.95, 0.99]
}
fn default_grid_step() -> f64 {
    0.01
}
fn default_moment_tol() -> f64 {
    1e-8
}
fn default_mass_n_max() -> u32 {
    10
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrliczParams {
    #[serde(default = "default_k_max")]
    pub k_max: u32,
    #[serde(default = "default_n_max")]
    pub n_max: u32,
    #[serde(default = "default_c_tol")]
    pub c_tol: f64,
    #[serde(default = "default_n_list_orlicz")]
    pub n_list: Vec<u32>,
    /// Scales `c` at which `E e^{|X_n|/c} > 2` must be certified.
    #[serde(default = "default_c_grid")]
    pub c_grid: Vec<f64>,
    #[serde(default = "default_grid_step")]
    pub grid_step: f64,
    #[serde(default = "default_moment_tol")]
    pub moment_tol: f64,
    /// Block masses are checked against `2^{-n}` up to this `n`.
    #[serde(default = "default_mass_n_max")]
    pub mass_n_max: u32,
    #[serde(default = "default_moment_tol")]
    pub mass_tol: f64,
    #[serde(default = "default_tol")]
    pub projection_tol: f64,
    /// Single certificate mode.
    #[serde(default)]
    pub certificate: Option<CertificateRequest>,
}

impl Default for OrliczParams {
    fn default() -> Self {
        serde_json::from_value(serde_json::json!({})).expect("all fields have defaults")
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Reference {
    pub n: usize,
    pub x: f64,
    pub p: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviationsParams {
    pub n_list: Vec<usize>,
    pub x_grid: Vec<f64>,
    pub replicas: u64,
    #[serde(default)]
    pub seed: Option<u64>,
    /// Defaults to `sup ‖Y‖_∞` of the decomposition.
    #[serde(default)]
    pub a: Option<f64>,
    /// Defaults to `sup ‖U‖_∞` of the decomposition.
    #[serde(default)]
    pub b: Option<f64>,
    #[serde(default)]
    pub subexp_lambda: Option<f64>,
    #[serde(default)]
    pub subexp_eps: Option<f64>,
    /// Known tail probabilities the estimates must reproduce within CI.
    #[serde(default)]
    pub reference: Vec<Reference>,
    /// Check `p_hat - ci ≤ bound_ii` on every row.
    #[serde(default = "yes")]
    pub check_bound: bool,
}

fn yes() -> bool {
    true
}

fn default_eps() -> f64 {
    0.5
}

fn default_closed_tol() -> f64 {
    1e-9
}

fn default_ks_threshold() -> f64 {
    0.02
}

/// `σ_n² = a·n + b` style expectations.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClosedForm {
    pub sigma_sq: [f64; 2],
    pub sigma_bar_sq: [f64; 2],
    /// `n·g1²`.
    #[serde(default)]
    pub g1_sq_n: Option<f64>,
    #[serde(default = "default_closed_tol")]
    pub tol: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KsParams {
    pub n: usize,
    pub replicas: u64,
    #[serde(default = "default_ks_threshold")]
    pub threshold: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IpParams {
    pub n_list: Vec<usize>,
    pub replicas: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LilParams {
    pub n_list: Vec<usize>,
    pub replicas: u64,
    /// Dominating law for the `U` tail condition, as `(value, mass)` pairs.
    #[serde(default)]
    pub z: Option<Vec<(f64, f64)>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitsParams {
    pub n_list: Vec<usize>,
    /// Replicas for the per-row KS column; 0 skips it.
    #[serde(default)]
    pub replicas: u64,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default = "default_eps")]
    pub epsilon: f64,
    #[serde(default)]
    pub closed_form: Option<ClosedForm>,
    #[serde(default)]
    pub ks: Option<KsParams>,
    #[serde(default)]
    pub ip: Option<IpParams>,
    #[serde(default)]
    pub lil: Option<LilParams>,
}

fn default_q() -> f64 {
    0.99
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TightnessParams {
    pub n_list: Vec<usize>,
    pub replicas: u64,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default = "default_q")]
    pub q: f64,
    #[serde(default)]
    pub max_quantile: Option<f64>,
    /// Expect the degenerate regime: bounded quantiles and `σ_n² ≡ 0`.
    #[serde(default)]
    pub expect_degenerate: Option<bool>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(params: serde_json::Value) -> RunConfig {
        serde_json::from_value(serde_json::json!({"command": "orlicz", "parameters": params}))
            .unwrap()
    }

    #[test]
    fn absent_parameters_take_defaults() {
        let c: RunConfig = serde_json::from_str(r#"{"command": "orlicz"}"#).unwrap();
        let p: OrliczParams = c.params().unwrap();
        assert_eq!((p.k_max, p.n_max), (200, 20));
        assert_eq!(p.c_grid, vec![0.90, 0.95, 0.99]);
    }

    #[test]
    fn unknown_parameter_is_rejected() {
        let err = cfg(serde_json::json!({"kmax": 10}))
            .params::<OrliczParams>()
            .unwrap_err();
        assert!(err.downcast_ref::<ValidationError>().is_some());
    }

    #[test]
    fn unknown_top_level_field_is_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"command": "orlicz", "extra": 1}"#).is_err());
        assert!(serde_json::from_str::<RunConfig>(r#"{"command": "plot"}"#).is_err());
    }

    #[test]
    fn seed_falls_back_to_model_and_is_required() {
        let c = cfg(serde_json::json!({}));
        assert_eq!(c.seed(Some(4)).unwrap(), 4);
        assert!(c.seed(None).is_err());
    }

    #[test]
    fn out_is_relative_to_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"command": "orlicz", "out": "res"}"#).unwrap();
        let c = RunConfig::load(&path).unwrap();
        assert_eq!(c.out.unwrap(), dir.path().join("res"));
    }
}
