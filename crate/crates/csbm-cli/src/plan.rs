//! Experiment plans: a base model, one or two swept parameters, and seeded
//! independent trials per grid cell.

use std::path::Path;

use csbm::{Error, Result};
use serde::{Deserialize, Serialize};

use crate::config::ModelConfig;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanConfig {
    pub base: ModelConfig,
    /// One axis for curves, two for phase diagrams (first = rows).
    pub axes: Vec<Axis>,
    pub trials: usize,
    pub seed: u64,
    #[serde(default)]
    pub metric: Metric,
    #[serde(default)]
    pub cluster: ClusterOptions,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub param: AxisParam,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisParam {
    AlphaIn,
    AlphaOut,
    PIn,
    POut,
    AttrRadius,
    WeightMeanIn,
    WeightMeanOut,
}

impl AxisParam {
    pub fn name(&self) -> &'static str {
        match self {
            AxisParam::AlphaIn => "alpha_in",
            AxisParam::AlphaOut => "alpha_out",
            AxisParam::PIn => "p_in",
            AxisParam::POut => "p_out",
            AxisParam::AttrRadius => "attr_radius",
            AxisParam::WeightMeanIn => "weight_mean_in",
            AxisParam::WeightMeanOut => "weight_mean_out",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    #[default]
    ExactRecoveryRate,
    MeanAri,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClusterOptions {
    pub init: InitKind,
    pub max_iter: usize,
    pub restarts: usize,
    /// Cluster with a different weight divergence than the generator
    /// (misspecification runs); compact flag syntax, e.g. `"gaussian"`.
    pub weight_family: Option<String>,
    /// Same for the attribute divergence.
    pub attr_family: Option<String>,
    pub strict_weight_mode: bool,
}

impl Default for ClusterOptions {
    fn default() -> Self {
        ClusterOptions {
            init: InitKind::Spectral,
            max_iter: 100,
            restarts: 10,
            weight_family: None,
            attr_family: None,
            strict_weight_mode: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitKind {
    #[default]
    Spectral,
    Random,
}

impl PlanConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let plan: PlanConfig = if path.extension().is_some_and(|e| e == "toml") {
            toml::from_str(&text)
                .map_err(|e| Error::Validation(format!("{}: {e}", path.display())))?
        } else {
            serde_json::from_str(&text)
                .map_err(|e| Error::Validation(format!("{}: {e}", path.display())))?
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Validation("plan needs at least one trial per cell".into()));
        }
        if self.axes.is_empty() || self.axes.len() > 2 {
            return Err(Error::Validation("plan needs one or two axes".into()));
        }
        if self.axes.iter().any(|a| a.values.is_empty()) {
            return Err(Error::Validation("every axis needs at least one value".into()));
        }
        Ok(())
    }

    /// Grid cells in row-major order (first axis outer).
    pub fn cells(&self) -> Vec<Vec<(AxisParam, f64)>> {
        match self.axes.len() {
            1 => self.axes[0]
                .values
                .iter()
                .map(|&v| vec![(self.axes[0].param, v)])
                .collect(),
            _ => {
                let mut out = Vec::new();
                for &v0 in &self.axes[0].values {
                    for &v1 in &self.axes[1].values {
                        out.push(vec![(self.axes[0].param, v0), (self.axes[1].param, v1)]);
                    }
                }
                out
            }
        }
    }

    /// The base config with one cell's parameter values applied.
    pub fn cell_config(&self, cell: &[(AxisParam, f64)]) -> Result<ModelConfig> {
        let mut cfg = self.base.clone();
        for &(param, value) in cell {
            apply_axis(&mut cfg, param, value)?;
        }
        Ok(cfg)
    }
}

/// Overwrite one swept knob. The base config must use the matching
/// parameterization (in/out rates or a radius) for the knob to be sweepable.
pub fn apply_axis(cfg: &mut ModelConfig, param: AxisParam, value: f64) -> Result<()> {
    match param {
        AxisParam::AlphaIn | AxisParam::AlphaOut => {
            if cfg.edges.alpha_in.is_none() || cfg.edges.alpha_out.is_none() {
                return Err(Error::Validation(format!(
                    "axis {} needs edges given as alpha_in/alpha_out",
                    param.name()
                )));
            }
            if param == AxisParam::AlphaIn {
                cfg.edges.alpha_in = Some(value);
            } else {
                cfg.edges.alpha_out = Some(value);
            }
        }
        AxisParam::PIn | AxisParam::POut => {
            if cfg.edges.p_in.is_none() || cfg.edges.p_out.is_none() {
                return Err(Error::Validation(format!(
                    "axis {} needs edges given as p_in/p_out",
                    param.name()
                )));
            }
            if param == AxisParam::PIn {
                cfg.edges.p_in = Some(value);
            } else {
                cfg.edges.p_out = Some(value);
            }
        }
        AxisParam::AttrRadius => {
            if cfg.attributes.radius.is_none() {
                return Err(Error::Validation(
                    "axis attr_radius needs attributes given by radius".into(),
                ));
            }
            cfg.attributes.radius = Some(value);
        }
        AxisParam::WeightMeanIn | AxisParam::WeightMeanOut => {
            let w = cfg.weights.as_mut().ok_or_else(|| {
                Error::Validation("weight-mean axes need a weights section".into())
            })?;
            if w.mean_in.is_none() || w.mean_out.is_none() {
                return Err(Error::Validation(format!(
                    "axis {} needs weights given as mean_in/mean_out",
                    param.name()
                )));
            }
            if param == AxisParam::WeightMeanIn {
                w.mean_in = Some(value);
            } else {
                w.mean_out = Some(value);
            }
        }
    }
    Ok(())
}

#[inline]
fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-trial seed: a hash of (master seed, cell index, trial index), so cells
/// and trials are independent and any scheduling order gives the same data.
pub fn trial_seed(master: u64, cell: usize, trial: usize) -> u64 {
    splitmix64(master ^ splitmix64((cell as u64) << 32 ^ trial as u64 ^ 0xC5B1_5765_0A1F_8E11))
}
