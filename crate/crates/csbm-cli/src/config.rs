//! Model config files (JSON or TOML) mirroring the generative spec, with the
//! scaled parameterizations used throughout the experiments.

use std::path::Path;

use csbm::expfam::Family;
use csbm::{CsbmSpec, Error, Result, SquareMat};
use serde::{Deserialize, Serialize};

/// On-disk model description. Rates may be absolute (`p`) or scaled
/// (`alpha`, meaning `p = alpha log n / n`); weight and attribute parameters
/// may be natural (`theta` / `eta`) or means; attribute means may also be
/// placed on a regular polygon via `radius`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub n: usize,
    pub k: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pi: Option<Vec<f64>>,
    pub edges: EdgeConfig,
    /// Omit for binary networks (presence-only unit weights).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<WeightConfig>,
    pub attributes: AttrConfig,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub strict_weights: bool,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_in: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_out: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_in: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_out: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightConfig {
    pub family: Family,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_in: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_out: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttrConfig {
    pub family: Family,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean: Option<Vec<Vec<f64>>>,
    /// Means on the vertices of a regular K-gon on this radius (times the
    /// scale below) in the first two coordinates.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "is_default_scale")]
    pub radius_scale: RadiusScale,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadiusScale {
    #[default]
    None,
    SqrtLogN,
}

fn is_default_scale(s: &RadiusScale) -> bool {
    *s == RadiusScale::None
}

impl ModelConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: ModelConfig = if path.extension().is_some_and(|e| e == "toml") {
            toml::from_str(&text)
                .map_err(|e| Error::Validation(format!("{}: {e}", path.display())))?
        } else {
            serde_json::from_str(&text)
                .map_err(|e| Error::Validation(format!("{}: {e}", path.display())))?
        };
        Ok(cfg)
    }

    pub fn to_spec(&self) -> Result<CsbmSpec> {
        let (n, k) = (self.n, self.k);
        let pi = match &self.pi {
            Some(pi) => pi.clone(),
            None => vec![1.0 / k as f64; k],
        };
        let edge_prob = self.edges.resolve(n, k)?;
        let attr_eta = self.attributes.resolve(n, k)?;

        let mut spec = match &self.weights {
            None => CsbmSpec::binary(n, pi, edge_prob, self.attributes.family, attr_eta)?,
            Some(w) => {
                let theta = w.resolve(k)?;
                CsbmSpec::new(n, pi, edge_prob, w.family, theta, self.attributes.family, attr_eta)?
            }
        };
        spec.strict_weights = self.strict_weights;
        Ok(spec)
    }
}

fn exactly_one(name: &str, set: &[bool]) -> Result<()> {
    if set.iter().filter(|&&b| b).count() != 1 {
        return Err(Error::Validation(format!(
            "{name}: give exactly one parameterization"
        )));
    }
    Ok(())
}

impl EdgeConfig {
    fn resolve(&self, n: usize, k: usize) -> Result<SquareMat> {
        let pairwise = self.p.is_some() || self.alpha.is_some();
        let in_out = self.p_in.is_some() || self.alpha_in.is_some();
        exactly_one("edges", &[pairwise, in_out])?;
        let scale = (n as f64).ln() / n as f64;
        if let Some(rows) = &self.p {
            return SquareMat::from_rows(rows.clone());
        }
        if let Some(rows) = &self.alpha {
            return Ok(SquareMat::from_rows(rows.clone())?.map(|a| a * scale));
        }
        let (diag, off) = match (self.p_in, self.p_out, self.alpha_in, self.alpha_out) {
            (Some(pi), Some(po), None, None) => (pi, po),
            (None, None, Some(ai), Some(ao)) => (ai * scale, ao * scale),
            _ => {
                return Err(Error::Validation(
                    "edges: pair p_in with p_out, or alpha_in with alpha_out".into(),
                ))
            }
        };
        Ok(SquareMat::homogeneous(k, diag, off))
    }
}

impl WeightConfig {
    fn resolve(&self, k: usize) -> Result<SquareMat> {
        if self.family.dim() != 1 {
            return Err(Error::Validation("weights: family must be scalar".into()));
        }
        exactly_one(
            "weights",
            &[self.theta.is_some(), self.mean.is_some(), self.mean_in.is_some()],
        )?;
        if let Some(rows) = &self.theta {
            return SquareMat::from_rows(rows.clone());
        }
        let mean_mat = if let Some(rows) = &self.mean {
            SquareMat::from_rows(rows.clone())?
        } else {
            let (mi, mo) = (
                self.mean_in.unwrap(),
                self.mean_out.ok_or_else(|| {
                    Error::Validation("weights: mean_in requires mean_out".into())
                })?,
            );
            SquareMat::homogeneous(k, mi, mo)
        };
        let mut theta = SquareMat::zeros(k);
        for a in 0..k {
            for b in 0..k {
                theta.set(a, b, self.family.mean_to_natural(&[mean_mat.get(a, b)])?[0]);
            }
        }
        Ok(theta)
    }
}

impl AttrConfig {
    fn resolve(&self, n: usize, k: usize) -> Result<Vec<Vec<f64>>> {
        exactly_one(
            "attributes",
            &[self.eta.is_some(), self.mean.is_some(), self.radius.is_some()],
        )?;
        if let Some(eta) = &self.eta {
            return Ok(eta.clone());
        }
        let means: Vec<Vec<f64>> = if let Some(m) = &self.mean {
            m.clone()
        } else {
            let r = self.radius.unwrap()
                * match self.radius_scale {
                    RadiusScale::None => 1.0,
                    RadiusScale::SqrtLogN => (n as f64).ln().sqrt(),
                };
            let d = self.family.dim();
            if d < 2 && k > 2 {
                return Err(Error::Validation(
                    "attributes: polygon placement needs dim >= 2 for K > 2".into(),
                ));
            }
            (0..k)
                .map(|a| {
                    let angle = 2.0 * std::f64::consts::PI * a as f64 / k as f64;
                    let mut m = vec![0.0; d];
                    m[0] = r * angle.cos();
                    if d >= 2 {
                        m[1] = r * angle.sin();
                    }
                    m
                })
                .collect()
        };
        means.iter().map(|m| self.family.mean_to_natural(m)).collect()
    }
}

/// Compact family syntax for CLI flags: `poisson`, `bernoulli`, `exponential`,
/// `gamma:shape=2.5`, `gaussian[:sigma2=1.0]` (attribute dimension is taken
/// from the data).
pub fn parse_family_flag(s: &str, dim: usize) -> Result<Family> {
    let (kind, rest) = match s.split_once(':') {
        Some((k, r)) => (k, Some(r)),
        None => (s, None),
    };
    let mut sigma2 = 1.0;
    let mut shape = None;
    if let Some(rest) = rest {
        for kv in rest.split(',') {
            match kv.split_once('=') {
                Some(("sigma2", v)) => {
                    sigma2 = v
                        .parse()
                        .map_err(|_| Error::Validation(format!("bad sigma2 {v:?}")))?
                }
                Some(("shape", v)) => {
                    shape = Some(
                        v.parse()
                            .map_err(|_| Error::Validation(format!("bad shape {v:?}")))?,
                    )
                }
                _ => return Err(Error::Validation(format!("bad family option {kv:?}"))),
            }
        }
    }
    match kind {
        "bernoulli" => Ok(Family::Bernoulli),
        "poisson" => Ok(Family::Poisson),
        "gaussian" => Family::gaussian(sigma2, dim),
        "exponential" => Ok(Family::Exponential),
        "gamma" => Family::gamma(shape.ok_or_else(|| {
            Error::Validation("gamma needs shape, e.g. gamma:shape=2.5".into())
        })?),
        other => Err(Error::Validation(format!("unknown family {other:?}"))),
    }
}
