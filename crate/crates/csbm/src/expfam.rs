//! Exponential families: cumulant functions, Legendre conjugates, mean maps,
//! Bregman divergences and samplers.
//!
//! A family member has density `exp(<theta, x> - psi(theta))` with respect to
//! its canonical base measure. Log-densities here drop the base-measure term,
//! which cancels whenever likelihoods are compared across blocks for the same
//! observation. The conjugate `psi*` generates the Bregman divergence
//! `d(x, mu) = psi*(x) - psi*(mu) - <x - mu, grad psi*(mu)>`, and
//! `log p(x) = -d(x, mu) + psi*(x)` with `mu = grad psi(theta)`.

use rand::Rng;
use rand_distr::{Distribution, Exp, Gamma as GammaDist, Normal, Poisson as PoissonDist};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One of the supported exponential families.
///
/// The registry is a closed enum covering every distribution the model uses.
/// Adding a family means supplying the cumulant, its conjugate, both
/// parameter maps, the Bregman closed form and a sampler below.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FamilyRepr", into = "FamilyRepr")]
pub enum Family {
    /// Bernoulli on {0, 1}; natural parameter is the log-odds.
    Bernoulli,
    /// Poisson counts; natural parameter is log of the mean.
    Poisson,
    /// Gaussian with fixed spherical covariance `sigma2 * I` in `dim` dimensions.
    Gaussian { sigma2: f64, dim: usize },
    /// Exponential with rate `-theta`, `theta < 0`.
    Exponential,
    /// Gamma with fixed shape and rate `-theta`, `theta < 0`.
    Gamma { shape: f64 },
}

/// Wire format: `{"kind": "gaussian", "params": {"sigma2": 1.0, "dim": 2}}`.
#[derive(Serialize, Deserialize)]
struct FamilyRepr {
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    params: Option<FamilyParams>,
}

#[derive(Default, Serialize, Deserialize)]
struct FamilyParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sigma2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    shape: Option<f64>,
}

impl From<Family> for FamilyRepr {
    fn from(f: Family) -> Self {
        match f {
            Family::Bernoulli => FamilyRepr { kind: "bernoulli".into(), params: None },
            Family::Poisson => FamilyRepr { kind: "poisson".into(), params: None },
            Family::Gaussian { sigma2, dim } => FamilyRepr {
                kind: "gaussian".into(),
                params: Some(FamilyParams { sigma2: Some(sigma2), dim: Some(dim), shape: None }),
            },
            Family::Exponential => FamilyRepr { kind: "exponential".into(), params: None },
            Family::Gamma { shape } => FamilyRepr {
                kind: "gamma".into(),
                params: Some(FamilyParams { shape: Some(shape), ..Default::default() }),
            },
        }
    }
}

impl TryFrom<FamilyRepr> for Family {
    type Error = Error;

    fn try_from(r: FamilyRepr) -> Result<Self> {
        let p = r.params.unwrap_or_default();
        match r.kind.as_str() {
            "bernoulli" => Ok(Family::Bernoulli),
            "poisson" => Ok(Family::Poisson),
            "gaussian" => {
                let sigma2 = p.sigma2.unwrap_or(1.0);
                let dim = p.dim.unwrap_or(1);
                Family::gaussian(sigma2, dim)
            }
            "exponential" => Ok(Family::Exponential),
            "gamma" => {
                let shape = p.shape.ok_or_else(|| {
                    Error::Validation("family \"gamma\" requires params.shape".into())
                })?;
                Family::gamma(shape)
            }
            other => Err(Error::Validation(format!("unknown family kind {other:?}"))),
        }
    }
}

impl Family {
    pub fn gaussian(sigma2: f64, dim: usize) -> Result<Self> {
        if !(sigma2 > 0.0 && sigma2.is_finite()) {
            return Err(Error::Validation(format!("gaussian sigma2 must be positive, got {sigma2}")));
        }
        if dim == 0 {
            return Err(Error::Validation("gaussian dim must be >= 1".into()));
        }
        Ok(Family::Gaussian { sigma2, dim })
    }

    pub fn gamma(shape: f64) -> Result<Self> {
        if !(shape > 0.0 && shape.is_finite()) {
            return Err(Error::Validation(format!("gamma shape must be positive, got {shape}")));
        }
        Ok(Family::Gamma { shape })
    }

    /// Dimension of observations and natural parameters.
    pub fn dim(&self) -> usize {
        match self {
            Family::Gaussian { dim, .. } => *dim,
            _ => 1,
        }
    }

    /// Human-readable description of the open natural-parameter domain.
    pub fn natural_domain(&self) -> &'static str {
        match self {
            Family::Bernoulli | Family::Poisson => "(-inf, +inf)",
            Family::Gaussian { .. } => "R^dim",
            Family::Exponential | Family::Gamma { .. } => "(-inf, 0)",
        }
    }

    /// Human-readable description of the open mean domain.
    pub fn mean_domain(&self) -> &'static str {
        match self {
            Family::Bernoulli => "(0, 1)",
            Family::Poisson | Family::Exponential | Family::Gamma { .. } => "(0, +inf)",
            Family::Gaussian { .. } => "R^dim",
        }
    }

    pub fn contains_natural(&self, theta: &[f64]) -> bool {
        if theta.len() != self.dim() || theta.iter().any(|t| !t.is_finite()) {
            return false;
        }
        match self {
            Family::Exponential | Family::Gamma { .. } => theta[0] < 0.0,
            _ => true,
        }
    }

    pub fn contains_mean(&self, mu: &[f64]) -> bool {
        if mu.len() != self.dim() || mu.iter().any(|m| !m.is_finite()) {
            return false;
        }
        match self {
            Family::Bernoulli => mu[0] > 0.0 && mu[0] < 1.0,
            Family::Poisson | Family::Exponential | Family::Gamma { .. } => mu[0] > 0.0,
            Family::Gaussian { .. } => true,
        }
    }

    fn check_natural(&self, theta: &[f64]) -> Result<()> {
        if self.contains_natural(theta) {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "{self:?}: natural parameter {theta:?} outside {}",
                self.natural_domain()
            )))
        }
    }

    fn check_mean(&self, mu: &[f64]) -> Result<()> {
        if self.contains_mean(mu) {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "{self:?}: mean {mu:?} outside {}",
                self.mean_domain()
            )))
        }
    }

    /// Log-partition (cumulant) function.
    pub fn psi(&self, theta: &[f64]) -> Result<f64> {
        self.check_natural(theta)?;
        Ok(match self {
            Family::Bernoulli => ln_1p_exp(theta[0]),
            Family::Poisson => theta[0].exp(),
            Family::Gaussian { sigma2, .. } => {
                sigma2 * theta.iter().map(|t| t * t).sum::<f64>() / 2.0
            }
            Family::Exponential => -(-theta[0]).ln(),
            Family::Gamma { shape } => -shape * (-theta[0]).ln(),
        })
    }

    /// Legendre conjugate `psi*(x) = sup_theta <theta, x> - psi(theta)`.
    ///
    /// Lattice boundary points of the discrete families are allowed with the
    /// convention `0 log 0 = 0`, so `psi*` is 0 at Bernoulli x in {0, 1}.
    pub fn psi_star(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() || x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("{self:?}: observation {x:?} has wrong shape")));
        }
        match self {
            Family::Bernoulli => {
                let v = x[0];
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::Domain(format!("bernoulli conjugate needs x in [0,1], got {v}")));
                }
                Ok(xlnx(v) + xlnx(1.0 - v))
            }
            Family::Poisson => {
                let v = x[0];
                if v < 0.0 {
                    return Err(Error::Domain(format!("poisson conjugate needs x >= 0, got {v}")));
                }
                Ok(xlnx(v) - v)
            }
            Family::Gaussian { sigma2, .. } => {
                Ok(x.iter().map(|v| v * v).sum::<f64>() / (2.0 * sigma2))
            }
            Family::Exponential => {
                let v = x[0];
                if v <= 0.0 {
                    return Err(Error::Domain(format!("exponential conjugate needs x > 0, got {v}")));
                }
                Ok(-1.0 - v.ln())
            }
            Family::Gamma { shape } => {
                let v = x[0];
                if v <= 0.0 {
                    return Err(Error::Domain(format!("gamma conjugate needs x > 0, got {v}")));
                }
                Ok(-shape + shape * (shape / v).ln())
            }
        }
    }

    /// Mean map `mu = grad psi(theta)`.
    pub fn grad_psi(&self, theta: &[f64]) -> Result<Vec<f64>> {
        self.check_natural(theta)?;
        Ok(match self {
            Family::Bernoulli => vec![sigmoid(theta[0])],
            Family::Poisson => vec![theta[0].exp()],
            Family::Gaussian { sigma2, .. } => theta.iter().map(|t| sigma2 * t).collect(),
            Family::Exponential => vec![-1.0 / theta[0]],
            Family::Gamma { shape } => vec![-shape / theta[0]],
        })
    }

    /// Inverse mean map: natural parameter with the given mean.
    pub fn mean_to_natural(&self, mu: &[f64]) -> Result<Vec<f64>> {
        self.check_mean(mu)?;
        Ok(match self {
            Family::Bernoulli => vec![(mu[0] / (1.0 - mu[0])).ln()],
            Family::Poisson => vec![mu[0].ln()],
            Family::Gaussian { sigma2, .. } => mu.iter().map(|m| m / sigma2).collect(),
            Family::Exponential => vec![-1.0 / mu[0]],
            Family::Gamma { shape } => vec![-shape / mu[0]],
        })
    }

    /// Bregman divergence `d_{psi*}(x, mu)`, nonnegative and zero iff `x == mu`.
    ///
    /// `mu` must lie in the open mean domain; `x` may sit on the closure
    /// boundary where `psi*` extends by continuity (Poisson/Bernoulli lattice
    /// points).
    pub fn bregman(&self, x: &[f64], mu: &[f64]) -> Result<f64> {
        self.check_mean(mu)?;
        match self {
            Family::Bernoulli => {
                let (x, m) = (x[0], mu[0]);
                if !(0.0..=1.0).contains(&x) {
                    return Err(Error::Domain(format!("bernoulli divergence needs x in [0,1], got {x}")));
                }
                Ok(kl_bernoulli(x, m))
            }
            Family::Poisson => {
                let (x, m) = (x[0], mu[0]);
                if x < 0.0 {
                    return Err(Error::Domain(format!("poisson divergence needs x >= 0, got {x}")));
                }
                Ok(xlnx_over(x, m) - x + m)
            }
            Family::Gaussian { sigma2, .. } => {
                if x.len() != mu.len() {
                    return Err(Error::Domain("gaussian divergence: dimension mismatch".into()));
                }
                let ssq: f64 = x.iter().zip(mu).map(|(a, b)| (a - b) * (a - b)).sum();
                Ok(ssq / (2.0 * sigma2))
            }
            Family::Exponential => {
                let (x, m) = (x[0], mu[0]);
                if x <= 0.0 {
                    return Err(Error::Domain(format!("itakura-saito divergence needs x > 0, got {x}")));
                }
                let r = x / m;
                Ok(r - r.ln() - 1.0)
            }
            Family::Gamma { shape } => {
                let (x, m) = (x[0], mu[0]);
                if x <= 0.0 {
                    return Err(Error::Domain(format!("gamma divergence needs x > 0, got {x}")));
                }
                let r = x / m;
                Ok(shape * (r - r.ln() - 1.0))
            }
        }
    }

    /// Log-density `<theta, x> - psi(theta)` relative to the canonical base
    /// measure. Satisfies `log_density = -bregman(x, grad_psi(theta)) + psi_star(x)`.
    pub fn log_density(&self, theta: &[f64], x: &[f64]) -> Result<f64> {
        self.check_natural(theta)?;
        if x.len() != self.dim() {
            return Err(Error::Domain(format!("{self:?}: observation {x:?} has wrong shape")));
        }
        let dot: f64 = theta.iter().zip(x).map(|(t, v)| t * v).sum();
        Ok(dot - self.psi(theta)?)
    }

    /// KL divergence between two members, `KL(p_theta1 || p_theta2)`.
    pub fn kl(&self, theta1: &[f64], theta2: &[f64]) -> Result<f64> {
        let mu1 = self.grad_psi(theta1)?;
        let mu2 = self.grad_psi(theta2)?;
        self.bregman(&mu1, &mu2)
    }

    /// Draw one observation into `out` (`out.len() == dim`).
    pub fn sample_into<R: Rng + ?Sized>(&self, theta: &[f64], rng: &mut R, out: &mut [f64]) -> Result<()> {
        self.check_natural(theta)?;
        match self {
            Family::Bernoulli => {
                let p = sigmoid(theta[0]);
                out[0] = if rng.random::<f64>() < p { 1.0 } else { 0.0 };
            }
            Family::Poisson => {
                let lambda = theta[0].exp();
                let d = PoissonDist::new(lambda)
                    .map_err(|e| Error::Domain(format!("poisson sampler: {e}")))?;
                out[0] = d.sample(rng);
            }
            Family::Gaussian { sigma2, .. } => {
                let sd = sigma2.sqrt();
                for (o, t) in out.iter_mut().zip(theta) {
                    let d = Normal::new(sigma2 * t, sd).expect("finite gaussian parameters");
                    *o = d.sample(rng);
                }
            }
            Family::Exponential => {
                let d = Exp::new(-theta[0]).expect("positive rate");
                out[0] = d.sample(rng);
            }
            Family::Gamma { shape } => {
                let d = GammaDist::new(*shape, -1.0 / theta[0]).expect("valid gamma parameters");
                out[0] = d.sample(rng);
            }
        }
        Ok(())
    }

    /// Draw one scalar observation (dim-1 families only).
    pub fn sample_scalar<R: Rng + ?Sized>(&self, theta: f64, rng: &mut R) -> Result<f64> {
        let mut out = [0.0];
        self.sample_into(&[theta], rng, &mut out)?;
        Ok(out[0])
    }

    /// Whether observations live on a lattice containing 0 (so a weight draw
    /// can collide with the absent-edge symbol).
    pub fn is_discrete(&self) -> bool {
        matches!(self, Family::Bernoulli | Family::Poisson)
    }

    /// Project a mean vector onto the interior of the mean domain.
    pub fn clamp_mean(&self, mu: &mut [f64], eps: f64) {
        match self {
            Family::Bernoulli => mu[0] = mu[0].clamp(eps, 1.0 - eps),
            Family::Poisson | Family::Exponential | Family::Gamma { .. } => {
                mu[0] = mu[0].max(eps)
            }
            Family::Gaussian { .. } => {}
        }
    }
}

/// A zero-inflated law: 0 with probability `1 - p`, otherwise a draw from the
/// weight family at natural parameter `theta`.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroInflated {
    pub p: f64,
    pub family: Family,
    pub theta: Vec<f64>,
}

impl ZeroInflated {
    pub fn new(p: f64, family: Family, theta: Vec<f64>) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Domain(format!("inflation probability {p} outside [0,1]")));
        }
        if !family.contains_natural(&theta) {
            return Err(Error::Domain(format!(
                "{family:?}: natural parameter {theta:?} outside {}",
                family.natural_domain()
            )));
        }
        Ok(ZeroInflated { p, family, theta })
    }

    pub fn scalar(p: f64, family: Family, theta: f64) -> Result<Self> {
        Self::new(p, family, vec![theta])
    }

    /// Draw one weight. Continuous families are almost surely nonzero on the
    /// present branch. For discrete families, `strict` resamples zero draws
    /// (truncated-at-zero law); otherwise an emitted zero reads as an absent
    /// edge downstream.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, strict: bool) -> Result<f64> {
        if rng.random::<f64>() >= self.p {
            return Ok(0.0);
        }
        let mut w = self.family.sample_scalar(self.theta[0], rng)?;
        if strict && self.family.is_discrete() {
            while w == 0.0 {
                w = self.family.sample_scalar(self.theta[0], rng)?;
            }
        }
        Ok(w)
    }
}

fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + e^t)` without overflow.
fn ln_1p_exp(t: f64) -> f64 {
    if t > 0.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

/// `x log x` with the `0 log 0 = 0` convention.
fn xlnx(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// `x log(x / m)` with the `0 log 0 = 0` convention.
fn xlnx_over(x: f64, m: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * (x / m).ln()
    }
}

/// Binary KL divergence `KL(Ber(x) || Ber(m))` for `x` in `[0, 1]`, `m` in `(0, 1)`.
pub fn kl_bernoulli(x: f64, m: f64) -> f64 {
    xlnx_over(x, m) + xlnx_over(1.0 - x, 1.0 - m)
}
