//! Generative model: block labels, zero-inflated pairwise interactions and
//! per-block node attributes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::expfam::Family;
use crate::mat::SquareMat;

const PI_TOL: f64 = 1e-12;

/// Full model specification: block prior, per-pair edge probabilities and
/// weight parameters, per-block attribute parameters.
#[derive(Debug, Clone)]
pub struct CsbmSpec {
    pub n: usize,
    pub k: usize,
    pub pi: Vec<f64>,
    /// Symmetric `K x K` matrix of interaction probabilities.
    pub edge_prob: SquareMat,
    pub weight_family: Family,
    /// Symmetric `K x K` matrix of scalar weight natural parameters.
    pub weight_theta: SquareMat,
    pub attr_family: Family,
    /// Per-block attribute natural parameters, `K` rows of length `attr dim`.
    pub attr_eta: Vec<Vec<f64>>,
    /// Binary network: a present interaction carries weight exactly 1 and the
    /// weight parameters are ignored.
    pub presence_only: bool,
    /// Resample zero draws from discrete weight laws (truncated-at-zero law)
    /// instead of reading them as absent edges.
    pub strict_weights: bool,
}

impl CsbmSpec {
    pub fn new(
        n: usize,
        pi: Vec<f64>,
        edge_prob: SquareMat,
        weight_family: Family,
        weight_theta: SquareMat,
        attr_family: Family,
        attr_eta: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let k = pi.len();
        let spec = CsbmSpec {
            n,
            k,
            pi,
            edge_prob,
            weight_family,
            weight_theta,
            attr_family,
            attr_eta,
            presence_only: false,
            strict_weights: false,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Binary network (presence-only weights) with node attributes.
    pub fn binary(
        n: usize,
        pi: Vec<f64>,
        edge_prob: SquareMat,
        attr_family: Family,
        attr_eta: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let k = pi.len();
        let spec = CsbmSpec {
            n,
            k,
            pi,
            edge_prob,
            weight_family: Family::Bernoulli,
            weight_theta: SquareMat::zeros(k),
            attr_family,
            attr_eta,
            presence_only: true,
            strict_weights: false,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(Error::Validation(format!("need K >= 2 blocks, got {}", self.k)));
        }
        if self.n < self.k {
            return Err(Error::Validation(format!("need n >= K, got n={} K={}", self.n, self.k)));
        }
        let sum: f64 = self.pi.iter().sum();
        if (sum - 1.0).abs() > PI_TOL {
            return Err(Error::Validation(format!("pi sums to {sum}, expected 1")));
        }
        if self.pi.iter().any(|&p| p <= 0.0) {
            return Err(Error::Validation("every pi_a must be positive".into()));
        }
        if self.edge_prob.k() != self.k || self.weight_theta.k() != self.k {
            return Err(Error::Validation("block matrices must be K x K".into()));
        }
        if !self.edge_prob.is_symmetric() || !self.weight_theta.is_symmetric() {
            return Err(Error::Validation("edge_prob and weight_theta must be symmetric".into()));
        }
        if self.edge_prob.iter().any(|p| !(0.0..=1.0).contains(&p)) {
            return Err(Error::Validation("edge probabilities must lie in [0,1]".into()));
        }
        if self.weight_family.dim() != 1 {
            return Err(Error::Validation("weight family must be scalar".into()));
        }
        if !self.presence_only {
            for a in 0..self.k {
                for b in a..self.k {
                    let th = [self.weight_theta.get(a, b)];
                    if !self.weight_family.contains_natural(&th) {
                        return Err(Error::Validation(format!(
                            "weight_theta[{a}][{b}] = {} outside {:?} domain",
                            th[0], self.weight_family
                        )));
                    }
                }
            }
        }
        if self.attr_eta.len() != self.k {
            return Err(Error::Validation("attr_eta must have K rows".into()));
        }
        for (a, eta) in self.attr_eta.iter().enumerate() {
            if !self.attr_family.contains_natural(eta) {
                return Err(Error::Validation(format!(
                    "attr_eta[{a}] = {eta:?} outside {:?} domain",
                    self.attr_family
                )));
            }
        }
        Ok(())
    }

    pub fn attr_dim(&self) -> usize {
        self.attr_family.dim()
    }

    /// `n I / log n` normalization used by all scaled threshold statements.
    pub fn log_scale(&self) -> f64 {
        (self.n as f64).ln()
    }
}

/// I.i.d. categorical labels with `P(z_i = k) = pi_k`.
pub fn sample_labels<R: Rng + ?Sized>(pi: &[f64], n: usize, rng: &mut R) -> Result<Vec<usize>> {
    if pi.len() < 2 {
        return Err(Error::Validation(format!("need K >= 2 blocks, got {}", pi.len())));
    }
    let sum: f64 = pi.iter().sum();
    if (sum - 1.0).abs() > PI_TOL || pi.iter().any(|&p| p <= 0.0) {
        return Err(Error::Validation("pi must be a positive probability vector".into()));
    }
    Ok((0..n).map(|_| categorical(pi, rng.random::<f64>())).collect())
}

fn categorical(pi: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (k, &p) in pi.iter().enumerate() {
        acc += p;
        if u < acc {
            return k;
        }
    }
    pi.len() - 1
}

// Stream tags for the counter-based seed split. Each pair and each node gets
// an independent stream derived from the master seed, so generation order
// (and any partitioning across workers) cannot change the output.
const STREAM_LABELS: u64 = 1;
const STREAM_PAIR: u64 = 2;
const STREAM_WEIGHT: u64 = 3;
const STREAM_ATTR: u64 = 4;

#[inline]
fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[inline]
fn mix(base: u64, tag: u64, counter: u64) -> u64 {
    splitmix64(base ^ splitmix64(tag ^ splitmix64(counter)))
}

#[inline]
fn unit_uniform(bits: u64) -> f64 {
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Draw one dataset from the model.
///
/// A single master value from `rng` seeds independent per-pair and per-node
/// streams; the result depends only on that value, not on traversal order.
pub fn generate<R: Rng + ?Sized>(spec: &CsbmSpec, rng: &mut R) -> Result<Dataset> {
    let base = rng.next_u64();
    generate_seeded(spec, base)
}

/// Deterministic generation from an explicit master seed.
pub fn generate_seeded(spec: &CsbmSpec, base: u64) -> Result<Dataset> {
    spec.validate()?;
    let n = spec.n;
    let d = spec.attr_dim();

    let mut label_rng = ChaCha8Rng::seed_from_u64(mix(base, STREAM_LABELS, 0));
    let z = sample_labels(&spec.pi, n, &mut label_rng)?;

    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let pair = (i as u64) * (n as u64) + j as u64;
            let p = spec.edge_prob.get(z[i], z[j]);
            if unit_uniform(mix(base, STREAM_PAIR, pair)) >= p {
                continue;
            }
            let w = if spec.presence_only {
                1.0
            } else {
                let mut wrng = ChaCha8Rng::seed_from_u64(mix(base, STREAM_WEIGHT, pair));
                let theta = spec.weight_theta.get(z[i], z[j]);
                let mut w = spec.weight_family.sample_scalar(theta, &mut wrng)?;
                if spec.strict_weights && spec.weight_family.is_discrete() {
                    while w == 0.0 {
                        w = spec.weight_family.sample_scalar(theta, &mut wrng)?;
                    }
                }
                w
            };
            if w != 0.0 {
                edges.push((i as u32, j as u32, w));
            }
        }
    }

    let mut y = vec![0.0; n * d];
    for i in 0..n {
        let mut arng = ChaCha8Rng::seed_from_u64(mix(base, STREAM_ATTR, i as u64));
        spec.attr_family.sample_into(&spec.attr_eta[z[i]], &mut arng, &mut y[i * d..(i + 1) * d])?;
    }

    Dataset::new(n, d, edges, y, Some(z))
}

/// Block-pair means implied by the spec (weight means and attribute means).
pub fn spec_means(spec: &CsbmSpec) -> Result<(SquareMat, Vec<Vec<f64>>)> {
    let mut mu = SquareMat::zeros(spec.k);
    for a in 0..spec.k {
        for b in 0..spec.k {
            let m = if spec.presence_only {
                1.0
            } else {
                spec.weight_family.grad_psi(&[spec.weight_theta.get(a, b)])?[0]
            };
            mu.set(a, b, m);
        }
    }
    let nu = spec
        .attr_eta
        .iter()
        .map(|eta| spec.attr_family.grad_psi(eta))
        .collect::<Result<Vec<_>>>()?;
    Ok((mu, nu))
}
