//! Bregman hard clustering: iterative joint-likelihood maximization over
//! block memberships, plus an exhaustive MLE for tiny instances.
//!
//! The per-node objective for placing node `i` in block `a` is
//! `sum_{j != i} [ dkl(A_ij || p_{a z_j}) + A_ij d_{psi*}(X_ij, mu_{a z_j}) ] +
//! d_{phi*}(Y_i, nu_a)`,
//! the node's contribution to the conditional negative log-likelihood given
//! the other labels. Terms constant in the assignment (`s psi*(x)` and the
//! entropy of the presence indicator) are dropped; their differences cancel
//! exactly across blocks.

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::expfam::Family;
use crate::mat::SquareMat;

/// Knobs for parameter estimation and the sweep loop.
#[derive(Debug, Clone)]
pub struct ClusterConfig {
    pub max_iter: usize,
    /// Clamp width: `p_hat` is kept inside `[clamp_eps / n^2, 1 - clamp_eps]`
    /// and means are projected `clamp_eps` inside their domain boundary.
    pub clamp_eps: f64,
    /// Blocks smaller than this are re-seeded after a sweep (at least 1).
    pub min_block_size: usize,
    pub seed: u64,
    /// Use truncated-at-zero weight densities for discrete weight families.
    pub strict_weight_mode: bool,
    /// Add the estimated `-log pi_a` prior term to the per-node objective.
    pub use_prior: bool,
    /// Disable to cluster on attributes alone.
    pub use_edges: bool,
    /// Stop when the total objective decreases by less than this per sweep.
    pub nll_tol: f64,
}

impl Default for ClusterConfig {
    fn default() -> Self {
        ClusterConfig {
            max_iter: 100,
            clamp_eps: 1e-8,
            min_block_size: 1,
            seed: 0,
            strict_weight_mode: false,
            use_prior: false,
            use_edges: true,
            nll_tol: 1e-10,
        }
    }
}

/// Estimated block parameters.
#[derive(Debug, Clone)]
pub struct BlockParams {
    /// Clamped interaction probabilities, `p[a][b] = (Z'AZ)_ab / (n_a n_b)`.
    pub p: SquareMat,
    /// Mean weight over present edges per block pair, clamped to the mean
    /// domain interior.
    pub mu: SquareMat,
    /// Per-block attribute means.
    pub nu: Vec<Vec<f64>>,
    /// Block pairs with presences but no edges: their mean weight fell back
    /// to the global nonzero-weight mean.
    pub degenerate_cells: Vec<(usize, usize)>,
}

/// Membership plus the parameters estimated from it.
#[derive(Debug, Clone)]
pub struct ClusteringState {
    pub labels: Vec<usize>,
    pub k: usize,
    pub params: BlockParams,
}

/// Outcome of the sweep loop.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub state: ClusteringState,
    /// Total objective at the start of each sweep.
    pub nll_history: Vec<f64>,
    pub sweeps: usize,
    /// Labels reached a fixed point (as opposed to stopping on the objective
    /// tolerance or the iteration cap).
    pub converged: bool,
    /// `(sweep, block)` re-seed events for blocks emptied by a sweep.
    pub reseeded: Vec<(usize, usize)>,
}

fn block_counts(labels: &[usize], k: usize) -> Vec<usize> {
    let mut counts = vec![0usize; k];
    for &l in labels {
        counts[l] += 1;
    }
    counts
}

/// Block parameter estimates from a hard membership.
pub fn estimate_params(
    ds: &Dataset,
    labels: &[usize],
    k: usize,
    weight_family: Family,
    attr_family: Family,
    cfg: &ClusterConfig,
) -> Result<BlockParams> {
    let n = ds.n();
    if labels.len() != n {
        return Err(Error::LengthMismatch { left: labels.len(), right: n });
    }
    if labels.iter().any(|&l| l >= k) {
        return Err(Error::Validation("label out of range".into()));
    }
    let counts = block_counts(labels, k);
    if let Some(b) = counts.iter().position(|&c| c == 0) {
        return Err(Error::EmptyBlock(b));
    }

    let mut edge_cnt = SquareMat::zeros(k);
    let mut wsum = SquareMat::zeros(k);
    let mut total_w = 0.0;
    let mut total_e = 0.0;
    for &(i, j, w) in ds.edges() {
        let (a, b) = (labels[i as usize], labels[j as usize]);
        edge_cnt.set(a, b, edge_cnt.get(a, b) + 1.0);
        edge_cnt.set(b, a, edge_cnt.get(b, a) + 1.0);
        wsum.set(a, b, wsum.get(a, b) + w);
        wsum.set(b, a, wsum.get(b, a) + w);
        total_w += w;
        total_e += 1.0;
    }

    let lo = cfg.clamp_eps / (n as f64 * n as f64);
    let hi = 1.0 - cfg.clamp_eps;
    let mut p = SquareMat::zeros(k);
    let mut mu = SquareMat::zeros(k);
    let mut degenerate = Vec::new();
    let global_mean = if total_e > 0.0 { total_w / total_e } else { 1.0 };
    for a in 0..k {
        for b in 0..k {
            let pairs = counts[a] as f64 * counts[b] as f64;
            p.set(a, b, (edge_cnt.get(a, b) / pairs).clamp(lo, hi));
            let m = if edge_cnt.get(a, b) > 0.0 {
                wsum.get(a, b) / edge_cnt.get(a, b)
            } else {
                if a <= b {
                    degenerate.push((a, b));
                }
                global_mean
            };
            let mut mv = [m];
            weight_family.clamp_mean(&mut mv, cfg.clamp_eps);
            mu.set(a, b, mv[0]);
        }
    }

    let d = ds.attr_dim();
    let mut nu = vec![vec![0.0; d]; k];
    for i in 0..n {
        for (acc, y) in nu[labels[i]].iter_mut().zip(ds.attr(i)) {
            *acc += y;
        }
    }
    for (a, row) in nu.iter_mut().enumerate() {
        for v in row.iter_mut() {
            *v /= counts[a] as f64;
        }
        attr_family.clamp_mean(row, cfg.clamp_eps);
    }

    Ok(BlockParams { p, mu, nu, degenerate_cells: degenerate })
}

/// Negative log-likelihood of one zero-inflated observation, up to terms
/// constant in `(p, mu)`: `dkl(s || p) + s d_{psi*}(x, mu)` with `s = 1(x != 0)`.
pub fn zero_inflated_nll(family: Family, p: f64, mu: f64, x: f64, strict: bool) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("presence probability {p} outside [0,1]")));
    }
    if x == 0.0 {
        return Ok(-(1.0 - p).ln());
    }
    let mut v = -p.ln() + family.bregman(&[x], &[mu])?;
    if strict {
        if let Some(p0) = family.prob_zero(mu) {
            v += (1.0 - p0).ln();
        }
    }
    Ok(v)
}

impl Family {
    /// Probability that a discrete family member with mean `mu` emits 0.
    pub fn prob_zero(&self, mu: f64) -> Option<f64> {
        match self {
            Family::Poisson => Some((-mu).exp()),
            Family::Bernoulli => Some(1.0 - mu),
            _ => None,
        }
    }
}

/// Per-sweep tables for the `O(K + deg)` per-node objective.
struct SweepCache {
    k: usize,
    neg_log1m_p: Vec<f64>,
    neg_log_p: Vec<f64>,
    strict_corr: Vec<f64>,
    /// `sum_b counts[b] * neg_log1m_p[a][b]` (self term still included).
    base: Vec<f64>,
    log_prior: Vec<f64>,
}

impl SweepCache {
    fn new(
        labels: &[usize],
        k: usize,
        params: &BlockParams,
        weight_family: Family,
        cfg: &ClusterConfig,
    ) -> Self {
        let counts: Vec<f64> = block_counts(labels, k).iter().map(|&c| c as f64).collect();
        let n: f64 = counts.iter().sum();
        let mut neg_log1m_p = vec![0.0; k * k];
        let mut neg_log_p = vec![0.0; k * k];
        let mut strict_corr = vec![0.0; k * k];
        for a in 0..k {
            for b in 0..k {
                let p = params.p.get(a, b);
                neg_log1m_p[a * k + b] = -(1.0 - p).ln();
                neg_log_p[a * k + b] = -p.ln();
                if cfg.strict_weight_mode {
                    if let Some(p0) = weight_family.prob_zero(params.mu.get(a, b)) {
                        strict_corr[a * k + b] = (1.0 - p0).ln();
                    }
                }
            }
        }
        let mut base = vec![0.0; k];
        for a in 0..k {
            base[a] = (0..k).map(|b| counts[b] * neg_log1m_p[a * k + b]).sum();
        }
        let log_prior = if cfg.use_prior {
            (0..k).map(|a| -(counts[a] / n).ln()).collect()
        } else {
            vec![0.0; k]
        };
        SweepCache { k, neg_log1m_p, neg_log_p, strict_corr, base, log_prior }
    }

    #[inline]
    #[allow(clippy::too_many_arguments)]
    fn node_nll(
        &self,
        ds: &Dataset,
        i: usize,
        a: usize,
        labels: &[usize],
        params: &BlockParams,
        weight_family: Family,
        attr_family: Family,
        cfg: &ClusterConfig,
    ) -> Result<f64> {
        let k = self.k;
        let mut v = 0.0;
        if cfg.use_edges {
            // all-absent baseline over j != i, then corrections on present edges
            v = self.base[a] - self.neg_log1m_p[a * k + labels[i]];
            for &(j, w) in ds.neighbors(i) {
                let b = labels[j as usize];
                v += self.neg_log_p[a * k + b] - self.neg_log1m_p[a * k + b]
                    + weight_family.bregman(&[w], &[params.mu.get(a, b)])?
                    + self.strict_corr[a * k + b];
            }
        }
        v += attr_family.bregman(ds.attr(i), &params.nu[a])?;
        v += self.log_prior[a];
        Ok(v)
    }
}

/// Contribution of node `i` to the conditional negative log-likelihood when
/// placed in block `a`, computed in `O(K + deg(i))`.
#[allow(clippy::too_many_arguments)]
pub fn node_nll(
    ds: &Dataset,
    i: usize,
    a: usize,
    labels: &[usize],
    params: &BlockParams,
    weight_family: Family,
    attr_family: Family,
    cfg: &ClusterConfig,
) -> Result<f64> {
    let k = params.p.k();
    let cache = SweepCache::new(labels, k, params, weight_family, cfg);
    cache.node_nll(ds, i, a, labels, params, weight_family, attr_family, cfg)
}

/// Reference `O(n)` evaluation of the same quantity, summing over every other
/// node explicitly.
#[allow(clippy::too_many_arguments)]
pub fn node_nll_dense(
    ds: &Dataset,
    i: usize,
    a: usize,
    labels: &[usize],
    params: &BlockParams,
    weight_family: Family,
    attr_family: Family,
    cfg: &ClusterConfig,
) -> Result<f64> {
    let mut v = 0.0;
    if cfg.use_edges {
        let neighbors = ds.neighbors(i);
        for (j, &b) in labels.iter().enumerate() {
            if j == i {
                continue;
            }
            let w = neighbors
                .binary_search_by_key(&(j as u32), |&(nb, _)| nb)
                .map(|idx| neighbors[idx].1)
                .unwrap_or(0.0);
            v += zero_inflated_nll(
                weight_family,
                params.p.get(a, b),
                params.mu.get(a, b),
                w,
                cfg.strict_weight_mode,
            )?;
        }
    }
    v += attr_family.bregman(ds.attr(i), &params.nu[a])?;
    if cfg.use_prior {
        let counts = block_counts(labels, params.p.k());
        v += -((counts[a] as f64) / ds.n() as f64).ln();
    }
    Ok(v)
}

/// Total negative log-likelihood of a labeling under `params`, pairs counted
/// once, constants dropped as in the per-node objective.
pub fn total_nll(
    ds: &Dataset,
    labels: &[usize],
    params: &BlockParams,
    weight_family: Family,
    attr_family: Family,
    cfg: &ClusterConfig,
) -> Result<f64> {
    let k = params.p.k();
    let counts = block_counts(labels, k);
    let mut v = 0.0;
    if cfg.use_edges {
        for a in 0..k {
            for b in a..k {
                let pairs = if a == b {
                    counts[a] as f64 * (counts[a] as f64 - 1.0) / 2.0
                } else {
                    counts[a] as f64 * counts[b] as f64
                };
                v += pairs * -(1.0 - params.p.get(a, b)).ln();
            }
        }
        for &(i, j, w) in ds.edges() {
            let (a, b) = (labels[i as usize], labels[j as usize]);
            v -= -(1.0 - params.p.get(a, b)).ln();
            v += zero_inflated_nll(
                weight_family,
                params.p.get(a, b),
                params.mu.get(a, b),
                w,
                cfg.strict_weight_mode,
            )?;
        }
    }
    for (i, &zi) in labels.iter().enumerate() {
        v += attr_family.bregman(ds.attr(i), &params.nu[zi])?;
    }
    Ok(v)
}

/// Iterative Bregman hard clustering: alternate parameter estimation with a
/// batch reassignment of every node to its best block, until the labels are a
/// fixed point, the objective stalls, or `max_iter` sweeps.
///
/// Deterministic given `(ds, z0, cfg)`. Returns the lowest-objective state
/// visited. Ties in the per-node argmin break toward the lowest block index.
pub fn iterate(
    ds: &Dataset,
    z0: &[usize],
    k: usize,
    weight_family: Family,
    attr_family: Family,
    cfg: &ClusterConfig,
) -> Result<FitResult> {
    let n = ds.n();
    if z0.len() != n {
        return Err(Error::LengthMismatch { left: z0.len(), right: n });
    }
    if z0.iter().any(|&l| l >= k) {
        return Err(Error::Validation("initial label out of range".into()));
    }

    let mut z = z0.to_vec();
    let mut history = Vec::new();
    let mut reseeded = Vec::new();
    let mut converged = false;
    let mut best: Option<(f64, Vec<usize>, BlockParams)> = None;
    let mut sweeps = 0;

    for sweep in 0..cfg.max_iter {
        let params = estimate_params(ds, &z, k, weight_family, attr_family, cfg)?;
        let nll = total_nll(ds, &z, &params, weight_family, attr_family, cfg)?;
        history.push(nll);
        if best.as_ref().is_none_or(|(b, _, _)| nll < *b) {
            best = Some((nll, z.clone(), params.clone()));
        }
        if sweep > 0 && history[sweep - 1] - nll < cfg.nll_tol {
            break;
        }

        let cache = SweepCache::new(&z, k, &params, weight_family, cfg);
        let mut z_new = vec![0usize; n];
        let mut l_new = vec![0.0f64; n];
        for i in 0..n {
            let mut best_a = 0;
            let mut best_v = f64::INFINITY;
            for a in 0..k {
                let v = cache.node_nll(ds, i, a, &z, &params, weight_family, attr_family, cfg)?;
                if v < best_v {
                    best_v = v;
                    best_a = a;
                }
            }
            z_new[i] = best_a;
            l_new[i] = best_v;
        }
        sweeps = sweep + 1;

        // re-seed undersized blocks with the worst-fitting nodes
        let min_size = cfg.min_block_size.max(1);
        let mut counts = block_counts(&z_new, k);
        for b in 0..k {
            while counts[b] < min_size {
                let donor = (0..n)
                    .filter(|&i| counts[z_new[i]] > min_size)
                    .max_by(|&x, &y| l_new[x].total_cmp(&l_new[y]));
                let Some(i) = donor else { break };
                counts[z_new[i]] -= 1;
                z_new[i] = b;
                counts[b] += 1;
                l_new[i] = f64::NEG_INFINITY;
                reseeded.push((sweep, b));
            }
        }

        if z_new == z {
            converged = true;
            break;
        }
        z = z_new;
    }

    let (_, labels, params) = best.expect("at least one sweep ran");
    Ok(FitResult {
        state: ClusteringState { labels, k, params },
        nll_history: history,
        sweeps,
        converged,
        reseeded,
    })
}

const BRUTE_FORCE_CAP: f64 = 1e6;

/// Exhaustive maximum-likelihood labeling for tiny instances: enumerates all
/// `K^n` labelings in lexicographic order, scores each surjective one by the
/// total objective (parameters profile-estimated, or fixed when `oracle` is
/// given), and returns the first global minimizer.
pub fn brute_force_mle(
    ds: &Dataset,
    k: usize,
    weight_family: Family,
    attr_family: Family,
    cfg: &ClusterConfig,
    oracle: Option<&BlockParams>,
) -> Result<Vec<usize>> {
    let n = ds.n();
    if (k as f64).powi(n as i32) > BRUTE_FORCE_CAP {
        return Err(Error::TooLarge(format!("K^n = {k}^{n} exceeds the enumeration cap")));
    }
    let mut z = vec![0usize; n];
    let mut best: Option<(f64, Vec<usize>)> = None;
    loop {
        let counts = block_counts(&z, k);
        if counts.iter().all(|&c| c > 0) {
            let nll = match oracle {
                Some(params) => total_nll(ds, &z, params, weight_family, attr_family, cfg)?,
                None => {
                    let params = estimate_params(ds, &z, k, weight_family, attr_family, cfg)?;
                    total_nll(ds, &z, &params, weight_family, attr_family, cfg)?
                }
            };
            if best.as_ref().is_none_or(|(b, _)| nll < *b) {
                best = Some((nll, z.clone()));
            }
        }
        // next labeling in lexicographic order
        let mut pos = n;
        while pos > 0 {
            pos -= 1;
            z[pos] += 1;
            if z[pos] < k {
                break;
            }
            z[pos] = 0;
            if pos == 0 {
                let (_, labels) = best.ok_or_else(|| {
                    Error::Validation("no surjective labeling exists (n < K)".into())
                })?;
                return Ok(labels);
            }
        }
    }
}
