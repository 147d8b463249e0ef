//! Initial memberships: spectral embedding of the network and attributes,
//! k-means, and random assignment.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::linalg::{dense_symmetric_eigen, lanczos_smallest, DENSE_EIGEN_CUTOFF};

/// Joint spectral embedding `W in R^{n x 2K}`: the first `K` columns are
/// eigenvectors of the normalized Laplacian for the smallest eigenvalues, the
/// last `K` are top eigenvectors of the attribute Gram matrix `Y Y^T`.
#[derive(Debug, Clone)]
pub struct Embedding {
    pub n: usize,
    pub k: usize,
    /// Row-major `n x 2k`.
    pub w: Vec<f64>,
    /// Some Gram eigenvalues vanished (rank-deficient attributes); the
    /// corresponding columns are zero.
    pub degenerate: bool,
}

impl Embedding {
    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.w[i * 2 * self.k..(i + 1) * 2 * self.k]
    }
}

/// Symmetric normalized Laplacian `L = I - D^{-1/2} A D^{-1/2}` of the binary
/// presence matrix, as a matrix-free operator. Rows of isolated nodes are
/// identity rows.
pub struct NormalizedLaplacian<'a> {
    ds: &'a Dataset,
    inv_sqrt_deg: Vec<f64>,
}

impl<'a> NormalizedLaplacian<'a> {
    pub fn new(ds: &'a Dataset) -> Self {
        let inv_sqrt_deg = (0..ds.n())
            .map(|i| {
                let d = ds.degree(i);
                if d == 0 {
                    0.0
                } else {
                    1.0 / (d as f64).sqrt()
                }
            })
            .collect();
        NormalizedLaplacian { ds, inv_sqrt_deg }
    }

    pub fn n(&self) -> usize {
        self.ds.n()
    }

    /// `out = x - D^{-1/2} A D^{-1/2} x`.
    pub fn matvec(&self, x: &[f64], out: &mut [f64]) {
        let n = self.ds.n();
        for i in 0..n {
            let mut acc = 0.0;
            for &(j, _) in self.ds.neighbors(i) {
                acc += self.inv_sqrt_deg[j as usize] * x[j as usize];
            }
            out[i] = x[i] - self.inv_sqrt_deg[i] * acc;
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.ds.n();
        let mut l = DMatrix::identity(n, n);
        for i in 0..n {
            for &(j, _) in self.ds.neighbors(i) {
                l[(i, j as usize)] = -self.inv_sqrt_deg[i] * self.inv_sqrt_deg[j as usize];
            }
        }
        l
    }
}

/// Flip each column so its first entry of magnitude above `1e-12` is positive,
/// then renormalize to unit Euclidean norm (zero columns stay zero).
fn canonicalize_column(col: &mut [f64]) {
    let lead = col.iter().find(|v| v.abs() > 1e-12).copied().unwrap_or(0.0);
    if lead < 0.0 {
        for v in col.iter_mut() {
            *v = -*v;
        }
    }
    let norm: f64 = col.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        for v in col.iter_mut() {
            *v /= norm;
        }
    }
}

/// Build the joint network/attribute embedding used to initialize clustering.
pub fn spectral_embedding(ds: &Dataset, k: usize, seed: u64) -> Result<Embedding> {
    let n = ds.n();
    if n < 2 * k || k == 0 {
        return Err(Error::Validation(format!("spectral embedding needs n >= 2K, got n={n}, K={k}")));
    }

    let lap = NormalizedLaplacian::new(ds);
    let mut net_cols: Vec<Vec<f64>> = if n <= DENSE_EIGEN_CUTOFF {
        let (_, vecs) = dense_symmetric_eigen(lap.to_dense())?;
        (0..k).map(|c| vecs.column(c).iter().copied().collect()).collect()
    } else {
        let mv = |x: &[f64], out: &mut [f64]| lap.matvec(x, out);
        let (_, vecs) = lanczos_smallest(n, &mv, k, seed)?;
        vecs
    };
    // isolated nodes carry no network signal; attributes classify them
    for col in net_cols.iter_mut() {
        for (i, v) in col.iter_mut().enumerate() {
            if ds.degree(i) == 0 {
                *v = 0.0;
            }
        }
        canonicalize_column(col);
    }

    let (attr_cols, degenerate) = gram_eigenvectors(ds, k)?;

    let mut w = vec![0.0; n * 2 * k];
    for i in 0..n {
        for c in 0..k {
            w[i * 2 * k + c] = net_cols[c][i];
            w[i * 2 * k + k + c] = attr_cols[c][i];
        }
    }
    Ok(Embedding { n, k, w, degenerate })
}

/// Top-k eigenvectors of `Y Y^T`, computed through the `d x d` matrix `Y^T Y`
/// when the attribute dimension is smaller than `n`.
fn gram_eigenvectors(ds: &Dataset, k: usize) -> Result<(Vec<Vec<f64>>, bool)> {
    let n = ds.n();
    let d = ds.attr_dim();
    let mut cols = Vec::with_capacity(k);
    let mut degenerate = false;

    if d < n {
        let mut yty = DMatrix::zeros(d, d);
        for i in 0..n {
            let yi = ds.attr(i);
            for r in 0..d {
                for c in r..d {
                    yty[(r, c)] += yi[r] * yi[c];
                }
            }
        }
        for r in 0..d {
            for c in 0..r {
                yty[(r, c)] = yty[(c, r)];
            }
        }
        let (vals, vecs) = dense_symmetric_eigen(yty)?;
        let top = vals.last().copied().unwrap_or(0.0).max(0.0);
        for idx in 0..k {
            if idx >= d {
                degenerate = true;
                cols.push(vec![0.0; n]);
                continue;
            }
            let src = d - 1 - idx; // descending eigenvalues
            if vals[src] <= top * 1e-12 || vals[src] <= 0.0 {
                degenerate = true;
                cols.push(vec![0.0; n]);
                continue;
            }
            let v = vecs.column(src);
            let mut u: Vec<f64> = (0..n)
                .map(|i| ds.attr(i).iter().zip(v.iter()).map(|(a, b)| a * b).sum())
                .collect();
            canonicalize_column(&mut u);
            cols.push(u);
        }
    } else {
        let mut gram = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let g: f64 = ds.attr(i).iter().zip(ds.attr(j)).map(|(a, b)| a * b).sum();
                gram[(i, j)] = g;
                gram[(j, i)] = g;
            }
        }
        let (vals, vecs) = dense_symmetric_eigen(gram)?;
        let top = vals.last().copied().unwrap_or(0.0).max(0.0);
        for idx in 0..k {
            let src = n - 1 - idx;
            if vals[src] <= top * 1e-12 || vals[src] <= 0.0 {
                degenerate = true;
                cols.push(vec![0.0; n]);
                continue;
            }
            let mut u: Vec<f64> = vecs.column(src).iter().copied().collect();
            canonicalize_column(&mut u);
            cols.push(u);
        }
    }
    Ok((cols, degenerate))
}

/// Lloyd k-means with D^2-weighted seeding, best of `restarts` runs by
/// within-cluster sum of squares. Deterministic given `seed`.
pub fn kmeans(data: &[f64], n: usize, dim: usize, k: usize, seed: u64, restarts: usize) -> Result<Vec<usize>> {
    if restarts == 0 {
        return Err(Error::Validation("k-means needs restarts >= 1".into()));
    }
    if k == 0 || n == 0 || data.len() != n * dim {
        return Err(Error::Validation("k-means: bad data shape".into()));
    }
    if k == 1 {
        return Ok(vec![0; n]);
    }
    let row = |i: usize| &data[i * dim..(i + 1) * dim];
    let sq = |a: &[f64], b: &[f64]| -> f64 { a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum() };

    let mut best: Option<(f64, Vec<usize>)> = None;
    for restart in 0..restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (0x9E37_79B9_7F4A_7C15u64.wrapping_mul(restart as u64 + 1)));

        // D^2-weighted seeding
        let mut centers: Vec<Vec<f64>> = Vec::with_capacity(k);
        centers.push(row(rng.random_range(0..n)).to_vec());
        let mut d2: Vec<f64> = (0..n).map(|i| sq(row(i), &centers[0])).collect();
        while centers.len() < k {
            let total: f64 = d2.iter().sum();
            let pick = if total > 0.0 {
                let mut u = rng.random::<f64>() * total;
                let mut chosen = n - 1;
                for (i, &w) in d2.iter().enumerate() {
                    if u < w {
                        chosen = i;
                        break;
                    }
                    u -= w;
                }
                chosen
            } else {
                // fewer distinct points than centers: duplicate an existing point
                rng.random_range(0..n)
            };
            centers.push(row(pick).to_vec());
            for (i, d) in d2.iter_mut().enumerate() {
                *d = d.min(sq(row(i), centers.last().unwrap()));
            }
        }

        let mut labels = vec![0usize; n];
        for _ in 0..100 {
            let mut changed = false;
            for (i, label) in labels.iter_mut().enumerate() {
                let mut best_c = 0;
                let mut best_d = f64::INFINITY;
                for (c, ctr) in centers.iter().enumerate() {
                    let d = sq(row(i), ctr);
                    if d < best_d {
                        best_d = d;
                        best_c = c;
                    }
                }
                if *label != best_c {
                    *label = best_c;
                    changed = true;
                }
            }
            let mut counts = vec![0usize; k];
            let mut sums = vec![vec![0.0; dim]; k];
            for i in 0..n {
                counts[labels[i]] += 1;
                for (s, v) in sums[labels[i]].iter_mut().zip(row(i)) {
                    *s += v;
                }
            }
            for c in 0..k {
                if counts[c] == 0 {
                    // move the point farthest from its center into the empty cluster
                    let far = (0..n)
                        .max_by(|&a, &b| {
                            sq(row(a), &centers[labels[a]])
                                .total_cmp(&sq(row(b), &centers[labels[b]]))
                        })
                        .unwrap();
                    labels[far] = c;
                    centers[c] = row(far).to_vec();
                    changed = true;
                } else {
                    for (dst, s) in centers[c].iter_mut().zip(&sums[c]) {
                        *dst = s / counts[c] as f64;
                    }
                }
            }
            if !changed {
                break;
            }
        }

        let inertia: f64 = (0..n).map(|i| sq(row(i), &centers[labels[i]])).sum();
        if best.as_ref().is_none_or(|(b, _)| inertia < *b) {
            best = Some((inertia, labels));
        }
    }
    Ok(best.unwrap().1)
}

/// k-means on the rows of a spectral embedding.
pub fn kmeans_embedding(emb: &Embedding, seed: u64, restarts: usize) -> Result<Vec<usize>> {
    kmeans(&emb.w, emb.n, 2 * emb.k, emb.k, seed, restarts)
}

/// Uniform labels conditioned on every block being nonempty.
pub fn random_init(n: usize, k: usize, seed: u64) -> Result<Vec<usize>> {
    if n < k || k == 0 {
        return Err(Error::Validation(format!("random init needs n >= K >= 1, got n={n}, K={k}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..1_000_000 {
        let z: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
        let mut seen = vec![false; k];
        for &l in &z {
            seen[l] = true;
        }
        if seen.iter().all(|&s| s) {
            return Ok(z);
        }
    }
    // astronomically unlikely for n >= k; fall back to a balanced shuffle
    let mut z: Vec<usize> = (0..n).map(|i| i % k).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        z.swap(i, j);
    }
    Ok(z)
}
