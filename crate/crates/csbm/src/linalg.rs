//! Symmetric eigensolvers: a dense solver for moderate sizes and Lanczos with
//! full reorthogonalization for large sparse operators.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Above this order the spectral embedding switches from the dense solver to
/// Lanczos on the sparse operator.
pub const DENSE_EIGEN_CUTOFF: usize = 4000;

/// Target residual `||Av - lambda v||` for returned eigenpairs.
pub const EIGEN_RESIDUAL_TOL: f64 = 1e-8;

/// All eigenpairs of a dense symmetric matrix, eigenvalues ascending.
pub fn dense_symmetric_eigen(a: DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = a.nrows();
    let eig = a
        .try_symmetric_eigen(f64::EPSILON, 0)
        .ok_or_else(|| Error::Numeric("symmetric eigensolver did not converge".into()))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok((values, vectors))
}

/// The `k` algebraically smallest eigenpairs of a symmetric operator given by
/// `matvec`, via Lanczos with full reorthogonalization.
///
/// Returns eigenvalues ascending and unit eigenvectors. Fails with a residual
/// report when the Krylov space exhausts `n` dimensions without reaching
/// `EIGEN_RESIDUAL_TOL`.
pub fn lanczos_smallest(
    n: usize,
    matvec: &dyn Fn(&[f64], &mut [f64]),
    k: usize,
    seed: u64,
) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    if k == 0 || k > n {
        return Err(Error::Validation(format!("need 1 <= k <= n, got k={k}, n={n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new(); // betas[j] couples v_j and v_{j+1}

    let mut v = random_unit(n, &mut rng);
    let mut steps = (6 * k).max(80).min(n);
    let mut w = vec![0.0; n];

    loop {
        while basis.len() < steps {
            basis.push(v.clone());
            let j = basis.len() - 1;
            matvec(&basis[j], &mut w);
            if j > 0 {
                let b = betas[j - 1];
                for (wi, pi) in w.iter_mut().zip(&basis[j - 1]) {
                    *wi -= b * pi;
                }
            }
            let alpha = dot(&w, &basis[j]);
            for (wi, vi) in w.iter_mut().zip(&basis[j]) {
                *wi -= alpha * vi;
            }
            alphas.push(alpha);
            // full reorthogonalization, twice for stability
            for _ in 0..2 {
                for q in &basis {
                    let c = dot(&w, q);
                    for (wi, qi) in w.iter_mut().zip(q) {
                        *wi -= c * qi;
                    }
                }
            }
            let beta = norm(&w);
            if beta < 1e-14 {
                // invariant subspace found; continue with a fresh direction
                let mut fresh = random_unit(n, &mut rng);
                for q in &basis {
                    let c = dot(&fresh, q);
                    for (fi, qi) in fresh.iter_mut().zip(q) {
                        *fi -= c * qi;
                    }
                }
                let nf = norm(&fresh);
                if nf < 1e-12 || basis.len() == n {
                    break;
                }
                for f in fresh.iter_mut() {
                    *f /= nf;
                }
                betas.push(0.0);
                v = fresh;
            } else {
                betas.push(beta);
                v = w.iter().map(|x| x / beta).collect();
            }
        }

        let m = basis.len();
        let mut t = DMatrix::zeros(m, m);
        for j in 0..m {
            t[(j, j)] = alphas[j];
            if j + 1 < m {
                t[(j, j + 1)] = betas[j];
                t[(j + 1, j)] = betas[j];
            }
        }
        let (tvals, tvecs) = dense_symmetric_eigen(t)?;

        let take = k.min(m);
        let mut values = Vec::with_capacity(take);
        let mut vectors = Vec::with_capacity(take);
        let mut worst_residual = 0.0f64;
        for (idx, &lambda) in tvals.iter().enumerate().take(take) {
            let y = tvecs.column(idx);
            let mut ritz = vec![0.0; n];
            for (j, q) in basis.iter().enumerate() {
                let c = y[j];
                for (ri, qi) in ritz.iter_mut().zip(q) {
                    *ri += c * qi;
                }
            }
            let nr = norm(&ritz);
            if nr > 0.0 {
                for r in ritz.iter_mut() {
                    *r /= nr;
                }
            }
            matvec(&ritz, &mut w);
            let res = w
                .iter()
                .zip(&ritz)
                .map(|(a, b)| (a - lambda * b) * (a - lambda * b))
                .sum::<f64>()
                .sqrt();
            worst_residual = worst_residual.max(res);
            values.push(lambda);
            vectors.push(ritz);
        }

        if (worst_residual <= EIGEN_RESIDUAL_TOL && take == k) || m >= n {
            if worst_residual > EIGEN_RESIDUAL_TOL {
                return Err(Error::Numeric(format!(
                    "Lanczos exhausted the space at residual {worst_residual:.3e}"
                )));
            }
            return Ok((values, vectors));
        }
        steps = (steps + (2 * k).max(40)).min(n);
    }
}

fn random_unit<R: Rng>(n: usize, rng: &mut R) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
    let nv = norm(&v);
    for x in v.iter_mut() {
        *x /= nv;
    }
    v
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
