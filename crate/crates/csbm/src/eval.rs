//! Clustering quality: permutation-minimal classification error, adjusted
//! Rand index, exact-recovery indicator.

use crate::error::{Error, Result};

/// Counts `N_ab = |{i : z_i = a, z_hat_i = b}|`, padded to a square matrix
/// when the two labelings use different numbers of blocks.
#[derive(Debug, Clone)]
pub struct ConfusionMatrix {
    pub k: usize,
    pub counts: Vec<Vec<u64>>,
    pub n: usize,
}

pub fn confusion(z: &[usize], z_hat: &[usize]) -> Result<ConfusionMatrix> {
    if z.len() != z_hat.len() {
        return Err(Error::LengthMismatch { left: z.len(), right: z_hat.len() });
    }
    let ka = z.iter().max().map_or(0, |m| m + 1);
    let kb = z_hat.iter().max().map_or(0, |m| m + 1);
    let k = ka.max(kb).max(1);
    let mut counts = vec![vec![0u64; k]; k];
    for (&a, &b) in z.iter().zip(z_hat) {
        counts[a][b] += 1;
    }
    Ok(ConfusionMatrix { k, counts, n: z.len() })
}

/// Classification error `min over permutations tau of Ham(z, tau(z_hat))`,
/// computed as a maximum-weight assignment on the confusion matrix.
pub fn loss(z: &[usize], z_hat: &[usize]) -> Result<usize> {
    let cm = confusion(z, z_hat)?;
    let matched = max_assignment(&cm.counts);
    Ok(cm.n - matched as usize)
}

/// `loss == 0`: every node correct up to a global relabeling.
pub fn exact_recovery(z: &[usize], z_hat: &[usize]) -> Result<bool> {
    Ok(loss(z, z_hat)? == 0)
}

/// Adjusted Rand index from pair counts; 1 for identical partitions,
/// around 0 for independent ones.
pub fn ari(z: &[usize], z_hat: &[usize]) -> Result<f64> {
    let cm = confusion(z, z_hat)?;
    if cm.n < 2 {
        return Err(Error::Validation("ARI needs at least two nodes".into()));
    }
    let c2 = |x: u64| (x * x.saturating_sub(1) / 2) as f64;
    let sum_cells: f64 = cm.counts.iter().flatten().map(|&v| c2(v)).sum();
    let rows: Vec<u64> = cm.counts.iter().map(|r| r.iter().sum()).collect();
    let cols: Vec<u64> = (0..cm.k).map(|b| cm.counts.iter().map(|r| r[b]).sum()).collect();
    let sum_rows: f64 = rows.iter().map(|&v| c2(v)).sum();
    let sum_cols: f64 = cols.iter().map(|&v| c2(v)).sum();
    let total = c2(cm.n as u64);
    let expected = sum_rows * sum_cols / total;
    let max_index = 0.5 * (sum_rows + sum_cols);
    if max_index == expected {
        // both partitions trivial (all-singleton or single-block)
        return Ok(if sum_cells == expected { 1.0 } else { 0.0 });
    }
    Ok((sum_cells - expected) / (max_index - expected))
}

/// Maximum-weight perfect assignment on a square nonnegative matrix
/// (Hungarian algorithm with potentials, O(k^3)).
fn max_assignment(w: &[Vec<u64>]) -> u64 {
    let big = w.iter().flatten().max().copied().unwrap_or(0) as i64;
    // minimize big - w
    let cost: Vec<Vec<i64>> = w
        .iter()
        .map(|row| row.iter().map(|&v| big - v as i64).collect())
        .collect();
    let assignment = hungarian_min(&cost);
    assignment
        .iter()
        .enumerate()
        .map(|(row, &col)| w[row][col])
        .sum()
}

/// Minimum-cost assignment for a square cost matrix; returns column chosen
/// for each row.
fn hungarian_min(cost: &[Vec<i64>]) -> Vec<usize> {
    let n = cost.len();
    let inf = i64::MAX / 4;
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut p = vec![0usize; n + 1]; // p[j] = row matched to column j (1-based)
    let mut way = vec![0usize; n + 1];

    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0usize;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut row_to_col = vec![0usize; n];
    for j in 1..=n {
        if p[j] > 0 {
            row_to_col[p[j] - 1] = j - 1;
        }
    }
    row_to_col
}
