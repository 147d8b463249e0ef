//! Small dense square matrices for block-level parameters.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row-major `k x k` matrix of `f64`, used for block-pair parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct SquareMat {
    k: usize,
    data: Vec<f64>,
}

impl SquareMat {
    pub fn constant(k: usize, v: f64) -> Self {
        SquareMat { k, data: vec![v; k * k] }
    }

    pub fn zeros(k: usize) -> Self {
        Self::constant(k, 0.0)
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let k = rows.len();
        if rows.iter().any(|r| r.len() != k) {
            return Err(Error::Validation("matrix rows must all have length k".into()));
        }
        Ok(SquareMat { k, data: rows.into_iter().flatten().collect() })
    }

    /// Homogeneous matrix: `diag` on the diagonal, `off` elsewhere.
    pub fn homogeneous(k: usize, diag: f64, off: f64) -> Self {
        let mut m = Self::constant(k, off);
        for a in 0..k {
            m.set(a, a, diag);
        }
        m
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.data[a * self.k + b]
    }

    #[inline]
    pub fn set(&mut self, a: usize, b: usize, v: f64) {
        self.data[a * self.k + b] = v;
    }

    pub fn is_symmetric(&self) -> bool {
        for a in 0..self.k {
            for b in (a + 1)..self.k {
                if self.get(a, b) != self.get(b, a) {
                    return false;
                }
            }
        }
        true
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.data.iter().copied()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        SquareMat { k: self.k, data: self.data.iter().map(|&v| f(v)).collect() }
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.k).map(|a| self.data[a * self.k..(a + 1) * self.k].to_vec()).collect()
    }
}

impl TryFrom<Vec<Vec<f64>>> for SquareMat {
    type Error = Error;
    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        SquareMat::from_rows(rows)
    }
}

impl From<SquareMat> for Vec<Vec<f64>> {
    fn from(m: SquareMat) -> Self {
        m.to_rows()
    }
}
