//! Shared fixtures for the criterion benches.

use csbm::expfam::Family;
use csbm::model::CsbmSpec;
use csbm::SquareMat;

/// Homogeneous binary two-block model with spread Gaussian attributes.
pub fn binary_gaussian_spec(n: usize, alpha: f64, beta: f64, r: f64) -> CsbmSpec {
    let ln = (n as f64).ln();
    let m = r * ln.sqrt();
    CsbmSpec::binary(
        n,
        vec![0.5, 0.5],
        SquareMat::homogeneous(2, alpha * ln / n as f64, beta * ln / n as f64),
        Family::gaussian(1.0, 2).unwrap(),
        vec![vec![m, 0.0], vec![-m, 0.0]],
    )
    .unwrap()
}

/// Four-block zero-inflated Poisson model with polygon attributes.
pub fn poisson_spec(n: usize) -> CsbmSpec {
    let k = 4;
    let eta: Vec<Vec<f64>> = (0..k)
        .map(|a| {
            let angle = 2.0 * std::f64::consts::PI * a as f64 / k as f64;
            vec![2.0 * angle.cos(), 2.0 * angle.sin()]
        })
        .collect();
    CsbmSpec::new(
        n,
        vec![0.25; 4],
        SquareMat::homogeneous(k, 0.04, 0.01),
        Family::Poisson,
        SquareMat::homogeneous(k, 5.0f64.ln(), 1.0),
        Family::gaussian(1.0, 2).unwrap(),
        eta,
    )
    .unwrap()
}
