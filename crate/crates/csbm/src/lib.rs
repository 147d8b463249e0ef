//! Community detection in sparse weighted networks with node attributes.
//!
//! The model is a stochastic block model whose pairwise interactions follow
//! zero-inflated exponential-family laws and whose node attributes follow
//! exponential-family laws. The crate provides:
//!
//! - [`expfam`]: the family registry (cumulants, conjugates, mean maps,
//!   Bregman divergences, samplers);
//! - [`model`] / [`dataset`]: the generative model and sparse datasets with
//!   text serialization;
//! - [`info`]: Rényi/Chernoff divergences, the minimal divergence governing
//!   the exact-recovery phase transition, and closed-form thresholds;
//! - [`init`]: spectral embedding (normalized Laplacian + attribute Gram
//!   eigenvectors), k-means and random initialization;
//! - [`cluster`]: Bregman hard clustering by iterative likelihood
//!   maximization, plus a brute-force MLE for tiny instances;
//! - [`eval`]: permutation-minimal classification error, ARI, exact recovery.

pub mod cluster;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod expfam;
pub mod info;
pub mod init;
pub mod linalg;
pub mod mat;
pub mod model;

pub use cluster::{
    brute_force_mle, estimate_params, iterate, node_nll, total_nll, zero_inflated_nll,
    BlockParams, ClusterConfig, ClusteringState, FitResult,
};
pub use dataset::Dataset;
pub use error::{Error, Result};
pub use eval::{ari, confusion, exact_recovery, loss, ConfusionMatrix};
pub use expfam::{Family, ZeroInflated};
pub use info::{
    chernoff, chernoff_t, min_divergence, renyi, renyi_zero_inflated, threshold_binary_gaussian,
    threshold_semisupervised, DivergenceReport, Verdict,
};
pub use init::{kmeans, kmeans_embedding, random_init, spectral_embedding, Embedding};
pub use mat::SquareMat;
pub use model::{generate, generate_seeded, sample_labels, CsbmSpec};
