//! Seeded trial execution and aggregation: phase-transition grids, baseline
//! comparisons, and the bisection of the theoretical threshold curve.

use csbm::cluster::{iterate, ClusterConfig};
use csbm::expfam::Family;
use csbm::info::min_divergence;
use csbm::init::{kmeans, kmeans_embedding, random_init, spectral_embedding};
use csbm::model::{generate_seeded, CsbmSpec};
use csbm::{ari, exact_recovery, Dataset, Error, Result};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::parse_family_flag;
use crate::plan::{trial_seed, ClusterOptions, InitKind, Metric, PlanConfig};

/// Clustering method run inside experiment grids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Spectral initialization + Bregman iterations on edges and attributes.
    Algorithm1,
    /// Network only: k-means on the Laplacian eigenvector block.
    NetworkSpectral,
    /// Attributes only: Bregman iterations with edge terms disabled.
    AttributeBregman,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Algorithm1 => "algorithm1",
            Method::NetworkSpectral => "network_spectral",
            Method::AttributeBregman => "attribute_bregman",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "algorithm1" => Ok(Method::Algorithm1),
            "network_spectral" => Ok(Method::NetworkSpectral),
            "attribute_bregman" => Ok(Method::AttributeBregman),
            other => Err(Error::Validation(format!("unknown method {other:?}"))),
        }
    }
}

pub const ALL_METHODS: [Method; 3] =
    [Method::Algorithm1, Method::NetworkSpectral, Method::AttributeBregman];

#[derive(Debug, Clone, Copy)]
pub struct TrialOutcome {
    pub ari: f64,
    pub exact: bool,
}

/// Parse a weight-family flag against a concrete dataset.
/// `gaussian:sigma2=auto` moment-matches the scale to the sample variance of
/// the nonzero weights, the sensible default when clustering non-Gaussian
/// weights with the squared-distance divergence.
pub fn resolve_weight_family(flag: &str, ds: &Dataset) -> Result<Family> {
    if flag == "gaussian:sigma2=auto" {
        let m = ds.edge_count().max(1) as f64;
        let mean = ds.edges().iter().map(|&(_, _, w)| w).sum::<f64>() / m;
        let var = ds.edges().iter().map(|&(_, _, w)| (w - mean) * (w - mean)).sum::<f64>() / m;
        return Family::gaussian(var.max(1e-8), 1);
    }
    parse_family_flag(flag, 1)
}

/// Families the clustering step assumes; defaults to the generator's, with
/// optional overrides for misspecification runs.
fn cluster_families(
    spec: &CsbmSpec,
    opts: &ClusterOptions,
    ds: &Dataset,
) -> Result<(Family, Family)> {
    let weight = match &opts.weight_family {
        Some(f) => resolve_weight_family(f, ds)?,
        None => spec.weight_family,
    };
    let attr = match &opts.attr_family {
        Some(f) => parse_family_flag(f, spec.attr_dim())?,
        None => spec.attr_family,
    };
    Ok((weight, attr))
}

/// Generate one dataset and cluster it with the given method.
pub fn run_trial(
    spec: &CsbmSpec,
    method: Method,
    opts: &ClusterOptions,
    seed: u64,
) -> Result<TrialOutcome> {
    let ds = generate_seeded(spec, seed)?;
    let truth = ds.z_true().expect("generated data carries labels").to_vec();
    let (weight_family, attr_family) = cluster_families(spec, opts, &ds)?;
    let k = spec.k;

    let cfg = ClusterConfig {
        max_iter: opts.max_iter,
        strict_weight_mode: opts.strict_weight_mode,
        use_edges: method != Method::AttributeBregman,
        seed,
        ..ClusterConfig::default()
    };

    let labels = match method {
        Method::NetworkSpectral => {
            let emb = spectral_embedding(&ds, k, seed)?;
            let net: Vec<f64> =
                (0..ds.n()).flat_map(|i| emb.row(i)[..k].to_vec()).collect();
            kmeans(&net, ds.n(), k, k, seed, opts.restarts)?
        }
        Method::AttributeBregman => {
            let emb = spectral_embedding(&ds, k, seed)?;
            let att: Vec<f64> =
                (0..ds.n()).flat_map(|i| emb.row(i)[k..].to_vec()).collect();
            let z0 = kmeans(&att, ds.n(), k, k, seed, opts.restarts)?;
            iterate(&ds, &z0, k, weight_family, attr_family, &cfg)?.state.labels
        }
        Method::Algorithm1 => {
            let z0 = match opts.init {
                InitKind::Spectral => {
                    let emb = spectral_embedding(&ds, k, seed)?;
                    kmeans_embedding(&emb, seed, opts.restarts)?
                }
                InitKind::Random => random_init(ds.n(), k, seed)?,
            };
            iterate(&ds, &z0, k, weight_family, attr_family, &cfg)?.state.labels
        }
    };

    Ok(TrialOutcome { ari: ari(&truth, &labels)?, exact: exact_recovery(&truth, &labels)? })
}

/// One aggregated grid cell.
#[derive(Debug, Clone, Serialize)]
pub struct CellResult {
    pub axis_values: Vec<f64>,
    /// `n I / log n` of the cell's model.
    pub scaled_divergence: f64,
    pub metric_mean: f64,
    pub metric_std: f64,
    pub trials: usize,
    pub failures: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct PhaseDiagram {
    pub metric: Metric,
    pub axis_names: Vec<String>,
    pub cells: Vec<CellResult>,
    /// Per value of the first axis: the second-axis value where the scaled
    /// divergence crosses 1, when it crosses inside the swept range.
    pub curve: Vec<CurvePoint>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CurvePoint {
    pub axis0: f64,
    pub threshold: Option<f64>,
    /// "crossing", "below" (whole column above threshold) or "above".
    pub status: &'static str,
}

fn aggregate(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

fn run_cells(
    plan: &PlanConfig,
    method: Method,
) -> Result<Vec<CellResult>> {
    let cells = plan.cells();
    let mut specs = Vec::with_capacity(cells.len());
    for cell in &cells {
        specs.push(plan.cell_config(cell)?.to_spec()?);
    }

    // every (cell, trial) pair gets an independent slot and seed, so worker
    // scheduling cannot affect the aggregate
    let jobs: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..plan.trials).map(move |t| (c, t)))
        .collect();
    let outcomes: Vec<Result<TrialOutcome>> = jobs
        .par_iter()
        .map(|&(c, t)| run_trial(&specs[c], method, &plan.cluster, trial_seed(plan.seed, c, t)))
        .collect();

    let mut results = Vec::with_capacity(cells.len());
    for (c, cell) in cells.iter().enumerate() {
        let report = min_divergence(&specs[c])?;
        let mut values = Vec::with_capacity(plan.trials);
        let mut failures = 0usize;
        for t in 0..plan.trials {
            match &outcomes[c * plan.trials + t] {
                Ok(out) => values.push(match plan.metric {
                    Metric::ExactRecoveryRate => f64::from(out.exact),
                    Metric::MeanAri => out.ari,
                }),
                Err(_) => failures += 1,
            }
        }
        let (mean, std) = aggregate(&values);
        results.push(CellResult {
            axis_values: cell.iter().map(|&(_, v)| v).collect(),
            scaled_divergence: report.scaled,
            metric_mean: mean,
            metric_std: std,
            trials: plan.trials,
            failures,
        });
    }
    Ok(results)
}

/// Scaled divergence of the plan's model at an arbitrary point of the second
/// axis.
fn scaled_at(plan: &PlanConfig, v0: f64, v1: f64) -> Result<f64> {
    let mut cfg = plan.base.clone();
    crate::plan::apply_axis(&mut cfg, plan.axes[0].param, v0)?;
    crate::plan::apply_axis(&mut cfg, plan.axes[1].param, v1)?;
    Ok(min_divergence(&cfg.to_spec()?)?.scaled)
}

/// Solve `scaled divergence = 1` along the second axis by bisection
/// (tolerance 1e-4 in the parameter).
fn threshold_curve(plan: &PlanConfig) -> Result<Vec<CurvePoint>> {
    let (lo, hi) = {
        let vals = &plan.axes[1].values;
        (
            vals.iter().copied().fold(f64::INFINITY, f64::min),
            vals.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        )
    };
    let mut curve = Vec::new();
    for &v0 in &plan.axes[0].values {
        let f_lo = scaled_at(plan, v0, lo)? - 1.0;
        let f_hi = scaled_at(plan, v0, hi)? - 1.0;
        let point = if f_lo > 0.0 && f_hi > 0.0 {
            CurvePoint { axis0: v0, threshold: None, status: "below" }
        } else if f_lo < 0.0 && f_hi < 0.0 {
            CurvePoint { axis0: v0, threshold: None, status: "above" }
        } else {
            let (mut a, mut b) = (lo, hi);
            let mut fa = f_lo;
            while b - a > 1e-4 {
                let m = 0.5 * (a + b);
                let fm = scaled_at(plan, v0, m)? - 1.0;
                if (fa <= 0.0) == (fm <= 0.0) {
                    a = m;
                    fa = fm;
                } else {
                    b = m;
                }
            }
            CurvePoint { axis0: v0, threshold: Some(0.5 * (a + b)), status: "crossing" }
        };
        curve.push(point);
    }
    Ok(curve)
}

/// Monte Carlo phase diagram with the theoretical threshold curve attached.
pub fn run_phase_diagram(plan: &PlanConfig) -> Result<PhaseDiagram> {
    plan.validate()?;
    if plan.axes.len() != 2 {
        return Err(Error::Validation("phase diagrams need exactly two axes".into()));
    }
    let cells = run_cells(plan, Method::Algorithm1)?;
    let curve = threshold_curve(plan)?;
    Ok(PhaseDiagram {
        metric: plan.metric,
        axis_names: plan.axes.iter().map(|a| a.param.name().to_string()).collect(),
        cells,
        curve,
    })
}

/// Per-method aggregated results on a shared grid.
#[derive(Debug, Clone, Serialize)]
pub struct ComparisonTable {
    pub metric: Metric,
    pub axis_names: Vec<String>,
    pub rows: Vec<(Method, Vec<CellResult>)>,
}

/// Run several methods over the same plan (mean ARI by default in configs).
pub fn run_comparison(plan: &PlanConfig, methods: &[Method]) -> Result<ComparisonTable> {
    plan.validate()?;
    if methods.is_empty() {
        return Err(Error::Validation("comparison needs at least one method".into()));
    }
    let mut rows = Vec::new();
    for &m in methods {
        rows.push((m, run_cells(plan, m)?));
    }
    Ok(ComparisonTable {
        metric: plan.metric,
        axis_names: plan.axes.iter().map(|a| a.param.name().to_string()).collect(),
        rows,
    })
}

/// Evaluate a label file against a dataset's ground truth.
pub fn evaluate_labels(truth: &[usize], pred: &[usize]) -> Result<serde_json::Value> {
    let loss = csbm::loss(truth, pred)?;
    let ari = ari(truth, pred)?;
    Ok(serde_json::json!({
        "loss": loss,
        "ari": ari,
        "exact": loss == 0,
    }))
}

/// Ground-truth labels for evaluation, from a bare label file.
pub fn read_label_file(path: &std::path::Path) -> Result<Vec<usize>> {
    let text = std::fs::read_to_string(path)?;
    let mut labels = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        labels.push(line.parse::<usize>().map_err(|_| Error::Parse {
            line: idx + 1,
            msg: format!("bad label {line:?}"),
        })?);
    }
    Ok(labels)
}

/// Cluster a dataset per CLI options; returns labels plus the fit report.
#[allow(clippy::too_many_arguments)]
pub fn cluster_dataset(
    ds: &Dataset,
    k: usize,
    weight_family: Family,
    attr_family: Family,
    init: &str,
    seed: u64,
    max_iter: usize,
    restarts: usize,
    strict: bool,
) -> Result<csbm::FitResult> {
    let z0 = if init == "spectral" {
        let emb = spectral_embedding(ds, k, seed)?;
        kmeans_embedding(&emb, seed, restarts)?
    } else if init == "random" {
        random_init(ds.n(), k, seed)?
    } else if let Some(path) = init.strip_prefix("file:") {
        let z = read_label_file(std::path::Path::new(path))?;
        if z.len() != ds.n() {
            return Err(Error::LengthMismatch { left: z.len(), right: ds.n() });
        }
        z
    } else {
        return Err(Error::Validation(format!(
            "unknown init {init:?} (expected spectral, random or file:<path>)"
        )));
    };
    let cfg = ClusterConfig {
        max_iter,
        strict_weight_mode: strict,
        seed,
        ..ClusterConfig::default()
    };
    iterate(ds, &z0, k, weight_family, attr_family, &cfg)
}
