//! Deterministic CSV/JSON rendering with config-hash provenance headers.

use csbm::{FitResult, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::runner::{ComparisonTable, PhaseDiagram};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Short hash of a config's canonical JSON, embedded in every output file.
pub fn config_hash<T: Serialize>(cfg: &T) -> String {
    let canon = serde_json::to_string(cfg).expect("config serializes");
    let digest = Sha256::digest(canon.as_bytes());
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

fn provenance(hash: &str) -> String {
    format!("# csbm v{VERSION} config={hash}\n")
}

/// Grid CSV: one row per cell.
pub fn phase_csv(pd: &PhaseDiagram, hash: &str) -> String {
    let mut out = provenance(hash);
    let metric = match pd.metric {
        crate::plan::Metric::ExactRecoveryRate => "recovery_rate",
        crate::plan::Metric::MeanAri => "mean_ari",
    };
    out.push_str(&format!(
        "{},{},scaled_divergence,{metric},std,trials,failures\n",
        pd.axis_names[0], pd.axis_names[1]
    ));
    for cell in &pd.cells {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            cell.axis_values[0],
            cell.axis_values[1],
            cell.scaled_divergence,
            cell.metric_mean,
            cell.metric_std,
            cell.trials,
            cell.failures
        ));
    }
    out
}

/// Threshold curve CSV: the second-axis value where `n I / log n = 1`.
pub fn curve_csv(pd: &PhaseDiagram, hash: &str) -> String {
    let mut out = provenance(hash);
    out.push_str(&format!("{},{}_at_threshold,status\n", pd.axis_names[0], pd.axis_names[1]));
    for p in &pd.curve {
        match p.threshold {
            Some(t) => out.push_str(&format!("{},{},{}\n", p.axis0, t, p.status)),
            None => out.push_str(&format!("{},,{}\n", p.axis0, p.status)),
        }
    }
    out
}

/// Comparison CSV: one row per (method, cell).
pub fn comparison_csv(table: &ComparisonTable, hash: &str) -> String {
    let mut out = provenance(hash);
    let metric = match table.metric {
        crate::plan::Metric::ExactRecoveryRate => "recovery_rate",
        crate::plan::Metric::MeanAri => "mean_ari",
    };
    let axes = table.axis_names.join(",");
    out.push_str(&format!("method,{axes},scaled_divergence,{metric},std,trials,failures\n"));
    for (method, cells) in &table.rows {
        for cell in cells {
            let vals: Vec<String> = cell.axis_values.iter().map(|v| v.to_string()).collect();
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                method.name(),
                vals.join(","),
                cell.scaled_divergence,
                cell.metric_mean,
                cell.metric_std,
                cell.trials,
                cell.failures
            ));
        }
    }
    out
}

/// Run report for the cluster subcommand.
pub fn fit_report_json(fit: &FitResult, hash: &str, seed: u64) -> Result<String> {
    let report = serde_json::json!({
        "version": VERSION,
        "config": hash,
        "seed": seed,
        "k": fit.state.k,
        "sweeps": fit.sweeps,
        "converged": fit.converged,
        "nll_history": fit.nll_history,
        "reseeded_blocks": fit.reseeded,
        "p_hat": fit.state.params.p.to_rows(),
        "mu_hat": fit.state.params.mu.to_rows(),
        "nu_hat": fit.state.params.nu,
        "degenerate_cells": fit.state.params.degenerate_cells,
    });
    Ok(serde_json::to_string_pretty(&report).expect("report serializes"))
}

/// `t -> CH_t` curves for plotting, one column per block pair.
pub fn chernoff_curves_csv(spec: &csbm::CsbmSpec, points: usize, hash: &str) -> Result<String> {
    let mut out = provenance(hash);
    let k = spec.k;
    let mut header = vec!["t".to_string()];
    for a in 0..k {
        for b in (a + 1)..k {
            header.push(format!("ch_{a}_{b}"));
        }
    }
    out.push_str(&header.join(","));
    out.push('\n');
    for i in 1..points {
        let t = i as f64 / points as f64;
        let mut row = vec![t.to_string()];
        for a in 0..k {
            for b in (a + 1)..k {
                row.push(csbm::chernoff_t(spec, a, b, t)?.to_string());
            }
        }
        out.push_str(&row.join(","));
        out.push('\n');
    }
    Ok(out)
}
