use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use csbm::{Dataset, Error};
use csbm_cli::config::{parse_family_flag, ModelConfig};
use csbm_cli::plan::PlanConfig;
use csbm_cli::report;
use csbm_cli::runner::{self, Method, ALL_METHODS};

/// Clustering of sparse weighted networks with node attributes: synthetic
/// data, recovery thresholds, Bregman hard clustering and experiment grids.
#[derive(Parser)]
#[command(name = "csbm", version)]
struct Cli {
    /// Master seed for data generation and experiment plans.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for experiment grids (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Output directory (default: current directory).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Sample a dataset from a model config into edges.txt, attributes.csv
    /// and labels.txt.
    Generate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Cluster a dataset; writes labels.txt and report.json.
    Cluster {
        #[arg(long)]
        edges: PathBuf,
        #[arg(long)]
        attributes: PathBuf,
        #[arg(long)]
        k: usize,
        /// Weight divergence family (bernoulli, poisson, gaussian[:sigma2=..],
        /// exponential, gamma:shape=..).
        #[arg(long, default_value = "bernoulli")]
        weight_family: String,
        /// Attribute divergence family; dimension comes from the data.
        #[arg(long, default_value = "gaussian")]
        attr_family: String,
        /// spectral, random, or file:<path>.
        #[arg(long, default_value = "spectral")]
        init: String,
        #[arg(long, default_value_t = 100)]
        max_iter: usize,
        /// k-means restarts for the spectral initialization.
        #[arg(long, default_value_t = 10)]
        restarts: usize,
        /// Truncated-at-zero densities for discrete weight families.
        #[arg(long)]
        strict_weights: bool,
    },
    /// Compare two label files; prints {loss, ari, exact} as JSON.
    Evaluate {
        #[arg(long)]
        truth: PathBuf,
        #[arg(long)]
        pred: PathBuf,
    },
    /// Print the divergence report (pairwise Chernoff values, minimal
    /// divergence, recovery verdict) for a model config.
    Threshold {
        #[arg(long)]
        config: PathBuf,
        /// Also write t -> CH_t curves as CSV.
        #[arg(long)]
        curves: Option<PathBuf>,
    },
    /// Monte Carlo recovery grid over two swept parameters, with the
    /// theoretical threshold curve; writes phase.csv and curve.csv.
    PhaseDiagram {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run internal baselines over a one-axis plan; writes comparison.csv.
    Compare {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated subset of algorithm1, network_spectral,
        /// attribute_bregman.
        #[arg(long)]
        methods: Option<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Numeric(_) => ExitCode::from(3),
                Error::Io(_) => ExitCode::from(1),
                _ => ExitCode::from(2),
            }
        }
    }
}

fn out_dir(cli: &Cli) -> PathBuf {
    cli.out.clone().unwrap_or_else(|| PathBuf::from("."))
}

fn in_pool<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .expect("thread pool")
            .install(f),
        None => f(),
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    let out = out_dir(&cli);
    match &cli.cmd {
        Cmd::Generate { config } => {
            let cfg = ModelConfig::from_path(config)?;
            let spec = cfg.to_spec()?;
            let seed = cli.seed.unwrap_or(0);
            let ds = csbm::generate_seeded(&spec, seed)?;
            std::fs::create_dir_all(&out)?;
            ds.save(&out)?;
            let labels: String = ds
                .z_true()
                .expect("generated data carries labels")
                .iter()
                .map(|l| format!("{l}\n"))
                .collect();
            std::fs::write(out.join("labels.txt"), labels)?;
            eprintln!(
                "wrote {} nodes, {} edges to {}",
                ds.n(),
                ds.edge_count(),
                out.display()
            );
            Ok(())
        }
        Cmd::Cluster {
            edges,
            attributes,
            k,
            weight_family,
            attr_family,
            init,
            max_iter,
            restarts,
            strict_weights,
        } => {
            let ds = Dataset::from_files(edges, attributes)?;
            let wf = runner::resolve_weight_family(weight_family, &ds)?;
            let af = parse_family_flag(attr_family, ds.attr_dim())?;
            let seed = cli.seed.unwrap_or(0);
            let fit = runner::cluster_dataset(
                &ds,
                *k,
                wf,
                af,
                init,
                seed,
                *max_iter,
                *restarts,
                *strict_weights,
            )?;
            std::fs::create_dir_all(&out)?;
            let labels: String = fit.state.labels.iter().map(|l| format!("{l}\n")).collect();
            std::fs::write(out.join("labels.txt"), labels)?;
            let hash = report::config_hash(&serde_json::json!({
                "k": k, "weight_family": weight_family, "attr_family": attr_family,
                "init": init, "max_iter": max_iter, "restarts": restarts,
                "strict_weights": strict_weights, "seed": seed,
            }));
            std::fs::write(out.join("report.json"), report::fit_report_json(&fit, &hash, seed)?)?;
            eprintln!("wrote labels.txt and report.json to {}", out.display());
            Ok(())
        }
        Cmd::Evaluate { truth, pred } => {
            let truth = runner::read_label_file(truth)?;
            let pred = runner::read_label_file(pred)?;
            println!(
                "{}",
                serde_json::to_string_pretty(&runner::evaluate_labels(&truth, &pred)?)
                    .expect("metrics serialize")
            );
            Ok(())
        }
        Cmd::Threshold { config, curves } => {
            let cfg = ModelConfig::from_path(config)?;
            let spec = cfg.to_spec()?;
            let rep = csbm::min_divergence(&spec)?;
            let hash = report::config_hash(&cfg);
            let mut value = serde_json::to_value(&rep).expect("report serializes");
            value["version"] = serde_json::json!(report::VERSION);
            value["config"] = serde_json::json!(hash);
            println!("{}", serde_json::to_string_pretty(&value).expect("report serializes"));
            if let Some(path) = curves {
                std::fs::write(path, report::chernoff_curves_csv(&spec, 1000, &hash)?)?;
            }
            Ok(())
        }
        Cmd::PhaseDiagram { config } => {
            let mut plan = PlanConfig::from_path(config)?;
            if let Some(seed) = cli.seed {
                plan.seed = seed;
            }
            let hash = report::config_hash(&plan);
            let pd = in_pool(cli.workers, || runner::run_phase_diagram(&plan))?;
            std::fs::create_dir_all(&out)?;
            std::fs::write(out.join("phase.csv"), report::phase_csv(&pd, &hash))?;
            std::fs::write(out.join("curve.csv"), report::curve_csv(&pd, &hash))?;
            eprintln!("wrote phase.csv and curve.csv to {}", out.display());
            Ok(())
        }
        Cmd::Compare { config, methods } => {
            let mut plan = PlanConfig::from_path(config)?;
            if let Some(seed) = cli.seed {
                plan.seed = seed;
            }
            let methods: Vec<Method> = match methods {
                Some(list) => list
                    .split(',')
                    .map(|s| Method::parse(s.trim()))
                    .collect::<Result<_, _>>()?,
                None => ALL_METHODS.to_vec(),
            };
            let hash = report::config_hash(&plan);
            let table = in_pool(cli.workers, || runner::run_comparison(&plan, &methods))?;
            std::fs::create_dir_all(&out)?;
            std::fs::write(out.join("comparison.csv"), report::comparison_csv(&table, &hash))?;
            eprintln!("wrote comparison.csv to {}", out.display());
            Ok(())
        }
    }
}
