use std::path::PathBuf;
use std::time::Instant;

use clap::Args;
use serde::{Deserialize, Serialize};

use expomin::datagen::{gen_costs, gen_graph, CostKind, EdgeModel, ProbShape, SyntheticConfig};
use expomin::exposure::{exposure_total, kappa_for, DEFAULT_ORACLE_LIMIT};
use expomin::optimize::{exact_greedy, gamine_rem, naive_greedy, RunConfig};

use crate::config::{config_hash, load_config_file, optional, resolve};
use crate::CliError;

#[derive(Args)]
pub struct BenchArgs {
    /// JSON config file; explicit flags override its values
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated graph sizes, e.g. 1000,10000
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    /// Out-degree of the generated SU graphs
    #[arg(long)]
    degree: Option<usize>,
    /// Absorption probability
    #[arg(long)]
    alpha: Option<f64>,
    /// Fraction of harmful nodes
    #[arg(long)]
    beta_frac: Option<f64>,
    /// Rewirings timed per size
    #[arg(long)]
    rounds: Option<usize>,
    /// RNG seed
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated algorithms: gamine, exact, naive
    #[arg(long, value_delimiter = ',')]
    algos: Option<Vec<String>>,
    /// Write the JSON report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct BenchConfig {
    sizes: Option<Vec<usize>>,
    degree: Option<usize>,
    alpha: Option<f64>,
    beta_frac: Option<f64>,
    rounds: Option<usize>,
    seed: Option<u64>,
    algos: Option<Vec<String>>,
    out: Option<String>,
}

#[derive(Serialize)]
struct Resolved {
    sizes: Vec<usize>,
    degree: usize,
    alpha: f64,
    beta_frac: f64,
    rounds: usize,
    seed: u64,
    algos: Vec<String>,
    out: Option<String>,
}

#[derive(Serialize)]
struct BenchRow {
    n: usize,
    m: usize,
    algo: String,
    precompute_secs: f64,
    mean_secs_per_rewiring: f64,
    rounds_timed: usize,
}

pub fn run(args: BenchArgs) -> Result<(), CliError> {
    let file: BenchConfig = load_config_file(args.config.as_deref())?;
    let resolved = Resolved {
        sizes: args
            .sizes
            .or(file.sizes)
            .ok_or_else(|| CliError::Usage("missing required --sizes".into()))?,
        degree: resolve(args.degree, file.degree, 5),
        alpha: resolve(args.alpha, file.alpha, 0.05),
        beta_frac: resolve(args.beta_frac, file.beta_frac, 0.5),
        rounds: resolve(args.rounds, file.rounds, 10),
        seed: resolve(args.seed, file.seed, 0),
        algos: resolve(args.algos, file.algos, vec!["gamine".into()]),
        out: optional(args.out.map(|p| p.display().to_string()), file.out),
    };
    if resolved.sizes.is_empty() {
        return Err(CliError::Usage("--sizes must name at least one size".into()));
    }
    let hash = config_hash(&resolved);

    let mut rows: Vec<BenchRow> = Vec::new();
    for (idx, &n) in resolved.sizes.iter().enumerate() {
        let cfg = SyntheticConfig {
            model: EdgeModel::Su,
            n,
            d: resolved.degree,
            alpha: resolved.alpha,
            chi: ProbShape::Uniform,
            beta_frac: resolved.beta_frac,
            cost_kind: CostKind::Binary,
            seed: resolved.seed.wrapping_add(idx as u64),
        };
        cfg.validate().map_err(|e| CliError::Validation(e.to_string()))?;
        let costs = gen_costs(&cfg).map_err(|e| CliError::Validation(e.to_string()))?;
        let graph = gen_graph(&cfg, &costs).map_err(|e| CliError::Validation(e.to_string()))?;
        let (_, m) = graph.degree_stats();
        let kappa = kappa_for(resolved.alpha, 0.01);

        for algo in &resolved.algos {
            if (algo == "exact" || algo == "naive") && n > DEFAULT_ORACLE_LIMIT {
                // The dense references only run at oracle sizes.
                continue;
            }
            // Warm precompute: one full pass over the exposure vectors.
            let t0 = Instant::now();
            let _ = exposure_total(&graph, &costs, kappa);
            let precompute_secs = t0.elapsed().as_secs_f64();

            let run_cfg = RunConfig {
                budget: resolved.rounds,
                seed: resolved.seed,
                ..RunConfig::default()
            };
            let outcome = match algo.as_str() {
                "gamine" => gamine_rem(&graph, &costs, &run_cfg)?,
                "exact" => exact_greedy(&graph, &costs, &run_cfg)?,
                "naive" => naive_greedy(&graph, &costs, &run_cfg)?,
                other => return Err(CliError::Usage(format!("unknown bench algo {other:?}"))),
            };
            if outcome.trace.rounds.is_empty() {
                return Err(CliError::Runtime(format!(
                    "{algo} found no rewiring to time at n = {n}"
                )));
            }
            let mean_ms = outcome.trace.rounds.iter().map(|r| r.wall_ms).sum::<f64>()
                / outcome.trace.rounds.len() as f64;
            rows.push(BenchRow {
                n,
                m,
                algo: algo.clone(),
                precompute_secs,
                mean_secs_per_rewiring: mean_ms / 1e3,
                rounds_timed: outcome.trace.rounds.len(),
            });
        }
    }

    // Least-squares log-log slope per algorithm, when two or more sizes ran.
    let mut slopes = serde_json::Map::new();
    for algo in &resolved.algos {
        let pts: Vec<(f64, f64)> = rows
            .iter()
            .filter(|r| &r.algo == algo)
            .map(|r| ((r.n as f64).ln(), r.mean_secs_per_rewiring.ln()))
            .collect();
        let value = if pts.len() >= 2 {
            let mx = pts.iter().map(|p| p.0).sum::<f64>() / pts.len() as f64;
            let my = pts.iter().map(|p| p.1).sum::<f64>() / pts.len() as f64;
            let cov: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
            let var: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
            serde_json::json!(cov / var)
        } else {
            serde_json::Value::Null
        };
        slopes.insert(algo.clone(), value);
    }

    let report = serde_json::json!({
        "config_hash": hash,
        "rows": rows,
        "loglog_slope": slopes,
    });
    let text = serde_json::to_string_pretty(&report).expect("report serializes");
    match &resolved.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Runtime(format!("{path}: {e}")))?,
        None => println!("{text}"),
    }
    Ok(())
}
