use std::fmt::Write as _;
use std::path::PathBuf;

use clap::Args;
use serde::{Deserialize, Serialize};

use expomin::graph::EditKind;
use expomin::io::{load_costs, load_relevance, save_graph, NodeTable};
use expomin::optimize::{
    assert_oracle_sized, baseline, exact_greedy, gamine_qrem, gamine_rem, naive_greedy, Algorithm,
    Baseline, RunConfig, RunOutcome, StopReason,
};

use crate::config::{config_hash, load_config_file, optional, require, resolve};
use crate::CliError;

#[derive(Args)]
pub struct RewireArgs {
    /// JSON config file; explicit flags override its values
    #[arg(long)]
    config: Option<PathBuf>,
    /// Optimizer: gamine, exact, naive, bl1, bl2, bl3, bl4
    #[arg(long)]
    algo: Option<String>,
    /// Number of rewirings r
    #[arg(long)]
    budget: Option<usize>,
    /// Quality threshold q (requires --relevance when > 0)
    #[arg(long)]
    quality: Option<f64>,
    /// Rescale the graph to a different absorption probability
    #[arg(long)]
    alpha_override: Option<f64>,
    /// Power-iteration terms (default derived from eps)
    #[arg(long)]
    kappa: Option<usize>,
    /// Target truncation error used to derive kappa
    #[arg(long)]
    eps: Option<f64>,
    /// RNG seed (BL1)
    #[arg(long)]
    seed: Option<u64>,
    /// Candidates rechecked with exact delta per round
    #[arg(long)]
    recheck_top: Option<usize>,
    /// Graph TSV
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Cost TSV
    #[arg(long)]
    costs: Option<PathBuf>,
    /// Relevance TSV (enables the quality constraint)
    #[arg(long)]
    relevance: Option<PathBuf>,
    /// Write the per-round trace TSV here
    #[arg(long)]
    out_trace: Option<PathBuf>,
    /// Write the rewired graph here
    #[arg(long)]
    out_graph: Option<PathBuf>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RewireConfig {
    algo: Option<String>,
    budget: Option<usize>,
    quality: Option<f64>,
    alpha_override: Option<f64>,
    kappa: Option<usize>,
    eps: Option<f64>,
    seed: Option<u64>,
    recheck_top: Option<usize>,
    graph: Option<String>,
    costs: Option<String>,
    relevance: Option<String>,
    out_trace: Option<String>,
    out_graph: Option<String>,
}

#[derive(Serialize)]
struct Resolved {
    algo: String,
    budget: usize,
    quality: f64,
    alpha_override: Option<f64>,
    kappa: Option<usize>,
    eps: f64,
    seed: u64,
    recheck_top: usize,
    graph: String,
    costs: String,
    relevance: Option<String>,
    out_trace: Option<String>,
    out_graph: Option<String>,
}

pub fn run(args: RewireArgs) -> Result<(), CliError> {
    let file: RewireConfig = load_config_file(args.config.as_deref())?;
    let resolved = Resolved {
        algo: resolve(args.algo, file.algo, "gamine".into()).to_lowercase(),
        budget: require(args.budget, file.budget, "budget")?,
        quality: resolve(args.quality, file.quality, 0.0),
        alpha_override: optional(args.alpha_override, file.alpha_override),
        kappa: optional(args.kappa, file.kappa),
        eps: resolve(args.eps, file.eps, 0.01),
        seed: resolve(args.seed, file.seed, 0),
        recheck_top: resolve(args.recheck_top, file.recheck_top, 100),
        graph: require(args.graph.map(|p| p.display().to_string()), file.graph, "graph")?,
        costs: require(args.costs.map(|p| p.display().to_string()), file.costs, "costs")?,
        relevance: optional(args.relevance.map(|p| p.display().to_string()), file.relevance),
        out_trace: optional(args.out_trace.map(|p| p.display().to_string()), file.out_trace),
        out_graph: optional(args.out_graph.map(|p| p.display().to_string()), file.out_graph),
    };
    if resolved.quality > 0.0 && resolved.relevance.is_none() {
        return Err(CliError::Usage(
            "--quality > 0 needs a relevance file (--relevance)".into(),
        ));
    }
    let hash = config_hash(&resolved);

    let (graph, table) =
        super::load_graph_with_alpha(resolved.graph.as_ref(), resolved.alpha_override)?;
    let costs = load_costs(&resolved.costs, &table)?;
    let index = match &resolved.relevance {
        Some(path) => Some(load_relevance(path, &table)?),
        None => None,
    };

    let algo = parse_algo(&resolved.algo)?;
    let cfg = RunConfig {
        budget: resolved.budget,
        quality: resolved.quality,
        kappa: resolved.kappa,
        eps: resolved.eps,
        k_cand: 100,
        recheck_top: resolved.recheck_top,
        seed: resolved.seed,
        algo,
        target_pool: None,
    };

    let outcome = dispatch(algo, &graph, &costs, index.as_ref(), &cfg)?;

    if let Some(trace_path) = &resolved.out_trace {
        let text = render_trace(&outcome, &table, &resolved.algo, &hash);
        std::fs::write(trace_path, text)
            .map_err(|e| CliError::Runtime(format!("{trace_path}: {e}")))?;
    }
    if let Some(graph_path) = &resolved.out_graph {
        save_graph(graph_path, &outcome.graph, &table, &[("config_hash", hash.as_str())])?;
    }

    println!(
        "{}",
        serde_json::json!({
            "config_hash": hash,
            "algo": resolved.algo,
            "rounds": outcome.trace.rounds.len(),
            "f_initial": outcome.trace.f_initial,
            "f_final": outcome.trace.f_final,
            "stop": stop_name(outcome.trace.stop),
        })
    );
    Ok(())
}

fn parse_algo(name: &str) -> Result<Algorithm, CliError> {
    Ok(match name {
        "gamine" => Algorithm::Gamine,
        "exact" => Algorithm::Exact,
        "naive" => Algorithm::Naive,
        "bl1" => Algorithm::Bl1,
        "bl2" => Algorithm::Bl2,
        "bl3" => Algorithm::Bl3,
        "bl4" => Algorithm::Bl4,
        other => return Err(CliError::Usage(format!("unknown algorithm {other:?}"))),
    })
}

fn dispatch(
    algo: Algorithm,
    graph: &expomin::graph::RecGraph,
    costs: &expomin::graph::CostVector,
    index: Option<&expomin::relevance::RelevanceIndex>,
    cfg: &RunConfig,
) -> Result<RunOutcome, CliError> {
    match algo {
        Algorithm::Gamine => match index {
            Some(idx) => Ok(gamine_qrem(graph, costs, idx, cfg)?),
            None => Ok(gamine_rem(graph, costs, cfg)?),
        },
        Algorithm::Exact | Algorithm::Naive => {
            if cfg.quality > 0.0 {
                return Err(CliError::Usage(
                    "the dense reference optimizers support no quality constraint".into(),
                ));
            }
            assert_oracle_sized(graph)?;
            if algo == Algorithm::Exact {
                Ok(exact_greedy(graph, costs, cfg)?)
            } else {
                Ok(naive_greedy(graph, costs, cfg)?)
            }
        }
        Algorithm::Bl1 => Ok(baseline(graph, costs, index, cfg, Baseline::Bl1)?),
        Algorithm::Bl2 => Ok(baseline(graph, costs, index, cfg, Baseline::Bl2)?),
        Algorithm::Bl3 => Ok(baseline(graph, costs, index, cfg, Baseline::Bl3)?),
        Algorithm::Bl4 => Ok(baseline(graph, costs, index, cfg, Baseline::Bl4)?),
    }
}

fn stop_name(stop: StopReason) -> &'static str {
    match stop {
        StopReason::BudgetExhausted => "budget_exhausted",
        StopReason::NoPositiveHeuristic => "no_positive_heuristic",
        StopReason::NoPositiveExact => "no_positive_exact",
        StopReason::NoPermissibleMove => "no_permissible_move",
    }
}

fn render_trace(out: &RunOutcome, table: &NodeTable, algo: &str, hash: &str) -> String {
    let mut text = String::new();
    let _ = writeln!(text, "#config_hash={hash}");
    let _ = writeln!(text, "#algo={algo}");
    let _ = writeln!(text, "#f_initial={}", out.trace.f_initial);
    let _ = writeln!(text, "#f_final={}", out.trace.f_final);
    let _ = writeln!(text, "#stop={}", stop_name(out.trace.stop));
    if let Some(seg) = out.trace.initial_segregation {
        let _ = writeln!(text, "#initial_max_segregation={}", seg.max);
        let _ = writeln!(text, "#initial_total_segregation={}", seg.total);
    }
    if let Some(seg) = out.trace.final_segregation {
        let _ = writeln!(text, "#final_max_segregation={}", seg.max);
        let _ = writeln!(text, "#final_total_segregation={}", seg.total);
    }
    let _ = writeln!(text, "round\ti\tj\tk\tdelta_pred\tf_before\tf_after\tms");
    for row in &out.trace.rounds {
        let EditKind::Rewiring { i, j, k } = row.edit.kind else {
            continue;
        };
        let _ = writeln!(
            text,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{:.3}",
            row.round,
            table.name(i),
            table.name(j),
            table.name(k),
            row.delta_pred,
            row.f_before,
            row.f_after,
            row.wall_ms
        );
    }
    text
}
