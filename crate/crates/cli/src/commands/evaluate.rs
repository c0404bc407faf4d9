use std::fmt::Write as _;
use std::path::PathBuf;

use clap::Args;
use serde::{Deserialize, Serialize};

use expomin::exposure::{exposure_total, kappa_for, safe_partition, segregation};
use expomin::io::load_costs;

use crate::config::{config_hash, load_config_file, optional, require, resolve};
use crate::CliError;

#[derive(Args)]
pub struct EvaluateArgs {
    /// JSON config file; explicit flags override its values
    #[arg(long)]
    config: Option<PathBuf>,
    /// Graph TSV
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Cost TSV
    #[arg(long)]
    costs: Option<PathBuf>,
    /// Rescale the graph to a different absorption probability
    #[arg(long)]
    alpha_override: Option<f64>,
    /// Power-iteration terms (default derived from eps)
    #[arg(long)]
    kappa: Option<usize>,
    /// Target truncation error used to derive kappa
    #[arg(long)]
    eps: Option<f64>,
    /// Binarization threshold for segregation on real-valued costs
    #[arg(long)]
    mu: Option<f64>,
    /// Cap on segregation hitting steps
    #[arg(long)]
    step_cap: Option<f64>,
    /// Also write per-node exposures to this TSV
    #[arg(long)]
    exposure_out: Option<PathBuf>,
    /// Write the JSON report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct EvaluateConfig {
    graph: Option<String>,
    costs: Option<String>,
    alpha_override: Option<f64>,
    kappa: Option<usize>,
    eps: Option<f64>,
    mu: Option<f64>,
    step_cap: Option<f64>,
    exposure_out: Option<String>,
    out: Option<String>,
}

#[derive(Serialize)]
struct Resolved {
    graph: String,
    costs: String,
    alpha_override: Option<f64>,
    kappa: Option<usize>,
    eps: f64,
    mu: f64,
    step_cap: f64,
    exposure_out: Option<String>,
    out: Option<String>,
}

pub fn run(args: EvaluateArgs) -> Result<(), CliError> {
    let file: EvaluateConfig = load_config_file(args.config.as_deref())?;
    let resolved = Resolved {
        graph: require(args.graph.map(|p| p.display().to_string()), file.graph, "graph")?,
        costs: require(args.costs.map(|p| p.display().to_string()), file.costs, "costs")?,
        alpha_override: optional(args.alpha_override, file.alpha_override),
        kappa: optional(args.kappa, file.kappa),
        eps: resolve(args.eps, file.eps, 0.01),
        mu: resolve(args.mu, file.mu, 0.5),
        step_cap: resolve(args.step_cap, file.step_cap, 20.0),
        exposure_out: optional(args.exposure_out.map(|p| p.display().to_string()), file.exposure_out),
        out: optional(args.out.map(|p| p.display().to_string()), file.out),
    };
    let hash = config_hash(&resolved);

    let (graph, table) =
        super::load_graph_with_alpha(resolved.graph.as_ref(), resolved.alpha_override)?;
    let costs = load_costs(&resolved.costs, &table)?;
    if costs.len() != graph.n() {
        return Err(CliError::Validation("cost file does not cover the graph".into()));
    }

    let kappa = resolved.kappa.unwrap_or_else(|| kappa_for(graph.alpha(), resolved.eps));
    let state = exposure_total(&graph, &costs, kappa);
    let part = safe_partition(&graph, &costs);

    let binary = if costs.is_binary() { costs.clone() } else { costs.binarize(resolved.mu) };
    let seg = if binary.values().contains(&1.0) {
        segregation(&graph, &binary, resolved.step_cap).ok()
    } else {
        None
    };

    if let Some(path) = &resolved.exposure_out {
        let mut text = String::new();
        let _ = writeln!(text, "#config_hash={hash}");
        for (i, &x) in state.row_cost.iter().enumerate() {
            let _ = writeln!(text, "{}\t{}", table.name(i), x);
        }
        std::fs::write(path, text).map_err(|e| CliError::Runtime(format!("{path}: {e}")))?;
    }

    let report = serde_json::json!({
        "config_hash": hash,
        "f_total": state.f_total,
        "kappa": state.kappa,
        "eps_bound": state.eps_bound,
        "per_node_exposure_path": resolved.exposure_out,
        "max_segregation": seg.as_ref().map(|s| s.max),
        "total_segregation": seg.as_ref().map(|s| s.total),
        "safe_count": part.safe.len(),
        "lambda_plus": part.lambda_plus,
        "precondition_holds": part.precondition_holds(),
    });
    let text = serde_json::to_string_pretty(&report).expect("report serializes");
    match &resolved.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Runtime(format!("{path}: {e}")))?,
        None => println!("{text}"),
    }
    Ok(())
}
