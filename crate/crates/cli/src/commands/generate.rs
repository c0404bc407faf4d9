use std::path::PathBuf;

use clap::Args;
use serde::{Deserialize, Serialize};

use expomin::datagen::{gen_costs, gen_graph, gen_relevance, CostKind, EdgeModel, ProbShape, SyntheticConfig};
use expomin::io::{save_costs, save_graph, save_relevance, NodeTable};

use crate::config::{config_echo, config_hash, load_config_file, optional, require, resolve};
use crate::CliError;

#[derive(Args)]
pub struct GenerateArgs {
    /// JSON config file; explicit flags override its values
    #[arg(long)]
    config: Option<PathBuf>,
    /// Edge placement model: su (uniform) or sh (homophilous)
    #[arg(long)]
    model: Option<String>,
    /// Number of nodes
    #[arg(long)]
    nodes: Option<usize>,
    /// Out-degree d
    #[arg(long)]
    degree: Option<usize>,
    /// Absorption probability
    #[arg(long)]
    alpha: Option<f64>,
    /// Out-edge probability shape: u (uniform) or s (skewed, d = 5 only)
    #[arg(long)]
    chi: Option<String>,
    /// Fraction of latently harmful nodes
    #[arg(long)]
    beta_frac: Option<f64>,
    /// Cost kind: binary or real
    #[arg(long)]
    costs: Option<String>,
    /// RNG seed
    #[arg(long)]
    seed: Option<u64>,
    /// Candidates per source in the generated relevance ranking
    #[arg(long)]
    k_cand: Option<usize>,
    /// Output path for the graph TSV
    #[arg(long)]
    out_graph: Option<PathBuf>,
    /// Output path for the cost TSV
    #[arg(long)]
    out_costs: Option<PathBuf>,
    /// Optional output path for a synthetic relevance TSV (scores = 1/rank)
    #[arg(long)]
    out_relevance: Option<PathBuf>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct GenerateConfig {
    model: Option<String>,
    nodes: Option<usize>,
    degree: Option<usize>,
    alpha: Option<f64>,
    chi: Option<String>,
    beta_frac: Option<f64>,
    costs: Option<String>,
    seed: Option<u64>,
    k_cand: Option<usize>,
    out_graph: Option<String>,
    out_costs: Option<String>,
    out_relevance: Option<String>,
}

#[derive(Serialize)]
struct Resolved {
    model: String,
    nodes: usize,
    degree: usize,
    alpha: f64,
    chi: String,
    beta_frac: f64,
    costs: String,
    seed: u64,
    k_cand: usize,
    out_graph: String,
    out_costs: String,
    out_relevance: Option<String>,
}

pub fn run(args: GenerateArgs) -> Result<(), CliError> {
    let file: GenerateConfig = load_config_file(args.config.as_deref())?;
    let resolved = Resolved {
        model: resolve(args.model, file.model, "su".into()).to_lowercase(),
        nodes: require(args.nodes, file.nodes, "nodes")?,
        degree: resolve(args.degree, file.degree, 5),
        alpha: resolve(args.alpha, file.alpha, 0.05),
        chi: resolve(args.chi, file.chi, "u".into()).to_lowercase(),
        beta_frac: resolve(args.beta_frac, file.beta_frac, 0.5),
        costs: resolve(args.costs, file.costs, "binary".into()).to_lowercase(),
        seed: resolve(args.seed, file.seed, 0),
        k_cand: resolve(args.k_cand, file.k_cand, 100),
        out_graph: require(
            args.out_graph.map(|p| p.display().to_string()),
            file.out_graph,
            "out-graph",
        )?,
        out_costs: require(
            args.out_costs.map(|p| p.display().to_string()),
            file.out_costs,
            "out-costs",
        )?,
        out_relevance: optional(
            args.out_relevance.map(|p| p.display().to_string()),
            file.out_relevance,
        ),
    };

    let cfg = SyntheticConfig {
        model: match resolved.model.as_str() {
            "su" => EdgeModel::Su,
            "sh" => EdgeModel::Sh,
            other => return Err(CliError::Usage(format!("unknown model {other:?}"))),
        },
        n: resolved.nodes,
        d: resolved.degree,
        alpha: resolved.alpha,
        chi: match resolved.chi.as_str() {
            "u" => ProbShape::Uniform,
            "s" => ProbShape::Skewed,
            other => return Err(CliError::Usage(format!("unknown chi {other:?}"))),
        },
        beta_frac: resolved.beta_frac,
        cost_kind: match resolved.costs.as_str() {
            "binary" => CostKind::Binary,
            "real" => CostKind::Real,
            other => return Err(CliError::Usage(format!("unknown cost kind {other:?}"))),
        },
        seed: resolved.seed,
    };
    cfg.validate().map_err(|e| CliError::Validation(e.to_string()))?;

    let hash = config_hash(&resolved);
    let costs = gen_costs(&cfg).map_err(|e| CliError::Validation(e.to_string()))?;
    let graph = gen_graph(&cfg, &costs).map_err(|e| CliError::Validation(e.to_string()))?;
    let table = NodeTable::sequential(graph.n());
    let meta: Vec<(&str, &str)> = vec![("config_hash", hash.as_str())];

    save_graph(&resolved.out_graph, &graph, &table, &meta)?;
    save_costs(&resolved.out_costs, &costs, &table, &meta)?;
    if let Some(rel_path) = &resolved.out_relevance {
        let index = gen_relevance(&graph, resolved.k_cand, resolved.seed);
        save_relevance(rel_path, &index, &table, &meta)?;
    }

    println!("{}", config_echo(&resolved, &hash));
    Ok(())
}
