pub mod bench;
pub mod evaluate;
pub mod generate;
pub mod rewire;

use std::path::Path;

use expomin::graph::RecGraph;
use expomin::io::{load_graph, NodeTable};

use crate::CliError;

/// Loads a graph, optionally rescaling every edge probability to a new
/// absorption probability: p -> p * (1 - new) / (1 - old).
pub fn load_graph_with_alpha(
    path: &Path,
    alpha_override: Option<f64>,
) -> Result<(RecGraph, NodeTable), CliError> {
    let (g, table) = load_graph(path)?;
    let Some(alpha) = alpha_override else {
        return Ok((g, table));
    };
    if g.alpha() == alpha {
        return Ok((g, table));
    }
    let (_, m) = g.degree_stats();
    if !(alpha > 0.0 && alpha < 1.0) && m > 0 {
        return Err(CliError::Validation(format!(
            "--alpha-override {alpha} must lie in (0, 1) for a graph with edges"
        )));
    }
    let scale = (1.0 - alpha) / (1.0 - g.alpha());
    let rows: Vec<Vec<(usize, f64)>> = (0..g.n())
        .map(|i| g.out_edges(i).iter().map(|&(j, p)| (j, p * scale)).collect())
        .collect();
    let rescaled = RecGraph::new(alpha, rows)
        .map_err(|e| CliError::Validation(format!("alpha override: {e}")))?;
    Ok((rescaled, table))
}
