//! Closed-form scoring of single graph edits.
//!
//! A rewiring (i, j, k) is a rank-one update of the transition matrix with
//! u = p_ij·e_i and v = e_j - e_k, so the drop in the objective has the
//! closed form Δ = στ/ρ with σ = 1ᵀFu, τ = vᵀFc, ρ = 1 + vᵀFu. σ and ρ are
//! always positive for valid rewirings, so Δ > 0 exactly when τ > 0. The
//! normalization-free Δ̂ = στ is the constant-time ranking heuristic.
//! Deletions and insertions reuse the same machinery with their own v.

use nalgebra::DMatrix;
use thiserror::Error;

use crate::graph::{GraphError, RecGraph};

#[derive(Debug, Error, PartialEq)]
pub enum ScoringError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("rank-one update is singular (rho = {0}); cannot occur for a valid rewiring")]
    SingularUpdate(f64),
}

/// A scored rewiring candidate (i, j) -> (i, k).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewiringCandidate {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    /// σ = 1ᵀFu = p_ij · (1ᵀF)_i.
    pub sigma: f64,
    /// τ = vᵀFc = (Fc)_j - (Fc)_k.
    pub tau: f64,
    /// ρ = 1 + vᵀFu = 1 + p_ij·(F[j,i] - F[k,i]).
    pub rho: f64,
    /// Δ = στ/ρ, the exact drop f(G) - f(G').
    pub delta: f64,
    /// Δ̂ = στ.
    pub delta_hat: f64,
}

fn check_rewiring(g: &RecGraph, i: usize, j: usize, k: usize) -> Result<f64, GraphError> {
    if k == i {
        return Err(GraphError::SelfLoop(i));
    }
    if g.has_edge(i, k) {
        return Err(GraphError::DuplicateEdge(i, k));
    }
    g.edge_prob(i, j).ok_or(GraphError::MissingEdge(i, j))
}

/// Exact score of a rewiring from precomputed vectors. `column_i` must be
/// (an approximation of) the i-th column Fe_i of the current graph's
/// fundamental matrix.
pub fn score_exact(
    g: &RecGraph,
    col_sums: &[f64],
    row_cost: &[f64],
    column_i: &[f64],
    i: usize,
    j: usize,
    k: usize,
) -> Result<RewiringCandidate, ScoringError> {
    let p_ij = check_rewiring(g, i, j, k)?;
    let sigma = p_ij * col_sums[i];
    let tau = row_cost[j] - row_cost[k];
    let rho = 1.0 + p_ij * (column_i[j] - column_i[k]);
    Ok(RewiringCandidate { i, j, k, sigma, tau, rho, delta: sigma * tau / rho, delta_hat: sigma * tau })
}

/// Constant-time heuristic score Δ̂ = στ; needs no column of F.
pub fn score_heuristic(
    col_sums: &[f64],
    row_cost: &[f64],
    p_ij: f64,
    i: usize,
    j: usize,
    k: usize,
) -> (f64, f64, f64) {
    let sigma = p_ij * col_sums[i];
    let tau = row_cost[j] - row_cost[k];
    (sigma * tau, sigma, tau)
}

/// Applies the rank-one rewiring update to a dense fundamental matrix:
/// F' = F - F u vᵀ F / (1 + vᵀ F u). Row sums of F are preserved.
pub fn sherman_morrison_update(
    f: &mut DMatrix<f64>,
    i: usize,
    j: usize,
    k: usize,
    p_ij: f64,
) -> Result<(), ScoringError> {
    let n = f.nrows();
    let rho = 1.0 + p_ij * (f[(j, i)] - f[(k, i)]);
    if rho.abs() < 1e-12 {
        return Err(ScoringError::SingularUpdate(rho));
    }
    // Fu = p_ij * F[:, i]; vᵀF = F[j, :] - F[k, :].
    let fu: Vec<f64> = (0..n).map(|x| p_ij * f[(x, i)]).collect();
    let vtf: Vec<f64> = (0..n).map(|y| f[(j, y)] - f[(k, y)]).collect();
    let scale = 1.0 / rho;
    for x in 0..n {
        let fx = fu[x] * scale;
        if fx == 0.0 {
            continue;
        }
        for y in 0..n {
            f[(x, y)] -= fx * vtf[y];
        }
    }
    Ok(())
}

/// Score of a deletion or insertion. For insertions ρ can be non-positive,
/// in which case the closed form does not rank the edit and `delta` is absent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EditScore {
    pub sigma: f64,
    pub tau: f64,
    pub rho: f64,
    pub delta: Option<f64>,
}

/// Scores removing edge (i, j) with its mass spread over i's other out-edges:
/// v = e_j - 1/(δ⁺(i)-1) Σ_{k ∈ N⁺(i)\{j}} e_k.
pub fn score_deletion(
    g: &RecGraph,
    col_sums: &[f64],
    row_cost: &[f64],
    column_i: &[f64],
    i: usize,
    j: usize,
) -> Result<EditScore, ScoringError> {
    let p_ij = g.edge_prob(i, j).ok_or(GraphError::MissingEdge(i, j))?;
    let d = g.out_degree(i);
    if d <= 1 {
        return Err(GraphError::LastOutEdge(i).into());
    }
    let share = 1.0 / (d - 1) as f64;
    let mut tau = row_cost[j];
    let mut vfu = column_i[j];
    for &(t, _) in g.out_edges(i) {
        if t != j {
            tau -= share * row_cost[t];
            vfu -= share * column_i[t];
        }
    }
    let sigma = p_ij * col_sums[i];
    let rho = 1.0 + p_ij * vfu;
    Ok(EditScore { sigma, tau, rho, delta: Some(sigma * tau / rho) })
}

/// Scores inserting edge (i, j) with probability `p`, evenly drawn from i's
/// existing out-edges: v = -e_j + 1/δ⁺(i) Σ_{k ∈ N⁺(i)} e_k.
pub fn score_insertion(
    g: &RecGraph,
    col_sums: &[f64],
    row_cost: &[f64],
    column_i: &[f64],
    i: usize,
    j: usize,
    p: f64,
) -> Result<EditScore, ScoringError> {
    if j == i {
        return Err(GraphError::SelfLoop(i).into());
    }
    if g.has_edge(i, j) {
        return Err(GraphError::DuplicateEdge(i, j).into());
    }
    let budget = 1.0 - g.alpha();
    if !(p > 0.0 && p <= budget) {
        return Err(GraphError::BadProbability { i, j, p, max: budget }.into());
    }
    let d = g.out_degree(i);
    let share = if d > 0 { 1.0 / d as f64 } else { 0.0 };
    let mut tau = -row_cost[j];
    let mut vfu = -column_i[j];
    for &(t, _) in g.out_edges(i) {
        tau += share * row_cost[t];
        vfu += share * column_i[t];
    }
    let sigma = p * col_sums[i];
    let rho = 1.0 + p * vfu;
    let delta = if rho > 0.0 { Some(sigma * tau / rho) } else { None };
    Ok(EditScore { sigma, tau, rho, delta })
}
