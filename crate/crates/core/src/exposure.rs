//! Fundamental-matrix quantities of the absorbing walk.
//!
//! Everything the optimizers need is derived from F = (I - P)^{-1} without
//! ever materializing it: the column sums 1ᵀF, the cost-scaled row sums Fc
//! (per-node exposures), and single columns Fe_i, all approximated by the
//! truncated power series Σ_{t<=κ} P^t. A dense direct solve is kept as an
//! oracle for small graphs and for the dense greedy reference optimizers.
//!
//! Truncating the series after κ terms leaves a tail bounded, for row-sum
//! style quantities (Fc, Fe_i, F1), by (1-α)^{κ+1}/α per entry. The same
//! per-entry bound does not hold for the column sums 1ᵀF: their tail at node
//! j scales with the stationary in-mass of j, and only the average tail over
//! all nodes equals (1-α)^{κ+1}/α on sink-free graphs.

use nalgebra::DMatrix;
use thiserror::Error;

use crate::graph::{CostVector, RecGraph};

/// Largest n for which the dense oracle will factorize I - P.
pub const DEFAULT_ORACLE_LIMIT: usize = 2000;

/// Default cap for segregation hitting steps.
pub const DEFAULT_STEP_CAP: f64 = 20.0;

#[derive(Debug, Error, PartialEq)]
pub enum ExposureError {
    #[error("graph has {0} nodes, above the dense-oracle limit {1}")]
    OracleLimit(usize, usize),
    #[error("segregation needs at least one benign node")]
    NoBenignNodes,
    #[error("segregation needs binary costs (entries in {{0, 1}})")]
    NonBinaryCosts,
}

/// Smallest κ with (1-α)^κ / α <= eps. For α = 1 the walk absorbs
/// immediately and zero terms suffice.
pub fn kappa_for(alpha: f64, eps: f64) -> usize {
    assert!(alpha > 0.0 && alpha <= 1.0, "alpha outside (0, 1]");
    assert!(eps > 0.0, "eps must be positive");
    if alpha == 1.0 {
        return 0;
    }
    if 1.0 / alpha <= eps {
        return 0;
    }
    let beta = 1.0 - alpha;
    let mut k = ((eps * alpha).ln() / beta.ln()).ceil() as i64;
    if k < 0 {
        k = 0;
    }
    let bound = |k: i64| beta.powi(k as i32) / alpha;
    // Guard against rounding at the boundary.
    while bound(k) > eps {
        k += 1;
    }
    while k > 0 && bound(k - 1) <= eps {
        k -= 1;
    }
    k as usize
}

/// Column sums 1ᵀF via the left power series, κ terms beyond the zeroth.
pub fn power_col_sums(g: &RecGraph, kappa: usize) -> Vec<f64> {
    let n = g.n();
    let mut z = vec![1.0f64; n];
    let mut acc = vec![1.0f64; n];
    let mut next = vec![0.0f64; n];
    for _ in 0..kappa {
        next.iter_mut().for_each(|x| *x = 0.0);
        for (i, &zi) in z.iter().enumerate() {
            if zi == 0.0 {
                continue;
            }
            for &(j, p) in g.out_edges(i) {
                next[j] += zi * p;
            }
        }
        std::mem::swap(&mut z, &mut next);
        for (a, &b) in acc.iter_mut().zip(z.iter()) {
            *a += b;
        }
    }
    acc
}

/// Cost-scaled row sums Fc via the right power series; entry i is the
/// exposure e_iᵀFc of node i.
pub fn power_row_cost(g: &RecGraph, c: &CostVector, kappa: usize) -> Vec<f64> {
    power_series_vec(g, c.values(), kappa)
}

/// Column Fe_i of the fundamental matrix: entry x approximates F[x, i].
pub fn power_column(g: &RecGraph, i: usize, kappa: usize) -> Vec<f64> {
    let mut e = vec![0.0f64; g.n()];
    e[i] = 1.0;
    power_series_vec(g, &e, kappa)
}

fn power_series_vec(g: &RecGraph, v: &[f64], kappa: usize) -> Vec<f64> {
    let n = g.n();
    debug_assert_eq!(v.len(), n);
    let mut w = v.to_vec();
    let mut acc = v.to_vec();
    let mut next = vec![0.0f64; n];
    for _ in 0..kappa {
        for (i, slot) in next.iter_mut().enumerate() {
            let mut s = 0.0;
            for &(j, p) in g.out_edges(i) {
                s += p * w[j];
            }
            *slot = s;
        }
        std::mem::swap(&mut w, &mut next);
        for (a, &b) in acc.iter_mut().zip(w.iter()) {
            *a += b;
        }
    }
    acc
}

/// Power-iteration snapshot of the exposure quantities.
#[derive(Debug, Clone)]
pub struct ExposureState {
    /// y with y_j ≈ (1ᵀF)_j.
    pub col_sums: Vec<f64>,
    /// x with x_i ≈ (Fc)_i, node i's exposure.
    pub row_cost: Vec<f64>,
    /// f(G) = 1ᵀFc, evaluated as Σ_i row_cost_i.
    pub f_total: f64,
    /// Number of series terms used beyond the zeroth.
    pub kappa: usize,
    /// Guaranteed row-sum error bound (1-α)^κ / α.
    pub eps_bound: f64,
}

/// Computes both power-series vectors and the scalar objective.
pub fn exposure_total(g: &RecGraph, c: &CostVector, kappa: usize) -> ExposureState {
    let col_sums = power_col_sums(g, kappa);
    let row_cost = power_row_cost(g, c, kappa);
    let f_total = row_cost.iter().sum();
    let eps_bound = if g.alpha() == 1.0 {
        0.0
    } else {
        (1.0 - g.alpha()).powi(kappa as i32) / g.alpha()
    };
    ExposureState { col_sums, row_cost, f_total, kappa, eps_bound }
}

/// Safe/unsafe node partition. A node is safe when no positive-cost node is
/// reachable from it, decided by exact reverse reachability over edges.
#[derive(Debug, Clone)]
pub struct SafePartition {
    /// is_unsafe[i] == false iff i is safe.
    pub is_unsafe: Vec<bool>,
    /// Safe nodes, ascending.
    pub safe: Vec<usize>,
    /// Unsafe nodes, ascending.
    pub unsafe_nodes: Vec<usize>,
    /// Λ⁺: maximum out-degree over unsafe nodes (0 when all nodes are safe).
    pub lambda_plus: usize,
}

impl SafePartition {
    /// |S| >= Λ⁺, the precondition under which greedy rewiring to safe
    /// targets maximizes a monotone submodular set function.
    pub fn precondition_holds(&self) -> bool {
        self.safe.len() >= self.lambda_plus
    }
}

pub fn safe_partition(g: &RecGraph, c: &CostVector) -> SafePartition {
    let n = g.n();
    // Reverse adjacency, then BFS from every positive-cost node.
    let mut rev: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, _, j, _) in g.edges() {
        rev[j].push(i);
    }
    let mut is_unsafe = vec![false; n];
    let mut queue: Vec<usize> = (0..n).filter(|&i| c.get(i) > 0.0).collect();
    for &i in &queue {
        is_unsafe[i] = true;
    }
    while let Some(j) = queue.pop() {
        for &i in &rev[j] {
            if !is_unsafe[i] {
                is_unsafe[i] = true;
                queue.push(i);
            }
        }
    }
    let safe: Vec<usize> = (0..n).filter(|&i| !is_unsafe[i]).collect();
    let unsafe_nodes: Vec<usize> = (0..n).filter(|&i| is_unsafe[i]).collect();
    let lambda_plus = unsafe_nodes.iter().map(|&i| g.out_degree(i)).max().unwrap_or(0);
    SafePartition { is_unsafe, safe, unsafe_nodes, lambda_plus }
}

/// Exact fundamental matrix F = (I - P)^{-1} by partial-pivoting LU.
/// Oracle for tests and the dense greedy reference optimizers.
pub fn dense_fundamental(g: &RecGraph) -> Result<DMatrix<f64>, ExposureError> {
    dense_fundamental_with_limit(g, DEFAULT_ORACLE_LIMIT)
}

pub fn dense_fundamental_with_limit(
    g: &RecGraph,
    limit: usize,
) -> Result<DMatrix<f64>, ExposureError> {
    let n = g.n();
    if n > limit {
        return Err(ExposureError::OracleLimit(n, limit));
    }
    let mut a = DMatrix::<f64>::identity(n, n);
    for (i, _, j, p) in g.edges() {
        a[(i, j)] -= p;
    }
    let lu = a.lu();
    let f = lu
        .solve(&DMatrix::<f64>::identity(n, n))
        .expect("I - P is invertible for alpha > 0");
    Ok(f)
}

/// Per-harmful-node expected steps until a benign node is first visited,
/// plus their max and sum.
#[derive(Debug, Clone)]
pub struct Segregation {
    /// (harmful node, capped expected steps), ascending by node.
    pub steps: Vec<(usize, f64)>,
    pub max: f64,
    pub total: f64,
}

/// Expected hitting steps from each harmful node (cost 1) to the benign set
/// (cost 0), walking on probabilities renormalized by 1/(1-α) so each
/// non-sink row is stochastic, with benign nodes absorbing. Values are
/// capped at `step_cap`: the result is the least fixed point of
/// h = min(cap, 1 + Q_HH h), which equals the exact expected step count
/// whenever all involved values stay below the cap.
pub fn segregation(
    g: &RecGraph,
    c_binary: &CostVector,
    step_cap: f64,
) -> Result<Segregation, ExposureError> {
    if !c_binary.is_binary() {
        return Err(ExposureError::NonBinaryCosts);
    }
    let n = g.n();
    let harmful: Vec<usize> = (0..n).filter(|&i| c_binary.get(i) == 1.0).collect();
    if harmful.len() == n {
        return Err(ExposureError::NoBenignNodes);
    }
    let scale = if g.alpha() < 1.0 { 1.0 / (1.0 - g.alpha()) } else { 1.0 };
    let mut h = vec![0.0f64; harmful.len()];
    let index_of: std::collections::HashMap<usize, usize> =
        harmful.iter().enumerate().map(|(idx, &i)| (i, idx)).collect();
    let mut next = vec![0.0f64; harmful.len()];
    // Monotone value iteration from 0; clamping makes trapped clusters
    // saturate and terminate.
    let max_iter = 100 * (step_cap.ceil() as usize).max(1) + 1000;
    for _ in 0..max_iter {
        let mut change = 0.0f64;
        for (idx, &i) in harmful.iter().enumerate() {
            let mut acc = 1.0;
            for &(j, p) in g.out_edges(i) {
                if let Some(&jdx) = index_of.get(&j) {
                    acc += p * scale * h[jdx];
                }
            }
            let v = acc.min(step_cap);
            change = change.max(v - h[idx]);
            next[idx] = v;
        }
        std::mem::swap(&mut h, &mut next);
        if change <= 1e-12 {
            break;
        }
    }
    let steps: Vec<(usize, f64)> = harmful.iter().copied().zip(h.iter().copied()).collect();
    let max = h.iter().cloned().fold(0.0, f64::max);
    let total = h.iter().sum();
    Ok(Segregation { steps, max, total })
}
