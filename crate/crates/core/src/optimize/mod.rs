//! Greedy rewiring optimizers and baselines.
//!
//! All variants share the same outer loop: recompute exposure vectors for
//! the current graph, pick one rewiring, apply it, and record a trace row.
//! They differ in how the candidate is selected:
//!
//! * [`gamine_rem`]/[`gamine_qrem`] score the Δ̂ = στ heuristic over a pruned
//!   candidate set and recheck the best few with exact Δ (power-iteration
//!   vectors and columns, no dense matrix);
//! * [`naive_greedy`] keeps a dense fundamental matrix up to date through
//!   rank-one updates and maximizes exact Δ over all pairs;
//! * [`exact_greedy`] re-derives the dense quantities from scratch each
//!   round and must pick the same edits as the naive variant;
//! * [`baseline`] implements the four ablations BL1-BL4.

mod baselines;
mod dense;
mod gamine;

pub use baselines::{baseline, Baseline, BL1_REJECTION_CAP};
pub use dense::{assert_oracle_sized, exact_greedy, naive_greedy};
pub use gamine::{gamine_qrem, gamine_rem};

use std::collections::BinaryHeap;

use thiserror::Error;

use crate::exposure::{self, ExposureError, DEFAULT_STEP_CAP};
use crate::graph::{CostVector, EditRecord, GraphError, RecGraph};
use crate::relevance::RelevanceError;
use crate::scoring::{RewiringCandidate, ScoringError};

/// Binarization threshold used only for the segregation summaries attached
/// to run traces when costs are real-valued.
pub const TRACE_SEG_MU: f64 = 0.5;

#[derive(Debug, Error)]
pub enum OptimizeError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Scoring(#[from] ScoringError),
    #[error(transparent)]
    Exposure(#[from] ExposureError),
    #[error(transparent)]
    Relevance(#[from] RelevanceError),
    #[error("initial graph violates the quality constraint: ndcg({node}) = {ndcg} < q = {q}")]
    InitialQuality { node: usize, ndcg: f64, q: f64 },
    #[error("budget must be at least 1")]
    ZeroBudget,
}

/// Which optimizer a run uses; carried in configs and CLI dispatch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Gamine,
    Exact,
    Naive,
    Bl1,
    Bl2,
    Bl3,
    Bl4,
}

/// Knobs shared by every optimizer run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    /// Rewiring budget r.
    pub budget: usize,
    /// Quality threshold q for QREM; 0 disables the constraint.
    pub quality: f64,
    /// Power-iteration terms; None derives kappa_for(alpha, eps).
    pub kappa: Option<usize>,
    /// Target truncation error when kappa is derived.
    pub eps: f64,
    /// Candidate targets kept per source in relevance indexes.
    pub k_cand: usize,
    /// How many top-Δ̂ candidates get an exact-Δ recheck; usize::MAX = all.
    pub recheck_top: usize,
    /// RNG seed (BL1 and any sampled choices).
    pub seed: u64,
    /// Algorithm identifier, for dispatch and provenance.
    pub algo: Algorithm,
    /// Size of the REM low-exposure target pool K; None uses Δ⁺ + 2.
    /// The exact-equivalence checks widen it to n (K = V).
    pub target_pool: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            budget: 10,
            quality: 0.0,
            kappa: None,
            eps: 0.01,
            k_cand: 100,
            recheck_top: 100,
            seed: 0,
            algo: Algorithm::Gamine,
            target_pool: None,
        }
    }
}

impl RunConfig {
    pub fn kappa_for(&self, alpha: f64) -> usize {
        self.kappa.unwrap_or_else(|| exposure::kappa_for(alpha, self.eps))
    }
}

/// Why a run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// All budgeted rounds were spent.
    BudgetExhausted,
    /// No candidate had Δ̂ > 0.
    NoPositiveHeuristic,
    /// The rechecked best candidate had exact Δ <= 0.
    NoPositiveExact,
    /// No structurally valid / permissible move was found (baselines).
    NoPermissibleMove,
}

/// One applied edit with the objective measured before and after at equal κ.
#[derive(Debug, Clone)]
pub struct TraceRound {
    pub round: usize,
    pub edit: EditRecord,
    pub f_before: f64,
    pub f_after: f64,
    /// Exact Δ predicted for the chosen edit at selection time.
    pub delta_pred: f64,
    pub wall_ms: f64,
}

/// Max and total segregation, attached to traces for before/after comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegSummary {
    pub max: f64,
    pub total: f64,
}

#[derive(Debug, Clone)]
pub struct RunTrace {
    pub rounds: Vec<TraceRound>,
    pub f_initial: f64,
    pub f_final: f64,
    pub initial_segregation: Option<SegSummary>,
    pub final_segregation: Option<SegSummary>,
    pub stop: StopReason,
}

/// A finished run: the trace plus the rewired graph.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub trace: RunTrace,
    pub graph: RecGraph,
}

pub(crate) fn seg_summary(g: &RecGraph, c: &CostVector) -> Option<SegSummary> {
    let binary = if c.is_binary() { c.clone() } else { c.binarize(TRACE_SEG_MU) };
    if !binary.values().contains(&1.0) {
        return None;
    }
    exposure::segregation(g, &binary, DEFAULT_STEP_CAP)
        .ok()
        .map(|s| SegSummary { max: s.max, total: s.total })
}

/// Candidate kept during the Δ̂ scan.
#[derive(Debug, Clone, Copy)]
pub(crate) struct HeurCand {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub delta_hat: f64,
}

fn worse_cmp(a: &HeurCand, b: &HeurCand) -> std::cmp::Ordering {
    b.delta_hat
        .partial_cmp(&a.delta_hat)
        .expect("delta_hat is never NaN")
        .then_with(|| (a.i, a.j, a.k).cmp(&(b.i, b.j, b.k)))
}

struct HeapEntry(HeurCand);

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        worse_cmp(&self.0, &other.0) == std::cmp::Ordering::Equal
    }
}
impl Eq for HeapEntry {}
impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        worse_cmp(&self.0, &other.0)
    }
}

/// Bounded best-N set under (Δ̂ desc, then (i, j, k) asc); the heap keeps the
/// worst retained candidate on top for O(log N) eviction.
pub(crate) struct TopCandidates {
    cap: usize,
    heap: BinaryHeap<HeapEntry>,
}

impl TopCandidates {
    pub fn new(cap: usize) -> Self {
        TopCandidates { cap, heap: BinaryHeap::new() }
    }

    pub fn push(&mut self, cand: HeurCand) {
        if self.cap == usize::MAX || self.heap.len() < self.cap {
            self.heap.push(HeapEntry(cand));
            return;
        }
        if let Some(worst) = self.heap.peek() {
            if worse_cmp(&cand, &worst.0) == std::cmp::Ordering::Less {
                self.heap.pop();
                self.heap.push(HeapEntry(cand));
            }
        }
    }

    /// Retained candidates in lexicographic (i, j, k) order, so every
    /// implementation rescans ties identically.
    pub fn into_lex_sorted(self) -> Vec<HeurCand> {
        let mut v: Vec<HeurCand> = self.heap.into_iter().map(|e| e.0).collect();
        v.sort_by_key(|c| (c.i, c.j, c.k));
        v
    }
}

/// Relative tolerance window for comparing exact Δ values across
/// implementations; inside the window the tie falls through to Δ̂ and then
/// to lexicographic order.
pub(crate) const DELTA_TIE_TOL: f64 = 1e-9;

/// Whether candidate `a` beats the incumbent `b` under the deterministic
/// tie-break (larger Δ, then larger Δ̂, then lexicographic (i, j, k)).
pub(crate) fn cand_improves(a: &RewiringCandidate, b: &RewiringCandidate) -> bool {
    let tol = DELTA_TIE_TOL * a.delta.abs().max(b.delta.abs()).max(1.0);
    if a.delta > b.delta + tol {
        return true;
    }
    if a.delta < b.delta - tol {
        return false;
    }
    let tol_hat = DELTA_TIE_TOL * a.delta_hat.abs().max(b.delta_hat.abs()).max(1.0);
    if a.delta_hat > b.delta_hat + tol_hat {
        return true;
    }
    if a.delta_hat < b.delta_hat - tol_hat {
        return false;
    }
    (a.i, a.j, a.k) < (b.i, b.j, b.k)
}

/// Indices of the `k` smallest values under the total order (value, index),
/// found by selection rather than a full sort.
pub(crate) fn lowest_k(values: &[f64], k: usize) -> Vec<usize> {
    let n = values.len();
    let mut idx: Vec<usize> = (0..n).collect();
    let k = k.min(n);
    if k == 0 {
        return Vec::new();
    }
    if k < n {
        idx.select_nth_unstable_by(k - 1, |&a, &b| {
            values[a].partial_cmp(&values[b]).expect("exposure is never NaN").then(a.cmp(&b))
        });
        idx.truncate(k);
    }
    idx.sort_unstable();
    idx
}
