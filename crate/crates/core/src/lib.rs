//! Minimize expected exposure to harmful content in a recommendation graph
//! by greedily rewiring edges.
//!
//! User behavior is an absorbing random walk on a directed graph whose
//! per-edge transition probabilities sum to 1 - α at every node. With
//! per-node harm costs c, the objective is the expected total exposure
//! f(G) = 1ᵀ(I - P)⁻¹c, and a single edge rewiring changes it by the closed
//! form Δ = στ/ρ. The [`optimize`] module implements the pruned heuristic
//! greedy optimizer over that score, with and without per-node nDCG quality
//! constraints, next to dense greedy references and ablation baselines.

pub mod datagen;
pub mod exposure;
pub mod graph;
pub mod io;
pub mod optimize;
pub mod relevance;
pub mod scoring;

pub use exposure::{
    dense_fundamental, exposure_total, kappa_for, power_col_sums, power_column, power_row_cost,
    safe_partition, segregation, ExposureState, SafePartition, Segregation,
};
pub use graph::{CostVector, EditKind, EditRecord, GraphError, RecGraph};
pub use optimize::{
    baseline, exact_greedy, gamine_qrem, gamine_rem, naive_greedy, Algorithm, Baseline,
    OptimizeError, RunConfig, RunOutcome, RunTrace, StopReason,
};
pub use relevance::{best_permissible_target, ndcg, q_permissible, RelevanceIndex};
pub use scoring::{
    score_deletion, score_exact, score_heuristic, score_insertion, sherman_morrison_update,
    RewiringCandidate,
};
