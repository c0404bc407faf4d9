//! The pruned heuristic greedy optimizer, with and without quality
//! constraints.

use std::collections::HashMap;
use std::time::Instant;

use rayon::prelude::*;

use crate::exposure::{power_col_sums, power_column, power_row_cost};
use crate::graph::{CostVector, EditKind, EditRecord, RecGraph};
use crate::relevance::{best_permissible_target, ndcg, RelevanceIndex};
use crate::scoring::{score_exact, score_heuristic, RewiringCandidate};

use super::{
    cand_improves, seg_summary, HeurCand, OptimizeError, RunConfig, RunOutcome, RunTrace,
    StopReason, TopCandidates,
};

/// Heuristic greedy exposure minimization without quality constraints.
///
/// Per round: recompute 1ᵀF and Fc by power iteration; collect the Δ⁺+2
/// lowest-exposure nodes K; score Δ̂ for every edge (i, j) against every
/// k ∈ K \ (N⁺(i) ∪ {i}); recheck the best `recheck_top` candidates with
/// exact Δ (one Fe_i column per distinct source); apply the argmax if its
/// exact Δ is positive.
pub fn gamine_rem(
    g0: &RecGraph,
    c: &CostVector,
    cfg: &RunConfig,
) -> Result<RunOutcome, OptimizeError> {
    c.check_len(g0)?;
    run_gamine(g0, c, None, cfg)
}

/// Heuristic greedy exposure minimization under the constraint that every
/// node keeps nDCG >= q. Rewiring targets come from each source's ranked
/// candidate list; per edge only the lowest-exposure permissible target is
/// scored. The initial graph must already satisfy the constraint.
pub fn gamine_qrem(
    g0: &RecGraph,
    c: &CostVector,
    index: &RelevanceIndex,
    cfg: &RunConfig,
) -> Result<RunOutcome, OptimizeError> {
    c.check_len(g0)?;
    index.validate_against(g0)?;
    for i in 0..g0.n() {
        if g0.out_degree(i) == 0 {
            continue;
        }
        let quality = ndcg(index, g0, i)?;
        if quality < cfg.quality {
            return Err(OptimizeError::InitialQuality { node: i, ndcg: quality, q: cfg.quality });
        }
    }
    run_gamine(g0, c, Some(index), cfg)
}

fn run_gamine(
    g0: &RecGraph,
    c: &CostVector,
    index: Option<&RelevanceIndex>,
    cfg: &RunConfig,
) -> Result<RunOutcome, OptimizeError> {
    let mut g = g0.clone();
    let kappa = cfg.kappa_for(g.alpha());
    let initial_segregation = seg_summary(&g, c);
    let mut rounds = Vec::new();
    let mut f_initial = None;
    let mut f_final = None;
    let mut stop = StopReason::BudgetExhausted;

    for round in 0..cfg.budget {
        let t0 = Instant::now();
        let col_sums = power_col_sums(&g, kappa);
        let row_cost = power_row_cost(&g, c, kappa);
        let f_before: f64 = row_cost.iter().sum();
        f_initial.get_or_insert(f_before);
        f_final = Some(f_before);

        let candidates = match index {
            None => {
                rem_candidates_pooled(&g, &col_sums, &row_cost, cfg.target_pool, cfg.recheck_top)
            }
            Some(idx) => {
                qrem_candidates(&g, idx, &col_sums, &row_cost, cfg.quality, cfg.recheck_top)?
            }
        };
        if candidates.is_empty() {
            stop = StopReason::NoPositiveHeuristic;
            break;
        }

        let best = recheck_exact(&g, &col_sums, &row_cost, kappa, &candidates)?;
        if best.delta <= 0.0 {
            stop = StopReason::NoPositiveExact;
            break;
        }

        g.apply_rewiring(best.i, best.j, best.k)?;
        let f_after: f64 = power_row_cost(&g, c, kappa).iter().sum();
        f_final = Some(f_after);
        rounds.push(super::TraceRound {
            round,
            edit: EditRecord {
                kind: EditKind::Rewiring { i: best.i, j: best.j, k: best.k },
                round,
            },
            f_before,
            f_after,
            delta_pred: best.delta,
            wall_ms: t0.elapsed().as_secs_f64() * 1e3,
        });
    }

    let f_touch = match f_initial {
        Some(f) => f,
        None => power_row_cost(&g, c, kappa).iter().sum(),
    };
    let trace = RunTrace {
        rounds,
        f_initial: f_touch,
        f_final: f_final.unwrap_or(f_touch),
        initial_segregation,
        final_segregation: seg_summary(&g, c),
        stop,
    };
    Ok(RunOutcome { trace, graph: g })
}

/// Δ̂ scan for REM: every edge against the Δ⁺+2 lowest-exposure targets.
pub(crate) fn rem_candidates(
    g: &RecGraph,
    col_sums: &[f64],
    row_cost: &[f64],
    cap: usize,
) -> Vec<HeurCand> {
    rem_candidates_pooled(g, col_sums, row_cost, None, cap)
}

pub(crate) fn rem_candidates_pooled(
    g: &RecGraph,
    col_sums: &[f64],
    row_cost: &[f64],
    target_pool: Option<usize>,
    cap: usize,
) -> Vec<HeurCand> {
    let (max_deg, _) = g.degree_stats();
    let kset = super::lowest_k(row_cost, target_pool.unwrap_or(max_deg + 2));
    let mut top = TopCandidates::new(cap);
    for (i, _, j, p) in g.edges() {
        for &k in &kset {
            if k == i || g.has_edge(i, k) {
                continue;
            }
            let (delta_hat, _, _) = score_heuristic(col_sums, row_cost, p, i, j, k);
            if delta_hat > 0.0 {
                top.push(HeurCand { i, j, k, delta_hat });
            }
        }
    }
    top.into_lex_sorted()
}

/// Δ̂ scan for QREM: per edge, only the lowest-exposure q-permissible target.
pub(crate) fn qrem_candidates(
    g: &RecGraph,
    index: &RelevanceIndex,
    col_sums: &[f64],
    row_cost: &[f64],
    quality: f64,
    cap: usize,
) -> Result<Vec<HeurCand>, OptimizeError> {
    let mut top = TopCandidates::new(cap);
    for (i, _, j, p) in g.edges() {
        let Some(k) = best_permissible_target(index, g, row_cost, i, j, quality)? else {
            continue;
        };
        let (delta_hat, _, _) = score_heuristic(col_sums, row_cost, p, i, j, k);
        if delta_hat > 0.0 {
            top.push(HeurCand { i, j, k, delta_hat });
        }
    }
    Ok(top.into_lex_sorted())
}

/// Exact-Δ rescoring of the shortlisted candidates: one power column per
/// distinct source, computed in parallel, then a deterministic argmax.
fn recheck_exact(
    g: &RecGraph,
    col_sums: &[f64],
    row_cost: &[f64],
    kappa: usize,
    candidates: &[HeurCand],
) -> Result<RewiringCandidate, OptimizeError> {
    let mut sources: Vec<usize> = candidates.iter().map(|c| c.i).collect();
    sources.sort_unstable();
    sources.dedup();
    let columns: HashMap<usize, Vec<f64>> = sources
        .par_iter()
        .map(|&i| (i, power_column(g, i, kappa)))
        .collect();

    let mut best: Option<RewiringCandidate> = None;
    for cand in candidates {
        let column = &columns[&cand.i];
        let scored = score_exact(g, col_sums, row_cost, column, cand.i, cand.j, cand.k)?;
        if best.as_ref().is_none_or(|b| cand_improves(&scored, b)) {
            best = Some(scored);
        }
    }
    Ok(best.expect("recheck_exact called with candidates"))
}
