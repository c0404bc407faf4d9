//! Per-source relevance rankings, nDCG, and q-permissibility of rewirings.
//!
//! The discount of a recommended node is indexed by its global relevance
//! rank idx_i(j) for the source, not by the slot it occupies, and the ideal
//! DCG of a source is a function of the ranking and the out-degree only, so
//! it stays fixed across rewirings.

use std::collections::HashMap;

use thiserror::Error;

use crate::graph::RecGraph;

#[derive(Debug, Error, PartialEq)]
pub enum RelevanceError {
    #[error("source {0} out of range (n = {1})")]
    SourceOutOfRange(usize, usize),
    #[error("source {src}: ranks not contiguous from 1 (rank {rank} at position {pos})")]
    BadRank { src: usize, rank: usize, pos: usize },
    #[error("source {src}: negative score {score} at rank {rank}")]
    NegativeScore { src: usize, rank: usize, score: f64 },
    #[error("source {src}: scores increase at rank {rank}")]
    ScoresNotDescending { src: usize, rank: usize },
    #[error("source {src}: duplicate candidate {dst}")]
    DuplicateCandidate { src: usize, dst: usize },
    #[error("source {src}: out-neighbor {dst} has no relevance score")]
    UnscoredNeighbor { src: usize, dst: usize },
    #[error("source {src}: candidate list shorter than out-degree {degree}")]
    ListTooShort { src: usize, degree: usize },
}

/// Ranked candidate targets per source, descending by score; rank = 1-based
/// position in the list.
#[derive(Debug, Clone, Default)]
pub struct RelevanceIndex {
    lists: Vec<Vec<(usize, f64)>>,
    rank_of: Vec<HashMap<usize, usize>>,
}

impl RelevanceIndex {
    /// Builds the index from per-source ranked lists (already in rank order).
    /// Scores must be nonnegative and non-increasing down each list.
    pub fn new(n: usize, lists: Vec<(usize, Vec<(usize, f64)>)>) -> Result<Self, RelevanceError> {
        let mut full: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for (src, list) in lists {
            if src >= n {
                return Err(RelevanceError::SourceOutOfRange(src, n));
            }
            full[src] = list;
        }
        let mut rank_of = Vec::with_capacity(n);
        for (src, list) in full.iter().enumerate() {
            let mut map = HashMap::with_capacity(list.len());
            let mut prev = f64::INFINITY;
            for (pos, &(dst, score)) in list.iter().enumerate() {
                if score < 0.0 {
                    return Err(RelevanceError::NegativeScore { src, rank: pos + 1, score });
                }
                if score > prev {
                    return Err(RelevanceError::ScoresNotDescending { src, rank: pos + 1 });
                }
                prev = score;
                if map.insert(dst, pos).is_some() {
                    return Err(RelevanceError::DuplicateCandidate { src, dst });
                }
            }
            rank_of.push(map);
        }
        Ok(RelevanceIndex { lists: full, rank_of })
    }

    pub fn n(&self) -> usize {
        self.lists.len()
    }

    /// Ranked candidates of `src` as `(target, score)` in rank order.
    pub fn candidates(&self, src: usize) -> &[(usize, f64)] {
        &self.lists[src]
    }

    /// 1-based global relevance rank of `dst` for `src`, if listed.
    pub fn rank(&self, src: usize, dst: usize) -> Option<usize> {
        self.rank_of[src].get(&dst).map(|&pos| pos + 1)
    }

    /// Relevance score of `dst` for `src`, if listed.
    pub fn score(&self, src: usize, dst: usize) -> Option<f64> {
        self.rank_of[src].get(&dst).map(|&pos| self.lists[src][pos].1)
    }

    /// Fails fast when some current out-neighbor of a source has no score or
    /// a candidate list is shorter than the source's out-degree.
    pub fn validate_against(&self, g: &RecGraph) -> Result<(), RelevanceError> {
        for i in 0..g.n() {
            let d = g.out_degree(i);
            if d == 0 {
                continue;
            }
            if self.lists.get(i).map_or(0, Vec::len) < d {
                return Err(RelevanceError::ListTooShort { src: i, degree: d });
            }
            for &(j, _) in g.out_edges(i) {
                if self.rank(i, j).is_none() {
                    return Err(RelevanceError::UnscoredNeighbor { src: i, dst: j });
                }
            }
        }
        Ok(())
    }
}

fn discount(rank: usize) -> f64 {
    (1.0 + rank as f64).log2()
}

/// DCG of node i's current recommendation set: Σ score / log2(1 + rank),
/// summing over the out-neighbors in slot order with global ranks.
fn dcg_of_neighbors(
    index: &RelevanceIndex,
    g: &RecGraph,
    i: usize,
    swap: Option<(usize, usize)>,
) -> Result<f64, RelevanceError> {
    let mut acc = 0.0;
    for &(mut t, _) in g.out_edges(i) {
        if let Some((from, to)) = swap {
            if t == from {
                t = to;
            }
        }
        let pos = *index.rank_of[i]
            .get(&t)
            .ok_or(RelevanceError::UnscoredNeighbor { src: i, dst: t })?;
        acc += index.lists[i][pos].1 / discount(pos + 1);
    }
    Ok(acc)
}

/// Ideal DCG over the out-degree-many top-ranked candidates of i.
fn ideal_dcg(index: &RelevanceIndex, g: &RecGraph, i: usize) -> Result<f64, RelevanceError> {
    let d = g.out_degree(i);
    let list = &index.lists[i];
    if list.len() < d {
        return Err(RelevanceError::ListTooShort { src: i, degree: d });
    }
    Ok(list[..d]
        .iter()
        .enumerate()
        .map(|(pos, &(_, score))| score / discount(pos + 1))
        .sum())
}

/// Normalized DCG of node i's current recommendations in [0, 1].
pub fn ndcg(index: &RelevanceIndex, g: &RecGraph, i: usize) -> Result<f64, RelevanceError> {
    let idcg = ideal_dcg(index, g, i)?;
    if idcg == 0.0 {
        // All-zero top scores rank everything equally well.
        return Ok(1.0);
    }
    Ok(dcg_of_neighbors(index, g, i, None)? / idcg)
}

/// Whether substituting k for j in i's recommendation set keeps nDCG(i) >= q.
/// A target missing from i's candidate list is not permissible (not an error).
pub fn q_permissible(
    index: &RelevanceIndex,
    g: &RecGraph,
    i: usize,
    j: usize,
    k: usize,
    q: f64,
) -> Result<bool, RelevanceError> {
    if k == i || g.has_edge(i, k) || !g.has_edge(i, j) {
        return Ok(false);
    }
    if index.rank(i, k).is_none() {
        return Ok(false);
    }
    let idcg = ideal_dcg(index, g, i)?;
    if idcg == 0.0 {
        return Ok(true);
    }
    let dcg = dcg_of_neighbors(index, g, i, Some((j, k)))?;
    Ok(dcg / idcg >= q)
}

/// Among the q-permissible targets for edge (i, j), the one with the
/// smallest exposure; ties broken by higher relevance score, then lower id.
pub fn best_permissible_target(
    index: &RelevanceIndex,
    g: &RecGraph,
    row_cost: &[f64],
    i: usize,
    j: usize,
    q: f64,
) -> Result<Option<usize>, RelevanceError> {
    let mut best: Option<(usize, f64, f64)> = None; // (k, exposure, score)
    for &(k, score) in index.candidates(i) {
        if k == i || g.has_edge(i, k) {
            continue;
        }
        if !q_permissible(index, g, i, j, k, q)? {
            continue;
        }
        let exp = row_cost[k];
        let better = match best {
            None => true,
            Some((bk, bexp, bscore)) => {
                exp < bexp || (exp == bexp && (score > bscore || (score == bscore && k < bk)))
            }
        };
        if better {
            best = Some((k, exp, score));
        }
    }
    Ok(best.map(|(k, _, _)| k))
}
