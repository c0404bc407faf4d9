//! Recommendation graph with absorbing random-walk transition probabilities.
//!
//! A [`RecGraph`] stores, for every node, an ordered list of out-edges
//! `(target, probability)`. The list order is the recommendation rank order
//! (slot 1 first); edits that replace an edge keep the new target in the old
//! slot. Every node with at least one out-edge must have its probabilities
//! sum to `1 - alpha`, where `alpha` is the uniform absorption probability
//! of the walk.

use thiserror::Error;

/// Row-sum tolerance enforced when a graph is constructed or loaded.
pub const ROW_SUM_TOL_STRICT: f64 = 1e-12;
/// Row-sum tolerance after long edit sequences (accumulated rounding).
pub const ROW_SUM_TOL_EDITED: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("node index {0} out of range (n = {1})")]
    NodeOutOfRange(usize, usize),
    #[error("edge ({0}, {1}) does not exist")]
    MissingEdge(usize, usize),
    #[error("edge ({0}, {1}) already exists")]
    DuplicateEdge(usize, usize),
    #[error("self-loop ({0}, {0}) is not allowed")]
    SelfLoop(usize),
    #[error("node {0} has out-degree 1; deletion would create an absorbing state")]
    LastOutEdge(usize),
    #[error("probability {p} for edge ({i}, {j}) outside (0, {max}]")]
    BadProbability { i: usize, j: usize, p: f64, max: f64 },
    #[error("insertion probability {p} at node {i} would drive another probability to <= 0")]
    InsertionTooLarge { i: usize, p: f64 },
    #[error("node {i}: out-probabilities sum to {sum}, expected {expected}")]
    RowSum { i: usize, sum: f64, expected: f64 },
    #[error("alpha = {0} outside (0, 1]")]
    BadAlpha(f64),
    #[error("cost {c} at node {i} outside [0, 1]")]
    BadCost { i: usize, c: f64 },
    #[error("cost vector has length {got}, graph has {want} nodes")]
    CostLength { got: usize, want: usize },
}

/// Directed recommendation graph with per-edge transition probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct RecGraph {
    alpha: f64,
    out: Vec<Vec<(usize, f64)>>,
}

impl RecGraph {
    /// Builds a graph from ordered adjacency lists and validates all invariants
    /// at the strict (load-time) row-sum tolerance.
    pub fn new(alpha: f64, out: Vec<Vec<(usize, f64)>>) -> Result<Self, GraphError> {
        let g = RecGraph { alpha, out };
        g.validate(ROW_SUM_TOL_STRICT)?;
        Ok(g)
    }

    /// Number of nodes.
    pub fn n(&self) -> usize {
        self.out.len()
    }

    /// Absorption probability.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Ordered out-edges of `i` as `(target, probability)` slots.
    pub fn out_edges(&self, i: usize) -> &[(usize, f64)] {
        &self.out[i]
    }

    /// Out-degree of `i`.
    pub fn out_degree(&self, i: usize) -> usize {
        self.out[i].len()
    }

    /// Whether the edge `(i, j)` exists.
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.out[i].iter().any(|&(t, _)| t == j)
    }

    /// Probability of edge `(i, j)`, if present.
    pub fn edge_prob(&self, i: usize, j: usize) -> Option<f64> {
        self.out[i].iter().find(|&&(t, _)| t == j).map(|&(_, p)| p)
    }

    /// Iterates all edges as `(source, slot, target, probability)`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, usize, f64)> + '_ {
        self.out
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().enumerate().map(move |(s, &(j, p))| (i, s, j, p)))
    }

    /// Maximum out-degree and edge count.
    pub fn degree_stats(&self) -> (usize, usize) {
        let max = self.out.iter().map(Vec::len).max().unwrap_or(0);
        let m = self.out.iter().map(Vec::len).sum();
        (max, m)
    }

    /// Checks all structural invariants; `row_tol` bounds |row sum - (1 - alpha)|.
    pub fn validate(&self, row_tol: f64) -> Result<(), GraphError> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(GraphError::BadAlpha(self.alpha));
        }
        let n = self.n();
        let budget = 1.0 - self.alpha;
        for (i, row) in self.out.iter().enumerate() {
            let mut seen = vec![];
            let mut sum = 0.0;
            for &(j, p) in row {
                if j >= n {
                    return Err(GraphError::NodeOutOfRange(j, n));
                }
                if j == i {
                    return Err(GraphError::SelfLoop(i));
                }
                if seen.contains(&j) {
                    return Err(GraphError::DuplicateEdge(i, j));
                }
                seen.push(j);
                if !(p > 0.0 && p <= budget + row_tol) {
                    return Err(GraphError::BadProbability { i, j, p, max: budget });
                }
                sum += p;
            }
            if !row.is_empty() && (sum - budget).abs() > row_tol {
                return Err(GraphError::RowSum { i, sum, expected: budget });
            }
        }
        Ok(())
    }

    fn check_node(&self, i: usize) -> Result<(), GraphError> {
        if i >= self.n() {
            Err(GraphError::NodeOutOfRange(i, self.n()))
        } else {
            Ok(())
        }
    }

    /// Replaces edge `(i, j)` by `(i, k)`, moving j's probability mass and slot to k.
    pub fn apply_rewiring(&mut self, i: usize, j: usize, k: usize) -> Result<(), GraphError> {
        self.check_node(i)?;
        self.check_node(j)?;
        self.check_node(k)?;
        let slot = self.out[i]
            .iter()
            .position(|&(t, _)| t == j)
            .ok_or(GraphError::MissingEdge(i, j))?;
        if k == i {
            return Err(GraphError::SelfLoop(i));
        }
        if self.has_edge(i, k) {
            return Err(GraphError::DuplicateEdge(i, k));
        }
        self.out[i][slot].0 = k;
        Ok(())
    }

    /// Removes edge `(i, j)`, spreading its mass evenly over i's remaining out-edges.
    pub fn apply_deletion(&mut self, i: usize, j: usize) -> Result<(), GraphError> {
        self.check_node(i)?;
        self.check_node(j)?;
        let slot = self.out[i]
            .iter()
            .position(|&(t, _)| t == j)
            .ok_or(GraphError::MissingEdge(i, j))?;
        let d = self.out[i].len();
        if d <= 1 {
            return Err(GraphError::LastOutEdge(i));
        }
        let freed = self.out[i][slot].1;
        self.out[i].remove(slot);
        let share = freed / (d - 1) as f64;
        for e in &mut self.out[i] {
            e.1 += share;
        }
        Ok(())
    }

    /// Inserts edge `(i, j)` with probability `p`, subtracting `p / out_degree(i)`
    /// from each pre-existing out-edge of i. The new edge takes the last slot.
    pub fn apply_insertion(&mut self, i: usize, j: usize, p: f64) -> Result<(), GraphError> {
        self.check_node(i)?;
        self.check_node(j)?;
        if j == i {
            return Err(GraphError::SelfLoop(i));
        }
        if self.has_edge(i, j) {
            return Err(GraphError::DuplicateEdge(i, j));
        }
        let budget = 1.0 - self.alpha;
        if !(p > 0.0 && p <= budget) {
            return Err(GraphError::BadProbability { i, j, p, max: budget });
        }
        let d = self.out[i].len();
        if d > 0 {
            let share = p / d as f64;
            if self.out[i].iter().any(|&(_, q)| q - share <= 0.0) {
                return Err(GraphError::InsertionTooLarge { i, p });
            }
            for e in &mut self.out[i] {
                e.1 -= share;
            }
        } else if (p - budget).abs() > ROW_SUM_TOL_STRICT {
            // A previously absorbing node must take the full budget.
            return Err(GraphError::RowSum { i, sum: p, expected: budget });
        }
        self.out[i].push((j, p));
        Ok(())
    }
}

/// Per-node harm costs in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct CostVector(Vec<f64>);

impl CostVector {
    pub fn new(costs: Vec<f64>) -> Result<Self, GraphError> {
        for (i, &c) in costs.iter().enumerate() {
            if !(0.0..=1.0).contains(&c) {
                return Err(GraphError::BadCost { i, c });
            }
        }
        Ok(CostVector(costs))
    }

    /// All-zero costs.
    pub fn zeros(n: usize) -> Self {
        CostVector(vec![0.0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn get(&self, i: usize) -> f64 {
        self.0[i]
    }

    /// True when every entry is exactly 0.0 or 1.0.
    pub fn is_binary(&self) -> bool {
        self.0.iter().all(|&c| c == 0.0 || c == 1.0)
    }

    /// Binarizes by threshold: harmful iff cost >= mu.
    pub fn binarize(&self, mu: f64) -> CostVector {
        CostVector(self.0.iter().map(|&c| if c >= mu { 1.0 } else { 0.0 }).collect())
    }

    /// Checks the length against a graph.
    pub fn check_len(&self, g: &RecGraph) -> Result<(), GraphError> {
        if self.len() != g.n() {
            return Err(GraphError::CostLength { got: self.len(), want: g.n() });
        }
        Ok(())
    }
}

/// One applied graph edit, with the optimizer round that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EditKind {
    Rewiring { i: usize, j: usize, k: usize },
    Deletion { i: usize, j: usize },
    Insertion { i: usize, j: usize, p: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EditRecord {
    pub kind: EditKind,
    pub round: usize,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn three_node() -> RecGraph {
        // 0 -> 1, 1 -> 0, 2 -> 0, p = 0.5, alpha = 0.5
        RecGraph::new(
            0.5,
            vec![vec![(1, 0.5)], vec![(0, 0.5)], vec![(0, 0.5)]],
        )
        .unwrap()
    }

    #[test]
    fn degree_stats_cycle() {
        let g = RecGraph::new(
            0.5,
            vec![vec![(1, 0.5)], vec![(2, 0.5)], vec![(0, 0.5)]],
        )
        .unwrap();
        assert_eq!(g.degree_stats(), (1, 3));
    }

    #[test]
    fn degree_stats_empty() {
        let g = RecGraph::new(0.5, vec![vec![], vec![]]).unwrap();
        assert_eq!(g.degree_stats(), (0, 0));
    }

    #[test]
    fn degree_stats_regular() {
        // 5-out-regular on 100 nodes: m = 500
        let n = 100;
        let out: Vec<Vec<(usize, f64)>> = (0..n)
            .map(|i| (1..=5).map(|s| ((i + s) % n, 0.95 / 5.0)).collect())
            .collect();
        let g = RecGraph::new(0.05, out).unwrap();
        assert_eq!(g.degree_stats(), (5, 500));
    }

    #[test]
    fn rewiring_moves_mass_and_slot() {
        let mut g = three_node();
        g.apply_rewiring(0, 1, 2).unwrap();
        assert_eq!(g.out_edges(0), &[(2, 0.5)]);
        assert_eq!(g.out_edges(1), &[(0, 0.5)]);
        assert!(g.validate(ROW_SUM_TOL_STRICT).is_ok());
    }

    #[test]
    fn rewiring_rejects_self_loop() {
        let mut g = three_node();
        assert_eq!(g.apply_rewiring(0, 1, 0), Err(GraphError::SelfLoop(0)));
    }

    #[test]
    fn rewiring_rejects_multi_edge() {
        let mut g = three_node();
        g.apply_rewiring(0, 1, 2).unwrap();
        // j = 0 is the removed edge; k = 0 collides with the existing (1, 0).
        assert_eq!(g.apply_rewiring(1, 0, 0), Err(GraphError::DuplicateEdge(1, 0)));
        let mut g2 = RecGraph::new(
            0.5,
            vec![vec![(1, 0.25), (2, 0.25)], vec![(0, 0.5)], vec![(0, 0.5)]],
        )
        .unwrap();
        assert_eq!(g2.apply_rewiring(0, 1, 2), Err(GraphError::DuplicateEdge(0, 2)));
    }

    #[test]
    fn rewiring_rejects_missing_edge() {
        let mut g = three_node();
        assert_eq!(g.apply_rewiring(2, 1, 0), Err(GraphError::MissingEdge(2, 1)));
    }

    #[test]
    fn inverse_rewiring_restores_exactly() {
        let g0 = three_node();
        let mut g = g0.clone();
        g.apply_rewiring(0, 1, 2).unwrap();
        g.apply_rewiring(0, 2, 1).unwrap();
        assert_eq!(g, g0);
    }

    #[test]
    fn deletion_redistributes_evenly() {
        let mut g = RecGraph::new(
            0.05,
            vec![
                vec![(1, 0.3), (2, 0.2), (3, 0.45)],
                vec![(0, 0.95)],
                vec![(0, 0.95)],
                vec![(0, 0.95)],
            ],
        )
        .unwrap();
        g.apply_deletion(0, 1).unwrap();
        let row = g.out_edges(0);
        assert_eq!(row.len(), 2);
        assert!((row[0].1 - 0.35).abs() < 1e-15 && row[0].0 == 2);
        assert!((row[1].1 - 0.60).abs() < 1e-15 && row[1].0 == 3);
        assert!(g.validate(ROW_SUM_TOL_EDITED).is_ok());
    }

    #[test]
    fn deletion_rejects_last_edge_and_double_delete() {
        let mut g = three_node();
        assert_eq!(g.apply_deletion(0, 1), Err(GraphError::LastOutEdge(0)));
        let mut g2 = RecGraph::new(
            0.05,
            vec![vec![(1, 0.5), (2, 0.45)], vec![(0, 0.95)], vec![(0, 0.95)]],
        )
        .unwrap();
        g2.apply_deletion(0, 1).unwrap();
        assert_eq!(g2.apply_deletion(0, 1), Err(GraphError::MissingEdge(0, 1)));
        let mut g3 = RecGraph::new(
            0.05,
            vec![
                vec![(1, 0.3), (2, 0.3), (3, 0.35)],
                vec![(0, 0.95)],
                vec![(0, 0.95)],
                vec![(0, 0.95)],
            ],
        )
        .unwrap();
        g3.apply_deletion(0, 1).unwrap();
        assert_eq!(g3.apply_deletion(0, 1), Err(GraphError::MissingEdge(0, 1)));
    }

    #[test]
    fn insertion_subtracts_evenly() {
        let mut g = RecGraph::new(
            0.05,
            vec![
                vec![(1, 0.5), (2, 0.45)],
                vec![(0, 0.95)],
                vec![(0, 0.95)],
                vec![(0, 0.95)],
            ],
        )
        .unwrap();
        g.apply_insertion(0, 3, 0.2).unwrap();
        let row = g.out_edges(0);
        assert!((row[0].1 - 0.4).abs() < 1e-15);
        assert!((row[1].1 - 0.35).abs() < 1e-15);
        assert_eq!(row[2], (3, 0.2));
        assert!(g.validate(ROW_SUM_TOL_EDITED).is_ok());
    }

    #[test]
    fn insertion_rejects_overflow_and_duplicates() {
        let mut g = RecGraph::new(
            0.05,
            vec![vec![(1, 0.5), (2, 0.45)], vec![(0, 0.95)], vec![(0, 0.95)], vec![(0, 0.95)]],
        )
        .unwrap();
        assert!(matches!(
            g.apply_insertion(0, 3, 0.95),
            Err(GraphError::InsertionTooLarge { .. })
        ));
        assert_eq!(g.apply_insertion(0, 1, 0.1), Err(GraphError::DuplicateEdge(0, 1)));
    }

    #[test]
    fn edits_preserve_n_and_alpha() {
        let mut g = RecGraph::new(
            0.05,
            vec![
                vec![(1, 0.3), (2, 0.2), (3, 0.45)],
                vec![(0, 0.95)],
                vec![(0, 0.95)],
                vec![(0, 0.95)],
            ],
        )
        .unwrap();
        g.apply_rewiring(1, 0, 2).unwrap();
        g.apply_deletion(0, 1).unwrap();
        g.apply_insertion(0, 1, 0.1).unwrap();
        assert_eq!(g.n(), 4);
        assert_eq!(g.alpha(), 0.05);
    }

    #[test]
    fn cost_vector_bounds() {
        assert!(CostVector::new(vec![0.0, 0.5, 1.0]).is_ok());
        assert!(matches!(
            CostVector::new(vec![0.0, 1.5]),
            Err(GraphError::BadCost { i: 1, .. })
        ));
        assert!(matches!(
            CostVector::new(vec![-0.1]),
            Err(GraphError::BadCost { i: 0, .. })
        ));
    }

    #[test]
    fn binarize_thresholds() {
        let c = CostVector::new(vec![0.0, 0.4, 0.5, 0.9]).unwrap();
        assert_eq!(c.binarize(0.5).values(), &[0.0, 0.0, 1.0, 1.0]);
        assert!(c.binarize(0.5).is_binary());
        assert!(!c.is_binary());
    }
}
