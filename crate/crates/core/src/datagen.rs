//! Synthetic d-out-regular graph and cost generators.
//!
//! Two edge-placement models: SU draws targets uniformly, SH draws them with
//! probability proportional to 1 - |c(i) - c(j)| (homophily on realized
//! costs), both without replacement. Costs are either binary (a beta_frac
//! fraction of latently harmful nodes at cost 1) or a beta mixture
//! (Beta(7,1) for harmful, Beta(1,10) for benign). Out-edge probabilities
//! are uniform or follow the fixed skewed slot profile for d = 5.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution};
use thiserror::Error;

use crate::graph::{CostVector, RecGraph};
use crate::relevance::RelevanceIndex;

/// Skewed out-edge probability weights (rank 1 first), defined for d = 5.
pub const SKEWED_SLOT_WEIGHTS: [f64; 5] = [0.35, 0.25, 0.20, 0.15, 0.05];

const SH_REJECTION_CAP: usize = 1_000_000;

#[derive(Debug, Error, PartialEq)]
pub enum DatagenError {
    #[error("d = {0} must be smaller than n = {1}")]
    DegreeTooLarge(usize, usize),
    #[error("beta_frac = {0} outside (0, 1)")]
    BadBetaFrac(f64),
    #[error("alpha = {0} outside (0, 1]")]
    BadAlpha(f64),
    #[error("skewed probability shape is only defined for d = 5, got d = {0}")]
    SkewNeedsDegreeFive(usize),
    #[error("node {0}: fewer than d positive-weight targets under homophilous sampling")]
    NotEnoughTargets(usize),
    #[error("node {0}: homophilous rejection sampling exceeded its cap")]
    RejectionCap(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeModel {
    /// Uniform target choice.
    Su,
    /// Homophilous target choice on cost similarity.
    Sh,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbShape {
    Uniform,
    Skewed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CostKind {
    Binary,
    Real,
}

#[derive(Debug, Clone)]
pub struct SyntheticConfig {
    pub model: EdgeModel,
    pub n: usize,
    pub d: usize,
    pub alpha: f64,
    pub chi: ProbShape,
    pub beta_frac: f64,
    pub cost_kind: CostKind,
    pub seed: u64,
}

impl SyntheticConfig {
    pub fn validate(&self) -> Result<(), DatagenError> {
        if self.d >= self.n {
            return Err(DatagenError::DegreeTooLarge(self.d, self.n));
        }
        if !(self.beta_frac > 0.0 && self.beta_frac < 1.0) {
            return Err(DatagenError::BadBetaFrac(self.beta_frac));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(DatagenError::BadAlpha(self.alpha));
        }
        if self.chi == ProbShape::Skewed && self.d != 5 {
            return Err(DatagenError::SkewNeedsDegreeFive(self.d));
        }
        Ok(())
    }
}

/// Draws costs: ⌊beta_frac·n⌋ latently harmful nodes, then binary or
/// beta-mixture values. The cost RNG stream is independent of the graph's.
pub fn gen_costs(cfg: &SyntheticConfig) -> Result<CostVector, DatagenError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n_harmful = (cfg.beta_frac * cfg.n as f64).floor() as usize;
    let mut harmful = vec![false; cfg.n];
    for idx in sample(&mut rng, cfg.n, n_harmful) {
        harmful[idx] = true;
    }
    let values = match cfg.cost_kind {
        CostKind::Binary => harmful.iter().map(|&h| if h { 1.0 } else { 0.0 }).collect(),
        CostKind::Real => {
            let harm_dist = Beta::new(7.0, 1.0).expect("valid beta parameters");
            let benign_dist = Beta::new(1.0, 10.0).expect("valid beta parameters");
            harmful
                .iter()
                .map(|&h| {
                    let v: f64 =
                        if h { harm_dist.sample(&mut rng) } else { benign_dist.sample(&mut rng) };
                    v.clamp(0.0, 1.0)
                })
                .collect()
        }
    };
    Ok(CostVector::new(values).expect("generated costs are in [0, 1]"))
}

/// Places d distinct non-self targets per node and assigns slot
/// probabilities by the chi shape.
pub fn gen_graph(cfg: &SyntheticConfig, costs: &CostVector) -> Result<RecGraph, DatagenError> {
    cfg.validate()?;
    assert_eq!(costs.len(), cfg.n, "costs must cover all nodes");
    // Offset keeps the edge stream independent from the cost stream for the
    // same seed.
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(0x9e3779b97f4a7c15));
    let slot_probs = slot_probabilities(cfg)?;
    let mut out: Vec<Vec<(usize, f64)>> = Vec::with_capacity(cfg.n);
    for i in 0..cfg.n {
        let targets = match cfg.model {
            EdgeModel::Su => su_targets(&mut rng, cfg.n, cfg.d, i),
            EdgeModel::Sh => sh_targets(&mut rng, cfg, costs, i)?,
        };
        out.push(targets.into_iter().zip(slot_probs.iter().copied()).collect());
    }
    Ok(RecGraph::new(cfg.alpha, out).expect("generated rows satisfy graph invariants"))
}

fn slot_probabilities(cfg: &SyntheticConfig) -> Result<Vec<f64>, DatagenError> {
    let budget = 1.0 - cfg.alpha;
    Ok(match cfg.chi {
        ProbShape::Uniform => vec![budget / cfg.d as f64; cfg.d],
        ProbShape::Skewed => {
            if cfg.d != 5 {
                return Err(DatagenError::SkewNeedsDegreeFive(cfg.d));
            }
            SKEWED_SLOT_WEIGHTS.iter().map(|w| budget * w).collect()
        }
    })
}

fn su_targets(rng: &mut ChaCha8Rng, n: usize, d: usize, i: usize) -> Vec<usize> {
    // Sample from 0..n-1 and shift indices at or above i to skip the self-loop.
    sample(rng, n - 1, d)
        .into_iter()
        .map(|x| if x >= i { x + 1 } else { x })
        .collect()
}

/// Homophilous draw: accept target j with probability 1 - |c(i) - c(j)|,
/// which realizes sequential weighted sampling without replacement under
/// per-draw renormalization.
fn sh_targets(
    rng: &mut ChaCha8Rng,
    cfg: &SyntheticConfig,
    costs: &CostVector,
    i: usize,
) -> Result<Vec<usize>, DatagenError> {
    let n = cfg.n;
    let ci = costs.get(i);
    let available = (0..n).filter(|&j| j != i && 1.0 - (ci - costs.get(j)).abs() > 0.0).count();
    if available < cfg.d {
        return Err(DatagenError::NotEnoughTargets(i));
    }
    let mut picked: Vec<usize> = Vec::with_capacity(cfg.d);
    let mut tries = 0;
    while picked.len() < cfg.d {
        tries += 1;
        if tries > SH_REJECTION_CAP {
            return Err(DatagenError::RejectionCap(i));
        }
        let j = rng.random_range(0..n);
        if j == i || picked.contains(&j) {
            continue;
        }
        let w = 1.0 - (ci - costs.get(j)).abs();
        if w >= 1.0 || rng.random_range(0.0..1.0) < w {
            picked.push(j);
        }
    }
    Ok(picked)
}

/// Synthetic relevance index: each source ranks its current out-neighbors
/// first (slot order), then seeded-random other nodes up to `k_cand`
/// candidates, with score 1/rank. Initial nDCG is exactly 1 for every node.
pub fn gen_relevance(g: &RecGraph, k_cand: usize, seed: u64) -> RelevanceIndex {
    let n = g.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(0x6a09e667f3bcc909));
    let mut lists = Vec::with_capacity(n);
    for i in 0..n {
        let neighbors: Vec<usize> = g.out_edges(i).iter().map(|&(j, _)| j).collect();
        let mut list: Vec<usize> = neighbors.clone();
        if list.len() < k_cand {
            let mut others: Vec<usize> =
                (0..n).filter(|&x| x != i && !neighbors.contains(&x)).collect();
            // Seeded shuffle keeps filler candidates varied but reproducible.
            for idx in (1..others.len()).rev() {
                let swap = rng.random_range(0..=idx);
                others.swap(idx, swap);
            }
            let need = (k_cand - list.len()).min(others.len());
            list.extend(others.into_iter().take(need));
        } else {
            list.truncate(k_cand);
        }
        let scored: Vec<(usize, f64)> = list
            .into_iter()
            .enumerate()
            .map(|(pos, node)| (node, 1.0 / (pos + 1) as f64))
            .collect();
        lists.push((i, scored));
    }
    RelevanceIndex::new(n, lists).expect("generated lists are well-formed")
}
