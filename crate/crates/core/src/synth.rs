//! Benchmark construction: subsampled views of one hypergraph joined by
//! community-aligned inter-edges, and exact sampling from the generative
//! model on small node sets.

use std::collections::{BTreeMap, HashSet};

use ndarray::Array2;
use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::combinations::{binomial, Combinations};
use crate::error::{Error, Result};
use crate::hypergraph::{Hyperedge, HypergraphLayer, InterEdge, InterEdgeSet, MultiHypergraph};
use crate::likelihood::{lambda_e, lambda_ij, mu, LatentState};
use crate::seeding::rng_for;

/// Number of inter-edges to draw between two views.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct InterBudget {
    pub layer_a: usize,
    pub layer_b: usize,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SynthConfig {
    /// Fraction of source hyperedges kept in each view; one entry per view.
    pub sample_fractions: Vec<f64>,
    pub budgets: Vec<InterBudget>,
    /// Cross-community noise edges, as a fraction of each budget.
    pub noise_fraction: f64,
    pub seed: u64,
}

impl SynthConfig {
    /// `num_layers` views with the same fraction, inter-edges from view 0 to
    /// every other view.
    pub fn star(num_layers: usize, fraction: f64, budget: usize, noise_fraction: f64, seed: u64) -> Self {
        SynthConfig {
            sample_fractions: vec![fraction; num_layers],
            budgets: (1..num_layers)
                .map(|b| InterBudget { layer_a: 0, layer_b: b, count: budget })
                .collect(),
            noise_fraction,
            seed,
        }
    }

    /// Three 20% views of a source hypergraph with 2867 and 2792
    /// inter-edges from the first view to the other two.
    pub fn three_view_preset(noise_fraction: f64, seed: u64) -> Self {
        SynthConfig {
            sample_fractions: vec![0.2; 3],
            budgets: vec![
                InterBudget { layer_a: 0, layer_b: 1, count: 2867 },
                InterBudget { layer_a: 0, layer_b: 2, count: 2792 },
            ],
            noise_fraction,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sample_fractions.is_empty() {
            return Err(Error::InvalidInput("at least one view is required".into()));
        }
        if let Some(f) = self.sample_fractions.iter().find(|&&f| !(f > 0.0 && f <= 1.0)) {
            return Err(Error::InvalidInput(format!("sample fraction {f} outside (0, 1]")));
        }
        if !(0.0..1.0).contains(&self.noise_fraction) {
            return Err(Error::InvalidInput(format!("noise fraction {} outside [0, 1)", self.noise_fraction)));
        }
        for b in &self.budgets {
            if b.layer_a == b.layer_b || b.layer_a.max(b.layer_b) >= self.sample_fractions.len() {
                return Err(Error::InvalidInput(format!(
                    "inter-edge budget between views {} and {} is invalid",
                    b.layer_a, b.layer_b
                )));
            }
        }
        Ok(())
    }
}

const BUDGET_STREAM_BASE: u64 = 1 << 32;
const ENUMERATION_LIMIT: usize = 2_000_000;

/// Independent uniform subsamples of the source hyperedges plus
/// inter-edges between same-community nodes, then cross-community noise.
/// Views keep the source node indices and ground truth.
pub fn build_views(source: &HypergraphLayer, cfg: &SynthConfig) -> Result<MultiHypergraph> {
    cfg.validate()?;
    let truth = source
        .ground_truth()
        .ok_or_else(|| Error::InvalidInput("source layer has no ground truth".into()))?;
    let total = source.hyperedges().len();
    let layers = cfg
        .sample_fractions
        .iter()
        .enumerate()
        .map(|(l, &f)| {
            let keep = ((f * total as f64).ceil() as usize).min(total);
            let mut rng = rng_for(cfg.seed, l as u64);
            let mut idx = index::sample(&mut rng, total, keep).into_vec();
            idx.sort_unstable();
            source.subset(&idx)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut communities: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (&node, &c) in truth {
        communities.entry(c).or_default().push(node);
    }
    let groups: Vec<Vec<usize>> = communities.into_values().collect();

    let sets = cfg
        .budgets
        .iter()
        .enumerate()
        .map(|(b, budget)| {
            let mut rng = rng_for(cfg.seed, BUDGET_STREAM_BASE + b as u64);
            let mut edges = same_community_pairs(&groups, budget.count, &mut rng)?;
            let noise = (cfg.noise_fraction * budget.count as f64).ceil() as usize;
            edges.extend(cross_community_pairs(truth, noise, &mut rng)?);
            let edges = edges
                .into_iter()
                .map(|(i, j)| InterEdge { i, j, weight: 1.0 })
                .collect();
            InterEdgeSet::new(budget.layer_a, budget.layer_b, edges)
        })
        .collect::<Result<Vec<_>>>()?;
    MultiHypergraph::new(layers, sets)
}

/// `count` distinct pairs `(i, j)` with `i` and `j` in the same community,
/// uniformly among all such pairs (the two endpoints live in different
/// views, so `i == j` is allowed).
fn same_community_pairs<R: Rng>(groups: &[Vec<usize>], count: usize, rng: &mut R) -> Result<Vec<(usize, usize)>> {
    let sizes: Vec<usize> = groups.iter().map(|g| g.len() * g.len()).collect();
    let available: usize = sizes.iter().sum();
    if count > available {
        return Err(Error::InvalidInput(format!(
            "inter-edge budget {count} exceeds the {available} same-community pairs"
        )));
    }
    let mut picks = index::sample(rng, available, count).into_vec();
    picks.sort_unstable();
    let mut out = Vec::with_capacity(count);
    let (mut g, mut offset) = (0, 0);
    for p in picks {
        while p >= offset + sizes[g] {
            offset += sizes[g];
            g += 1;
        }
        let local = p - offset;
        let n = groups[g].len();
        out.push((groups[g][local / n], groups[g][local % n]));
    }
    Ok(out)
}

fn cross_community_pairs<R: Rng>(truth: &BTreeMap<usize, usize>, count: usize, rng: &mut R) -> Result<Vec<(usize, usize)>> {
    if count == 0 {
        return Ok(Vec::new());
    }
    let labeled: Vec<(usize, usize)> = truth.iter().map(|(&n, &c)| (n, c)).collect();
    let n = labeled.len();
    let same: usize = {
        let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
        for &(_, c) in &labeled {
            *counts.entry(c).or_default() += 1;
        }
        counts.values().map(|c| c * c).sum()
    };
    let available = n * n - same;
    if count > available {
        return Err(Error::InvalidInput(format!(
            "noise budget {count} exceeds the {available} cross-community pairs"
        )));
    }
    if available <= ENUMERATION_LIMIT {
        let pool: Vec<(usize, usize)> = labeled
            .iter()
            .flat_map(|&(i, ci)| labeled.iter().filter(move |&&(_, cj)| cj != ci).map(move |&(j, _)| (i, j)))
            .collect();
        return Ok(index::sample(rng, pool.len(), count).into_iter().map(|k| pool[k]).collect());
    }
    let mut seen = HashSet::with_capacity(count);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let (i, ci) = labeled[rng.random_range(0..n)];
        let (j, cj) = labeled[rng.random_range(0..n)];
        if ci != cj && seen.insert((i, j)) {
            out.push((i, j));
        }
    }
    Ok(out)
}

/// Removes `ceil(ratio * |S|)` uniformly chosen edges from every
/// inter-edge set. Layers are untouched.
pub fn remove_inter_edges(mh: &MultiHypergraph, ratio: f64, seed: u64) -> Result<MultiHypergraph> {
    if !(0.0..=1.0).contains(&ratio) {
        return Err(Error::InvalidInput(format!("removal ratio {ratio} outside [0, 1]")));
    }
    let sets = mh
        .inter_edges()
        .iter()
        .enumerate()
        .map(|(s, set)| {
            let len = set.len();
            let remove = ((ratio * len as f64).ceil() as usize).min(len);
            let mut rng = rng_for(seed, s as u64);
            let mut keep = index::sample(&mut rng, len, len - remove).into_vec();
            keep.sort_unstable();
            set.with_edges(keep.into_iter().map(|k| set.edges()[k]).collect())
        })
        .collect::<Result<Vec<_>>>()?;
    mh.with_inter_edges(sets)
}

/// Largest hyperedge size `sample_from_model` enumerates.
pub const MAX_SAMPLED_SIZE: usize = 4;
/// Largest number of candidate node sets (or cross pairs) enumerated per
/// layer (or per layer pair).
pub const MAX_CANDIDATES: u128 = 2_000_000;

fn poisson_draw<R: Rng>(rate: f64, rng: &mut R) -> f64 {
    if rate <= 0.0 {
        return 0.0;
    }
    Poisson::new(rate).map(|d| d.sample(rng)).unwrap_or(0.0)
}

/// Draws every candidate hyperedge of size `2..=max_size` with count
/// `Poisson(lambda_e / mu_e)` (internal degrees fixed to 1) and every
/// cross pair of `cross_pairs[s]` with count `Poisson(lambda_ij)` using
/// `state.w_cross[s]`. Zero draws are dropped.
pub fn sample_from_model(
    state: &LatentState,
    cross_pairs: &[(usize, usize)],
    max_size: usize,
    seed: u64,
) -> Result<MultiHypergraph> {
    if !(2..=MAX_SAMPLED_SIZE).contains(&max_size) {
        return Err(Error::InvalidInput(format!(
            "max hyperedge size {max_size} outside 2..={MAX_SAMPLED_SIZE}"
        )));
    }
    if cross_pairs.len() != state.w_cross.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} cross pairs for {} cross affinities",
            cross_pairs.len(),
            state.w_cross.len()
        )));
    }
    let mut layers = Vec::with_capacity(state.u.len());
    for (l, (u, w)) in state.u.iter().zip(&state.w).enumerate() {
        let n = u.nrows();
        let candidates: u128 = (2..=max_size).map(|s| binomial(n, s)).fold(0, u128::saturating_add);
        if candidates > MAX_CANDIDATES {
            return Err(Error::InvalidInput(format!(
                "layer {l}: {candidates} candidate hyperedges exceed the enumeration bound {MAX_CANDIDATES}"
            )));
        }
        let mut rng = rng_for(seed, l as u64);
        let mut edges = Vec::new();
        for size in 2..=max_size {
            let ones = vec![1.0; size];
            let norm = mu(size)?;
            for nodes in Combinations::new(n, size) {
                let rate = lambda_e(&nodes, &ones, u, w) / norm;
                let count = poisson_draw(rate, &mut rng);
                if count > 0.0 {
                    edges.push(Hyperedge::new(nodes, count)?);
                }
            }
        }
        layers.push(HypergraphLayer::new(n.max(1), edges)?);
    }
    let mut sets = Vec::with_capacity(cross_pairs.len());
    for (s, &(a, b)) in cross_pairs.iter().enumerate() {
        let (ua, ub) = (&state.u[a], &state.u[b]);
        if (ua.nrows() as u128) * (ub.nrows() as u128) > MAX_CANDIDATES {
            return Err(Error::InvalidInput(format!("layer pair ({a}, {b}) has too many cross pairs")));
        }
        let mut rng = rng_for(seed, BUDGET_STREAM_BASE + s as u64);
        let mut edges = Vec::new();
        for i in 0..ua.nrows() {
            for j in 0..ub.nrows() {
                let rate = lambda_ij(ua.row(i), ub.row(j), &state.w_cross[s])?;
                let count = poisson_draw(rate, &mut rng);
                if count > 0.0 {
                    edges.push(InterEdge { i, j, weight: count });
                }
            }
        }
        sets.push(InterEdgeSet::new(a, b, edges)?);
    }
    MultiHypergraph::new(layers, sets)
}

/// Planted-partition benchmark: equal-size communities, one-hot
/// memberships, `w` with `c_in` on the diagonal and `c_out` elsewhere, and
/// cross affinities `cross_in` / `cross_out` from layer 0 to every other
/// layer.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PlantedConfig {
    pub num_layers: usize,
    pub nodes_per_layer: usize,
    pub communities: usize,
    pub c_in: f64,
    pub c_out: f64,
    pub cross_in: f64,
    pub cross_out: f64,
    pub max_size: usize,
    pub seed: u64,
}

impl PlantedConfig {
    /// Two layers of 60 nodes, three communities, `c_in / c_out = 10`.
    pub fn strong_signal(seed: u64) -> Self {
        PlantedConfig {
            num_layers: 2,
            nodes_per_layer: 60,
            communities: 3,
            c_in: 0.1,
            c_out: 0.01,
            cross_in: 0.1,
            cross_out: 0.0,
            max_size: 3,
            seed,
        }
    }

    pub fn cross_pairs(&self) -> Vec<(usize, usize)> {
        (1..self.num_layers).map(|b| (0, b)).collect()
    }

    /// Community of node `i`.
    pub fn community_of(&self, node: usize) -> usize {
        node * self.communities / self.nodes_per_layer
    }

    /// The generating parameters.
    pub fn state(&self) -> LatentState {
        let (n, k) = (self.nodes_per_layer, self.communities);
        let u = Array2::from_shape_fn((n, k), |(i, c)| if self.community_of(i) == c { 1.0 } else { 0.0 });
        let w = Array2::from_shape_fn((k, k), |(r, c)| if r == c { self.c_in } else { self.c_out });
        let wc = Array2::from_shape_fn((k, k), |(r, c)| if r == c { self.cross_in } else { self.cross_out });
        LatentState {
            u: vec![u; self.num_layers],
            w: vec![w; self.num_layers],
            w_cross: vec![wc; self.num_layers.saturating_sub(1)],
        }
    }
}

/// Samples a planted instance; every layer carries the planted labels as
/// ground truth.
pub fn planted(cfg: &PlantedConfig) -> Result<MultiHypergraph> {
    if cfg.num_layers == 0 || cfg.communities == 0 || cfg.nodes_per_layer < cfg.communities {
        return Err(Error::InvalidInput("planted config needs layers, communities and enough nodes".into()));
    }
    let mh = sample_from_model(&cfg.state(), &cfg.cross_pairs(), cfg.max_size, cfg.seed)?;
    let truth: BTreeMap<usize, usize> = (0..cfg.nodes_per_layer).map(|i| (i, cfg.community_of(i))).collect();
    let layers = mh
        .layers()
        .iter()
        .map(|l| l.clone().with_ground_truth(truth.clone()))
        .collect::<Result<Vec<_>>>()?;
    mh.with_layers(layers)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn source() -> HypergraphLayer {
        let edges = vec![
            Hyperedge::new(vec![0, 1], 1.0).unwrap(),
            Hyperedge::new(vec![0, 1, 2], 1.0).unwrap(),
            Hyperedge::new(vec![3, 4], 2.0).unwrap(),
            Hyperedge::new(vec![3, 4, 5], 1.0).unwrap(),
            Hyperedge::new(vec![2, 3], 1.0).unwrap(),
        ];
        let truth = [(0, 0), (1, 0), (2, 0), (3, 1), (4, 1), (5, 1)].into_iter().collect();
        HypergraphLayer::new(6, edges).unwrap().with_ground_truth(truth).unwrap()
    }

    #[test]
    fn full_views_equal_source() {
        let src = source();
        let mh = build_views(&src, &SynthConfig::star(2, 1.0, 10, 0.0, 4)).unwrap();
        assert_eq!(mh.layers()[0], src);
        assert_eq!(mh.layers()[1], src);
        let truth = src.ground_truth().unwrap();
        let set = &mh.inter_edges()[0];
        assert_eq!(set.len(), 10);
        for e in set.edges() {
            assert_eq!(truth[&e.i], truth[&e.j]);
            assert_eq!(e.weight, 1.0);
        }
    }

    #[test]
    fn noise_edges_are_counted_exactly() {
        let src = source();
        let mh = build_views(&src, &SynthConfig::star(2, 0.6, 8, 0.5, 1)).unwrap();
        let truth = src.ground_truth().unwrap();
        let set = &mh.inter_edges()[0];
        let cross = set.edges().iter().filter(|e| truth[&e.i] != truth[&e.j]).count();
        assert_eq!(cross, 4);
        assert_eq!(set.len(), 12);
        assert_eq!(mh.layers()[0].hyperedges().len(), 3);
    }

    #[test]
    fn budget_too_large() {
        let src = source();
        assert!(build_views(&src, &SynthConfig::star(2, 1.0, 19, 0.0, 1)).is_err());
        let unlabeled = HypergraphLayer::new(6, src.hyperedges().to_vec()).unwrap();
        assert!(build_views(&unlabeled, &SynthConfig::star(2, 1.0, 1, 0.0, 1)).is_err());
    }

    #[test]
    fn removal_ceiling_rule() {
        let l = HypergraphLayer::new(10, vec![Hyperedge::new(vec![0, 1], 1.0).unwrap()]).unwrap();
        let edges = (0..10).map(|i| InterEdge { i, j: i, weight: 1.0 }).collect();
        let mh = MultiHypergraph::new(vec![l.clone(), l], vec![InterEdgeSet::new(0, 1, edges).unwrap()]).unwrap();
        assert_eq!(remove_inter_edges(&mh, 0.5, 3).unwrap().inter_edges()[0].len(), 5);
        assert_eq!(remove_inter_edges(&mh, 0.0, 3).unwrap(), mh);
        assert!(remove_inter_edges(&mh, 1.0, 3).unwrap().inter_edges()[0].is_empty());
        assert_eq!(remove_inter_edges(&mh, 0.25, 3).unwrap().inter_edges()[0].len(), 7);
        assert!(remove_inter_edges(&mh, 1.5, 3).is_err());
    }

    #[test]
    fn zero_affinity_gives_empty_sample() {
        let state = LatentState {
            u: vec![Array2::ones((6, 2))],
            w: vec![Array2::zeros((2, 2))],
            w_cross: vec![],
        };
        let mh = sample_from_model(&state, &[], 3, 9).unwrap();
        assert!(mh.layers()[0].hyperedges().is_empty());
    }

    #[test]
    fn block_diagonal_needs_a_same_block_pair() {
        let u = Array2::from_shape_fn((12, 2), |(i, c)| if i % 2 == c { 1.0 } else { 0.0 });
        let state = LatentState {
            u: vec![u],
            w: vec![array![[3.0, 0.0], [0.0, 3.0]]],
            w_cross: vec![],
        };
        let mh = sample_from_model(&state, &[], 4, 5).unwrap();
        assert!(!mh.layers()[0].hyperedges().is_empty());
        // the rate sums over pairs, so one same-block pair suffices
        for e in mh.layers()[0].hyperedges() {
            let odd = e.nodes().iter().filter(|&&v| v % 2 == 1).count();
            let even = e.size() - odd;
            assert!(odd >= 2 || even >= 2, "{:?}", e.nodes());
        }
    }

    #[test]
    fn block_diagonal_pairs_never_mix() {
        let u = Array2::from_shape_fn((12, 2), |(i, c)| if i % 2 == c { 1.0 } else { 0.0 });
        let state = LatentState {
            u: vec![u],
            w: vec![array![[3.0, 0.0], [0.0, 3.0]]],
            w_cross: vec![],
        };
        let mh = sample_from_model(&state, &[], 2, 5).unwrap();
        assert!(!mh.layers()[0].hyperedges().is_empty());
        for e in mh.layers()[0].hyperedges() {
            assert_eq!(e.nodes()[0] % 2, e.nodes()[1] % 2);
        }
    }

    #[test]
    fn sampling_bounds() {
        let state = LatentState {
            u: vec![Array2::ones((400, 1))],
            w: vec![array![[1.0]]],
            w_cross: vec![],
        };
        assert!(sample_from_model(&state, &[], 4, 0).is_err());
        assert!(sample_from_model(&state, &[], 5, 0).is_err());
    }

    #[test]
    fn sampling_is_reproducible() {
        let cfg = PlantedConfig { nodes_per_layer: 18, ..PlantedConfig::strong_signal(3) };
        assert_eq!(planted(&cfg).unwrap(), planted(&cfg).unwrap());
        let other = PlantedConfig { seed: 4, ..cfg.clone() };
        assert_ne!(planted(&cfg).unwrap(), planted(&other).unwrap());
    }
}
