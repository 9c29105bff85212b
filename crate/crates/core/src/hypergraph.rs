//! Immutable multi-hypergraph data model.
//!
//! Node identity is local to each layer. Nodes of different layers are only
//! related through the inter-layer edge sets.

use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};

/// A weighted set of at least two distinct nodes of one layer.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyperedge {
    nodes: Vec<usize>,
    weight: f64,
}

impl Hyperedge {
    /// Builds a hyperedge from an arbitrary node order. Nodes are sorted;
    /// repeated nodes, sizes below two and negative weights are rejected.
    pub fn new(mut nodes: Vec<usize>, weight: f64) -> Result<Self> {
        nodes.sort_unstable();
        if nodes.windows(2).any(|p| p[0] == p[1]) {
            return Err(Error::InvalidHyperedge(format!(
                "repeated node in {nodes:?}"
            )));
        }
        if nodes.len() < 2 {
            return Err(Error::InvalidHyperedge(format!(
                "size {} < 2 ({nodes:?})",
                nodes.len()
            )));
        }
        if !(weight >= 0.0) || !weight.is_finite() {
            return Err(Error::InvalidHyperedge(format!(
                "weight {weight} is not a finite non-negative number"
            )));
        }
        Ok(Hyperedge { nodes, weight })
    }

    /// Sorted, strictly increasing node indices.
    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn size(&self) -> usize {
        self.nodes.len()
    }

    pub fn with_weight(&self, weight: f64) -> Result<Self> {
        Hyperedge::new(self.nodes.clone(), weight)
    }

    /// True when every node of `self` is also in `other`. Both are sorted.
    pub fn is_subset_of(&self, other: &[usize]) -> bool {
        is_sorted_subset(&self.nodes, other)
    }
}

pub(crate) fn is_sorted_subset(small: &[usize], big: &[usize]) -> bool {
    if small.len() > big.len() {
        return false;
    }
    let mut it = big.iter();
    'outer: for &x in small {
        for &y in it.by_ref() {
            if y == x {
                continue 'outer;
            }
            if y > x {
                return false;
            }
        }
        return false;
    }
    true
}

/// One hypergraph: `num_nodes` nodes and a canonical list of distinct
/// hyperedges, sorted lexicographically by node set.
#[derive(Debug, Clone, PartialEq)]
pub struct HypergraphLayer {
    num_nodes: usize,
    hyperedges: Vec<Hyperedge>,
    ground_truth: Option<BTreeMap<usize, usize>>,
}

impl HypergraphLayer {
    /// Duplicate node sets are merged by summing their weights.
    pub fn new(num_nodes: usize, hyperedges: Vec<Hyperedge>) -> Result<Self> {
        if num_nodes == 0 {
            return Err(Error::InvalidInput("layer must have at least one node".into()));
        }
        let mut merged: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
        for e in hyperedges {
            if let Some(&bad) = e.nodes.iter().find(|&&v| v >= num_nodes) {
                return Err(Error::InvalidHyperedge(format!(
                    "node {bad} out of range for layer with {num_nodes} nodes"
                )));
            }
            *merged.entry(e.nodes).or_insert(0.0) += e.weight;
        }
        let hyperedges = merged
            .into_iter()
            .map(|(nodes, weight)| Hyperedge { nodes, weight })
            .collect();
        Ok(HypergraphLayer {
            num_nodes,
            hyperedges,
            ground_truth: None,
        })
    }

    pub fn with_ground_truth(mut self, truth: BTreeMap<usize, usize>) -> Result<Self> {
        if let Some((&bad, _)) = truth.iter().find(|(&v, _)| v >= self.num_nodes) {
            return Err(Error::InvalidInput(format!(
                "ground-truth node {bad} out of range for layer with {} nodes",
                self.num_nodes
            )));
        }
        self.ground_truth = Some(truth);
        Ok(self)
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn hyperedges(&self) -> &[Hyperedge] {
        &self.hyperedges
    }

    pub fn ground_truth(&self) -> Option<&BTreeMap<usize, usize>> {
        self.ground_truth.as_ref()
    }

    pub fn max_size(&self) -> usize {
        self.hyperedges.iter().map(Hyperedge::size).max().unwrap_or(0)
    }

    /// Position of the hyperedge with exactly this (sorted) node set.
    pub fn find(&self, nodes: &[usize]) -> Option<usize> {
        self.hyperedges
            .binary_search_by(|e| e.nodes.as_slice().cmp(nodes))
            .ok()
    }

    pub fn contains(&self, nodes: &[usize]) -> bool {
        self.find(nodes).is_some()
    }

    /// A copy keeping only the hyperedges at the given positions.
    pub fn subset(&self, keep: &[usize]) -> Result<Self> {
        let edges = keep.iter().map(|&i| self.hyperedges[i].clone()).collect();
        let mut layer = HypergraphLayer::new(self.num_nodes, edges)?;
        layer.ground_truth = self.ground_truth.clone();
        Ok(layer)
    }
}

/// A weighted link between node `i` of one layer and node `j` of another.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterEdge {
    pub i: usize,
    pub j: usize,
    pub weight: f64,
}

/// Sparse inter-layer edges between `layer_a < layer_b`. Absent pairs have
/// weight zero; stored edges are sorted by `(i, j)` and unique.
#[derive(Debug, Clone, PartialEq)]
pub struct InterEdgeSet {
    layer_a: usize,
    layer_b: usize,
    edges: Vec<InterEdge>,
}

impl InterEdgeSet {
    /// Normalizes the layer order (swapping endpoints when needed), merges
    /// duplicate pairs by weight summation and drops zero-weight entries.
    pub fn new(layer_a: usize, layer_b: usize, edges: Vec<InterEdge>) -> Result<Self> {
        if layer_a == layer_b {
            return Err(Error::InvalidInput(format!(
                "inter-edge set connects layer {layer_a} to itself"
            )));
        }
        let swap = layer_a > layer_b;
        let mut merged: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for e in edges {
            if !(e.weight >= 0.0) || !e.weight.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "inter-edge ({}, {}) has invalid weight {}",
                    e.i, e.j, e.weight
                )));
            }
            let key = if swap { (e.j, e.i) } else { (e.i, e.j) };
            *merged.entry(key).or_insert(0.0) += e.weight;
        }
        let edges = merged
            .into_iter()
            .filter(|&(_, w)| w > 0.0)
            .map(|((i, j), weight)| InterEdge { i, j, weight })
            .collect();
        let (layer_a, layer_b) = if swap {
            (layer_b, layer_a)
        } else {
            (layer_a, layer_b)
        };
        Ok(InterEdgeSet {
            layer_a,
            layer_b,
            edges,
        })
    }

    pub fn layer_a(&self) -> usize {
        self.layer_a
    }

    pub fn layer_b(&self) -> usize {
        self.layer_b
    }

    pub fn edges(&self) -> &[InterEdge] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.edges
            .binary_search_by(|e| (e.i, e.j).cmp(&(i, j)))
            .is_ok()
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.weight).sum()
    }

    /// Same layer pair, different edge list.
    pub fn with_edges(&self, edges: Vec<InterEdge>) -> Result<Self> {
        InterEdgeSet::new(self.layer_a, self.layer_b, edges)
    }
}

/// Layers plus at most one inter-edge set per unordered layer pair.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiHypergraph {
    layers: Vec<HypergraphLayer>,
    inter_edges: Vec<InterEdgeSet>,
}

impl MultiHypergraph {
    /// Inter-edge sets referring to the same pair are merged; sets are
    /// ordered by `(layer_a, layer_b)`.
    pub fn new(layers: Vec<HypergraphLayer>, inter_edges: Vec<InterEdgeSet>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::InvalidInput("multi-hypergraph needs at least one layer".into()));
        }
        let mut by_pair: BTreeMap<(usize, usize), Vec<InterEdge>> = BTreeMap::new();
        for set in inter_edges {
            let (a, b) = (set.layer_a, set.layer_b);
            if b >= layers.len() {
                return Err(Error::InvalidInput(format!(
                    "inter-edge set references layer {b}, only {} layers",
                    layers.len()
                )));
            }
            for e in &set.edges {
                if e.i >= layers[a].num_nodes() || e.j >= layers[b].num_nodes() {
                    return Err(Error::InvalidInput(format!(
                        "inter-edge ({}, {}) out of range for layers {a}/{b}",
                        e.i, e.j
                    )));
                }
            }
            by_pair.entry((a, b)).or_default().extend(set.edges);
        }
        let inter_edges = by_pair
            .into_iter()
            .map(|((a, b), edges)| InterEdgeSet::new(a, b, edges))
            .collect::<Result<Vec<_>>>()?;
        Ok(MultiHypergraph {
            layers,
            inter_edges,
        })
    }

    pub fn single(layer: HypergraphLayer) -> Self {
        MultiHypergraph {
            layers: vec![layer],
            inter_edges: Vec::new(),
        }
    }

    pub fn layers(&self) -> &[HypergraphLayer] {
        &self.layers
    }

    pub fn inter_edges(&self) -> &[InterEdgeSet] {
        &self.inter_edges
    }

    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }

    /// Index of the inter-edge set for an unordered layer pair.
    pub fn inter_index(&self, a: usize, b: usize) -> Option<usize> {
        let key = (a.min(b), a.max(b));
        self.inter_edges
            .iter()
            .position(|s| (s.layer_a, s.layer_b) == key)
    }

    pub fn with_layers(&self, layers: Vec<HypergraphLayer>) -> Result<Self> {
        MultiHypergraph::new(layers, self.inter_edges.clone())
    }

    pub fn with_inter_edges(&self, inter_edges: Vec<InterEdgeSet>) -> Result<Self> {
        MultiHypergraph::new(self.layers.clone(), inter_edges)
    }
}

/// Dense relabeling of community ids in first-seen order over sorted nodes.
pub(crate) fn dense_labels(labels: &BTreeMap<usize, usize>) -> (Vec<usize>, Vec<usize>) {
    let mut map: HashMap<usize, usize> = HashMap::new();
    let mut nodes = Vec::with_capacity(labels.len());
    let mut dense = Vec::with_capacity(labels.len());
    for (&node, &lab) in labels {
        let next = map.len();
        let d = *map.entry(lab).or_insert(next);
        nodes.push(node);
        dense.push(d);
    }
    (nodes, dense)
}
