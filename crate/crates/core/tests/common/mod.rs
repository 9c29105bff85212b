#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use mhsbm::hypergraph::{Hyperedge, HypergraphLayer, InterEdge, InterEdgeSet, MultiHypergraph};
use mhsbm::inference::FitContext;
use mhsbm::internal_degree::InternalDegreeTable;
use mhsbm::likelihood::{layer_constants, LatentState};
use ndarray::Array2;
use rand::seq::index;
use rand::Rng;

/// Rate by the plain double sum over node pairs and community pairs.
pub fn naive_lambda(nodes: &[usize], theta: &[f64], u: &Array2<f64>, w: &Array2<f64>) -> f64 {
    let k = u.ncols();
    let mut total = 0.0;
    for a in 0..nodes.len() {
        for b in a + 1..nodes.len() {
            let (i, j) = (nodes[a], nodes[b]);
            let mut pair = 0.0;
            for p in 0..k {
                for q in 0..k {
                    pair += u[[i, p]] * w[[p, q]] * u[[j, q]];
                }
            }
            total += theta[a] * theta[b] * pair;
        }
    }
    total
}

/// Containment counts by scanning every observed hyperedge.
pub fn brute_eps(layer: &HypergraphLayer, nodes: &[usize]) -> Vec<u64> {
    let set: BTreeSet<usize> = nodes.iter().copied().collect();
    nodes
        .iter()
        .map(|&v| {
            layer
                .hyperedges()
                .iter()
                .filter(|e| e.nodes().contains(&v) && e.nodes().iter().all(|x| set.contains(x)))
                .count() as u64
        })
        .collect()
}

pub fn brute_theta(layer: &HypergraphLayer, nodes: &[usize]) -> Vec<f64> {
    let eps = brute_eps(layer, nodes);
    let total: u64 = eps.iter().sum();
    if total == 0 {
        return vec![1.0; nodes.len()];
    }
    eps.iter().map(|&c| nodes.len() as f64 * c as f64 / total as f64).collect()
}

/// Wins plus half ties over every positive/negative pair.
pub fn brute_auc(pos: &[f64], neg: &[f64]) -> f64 {
    let mut doubled = 0u64;
    for &p in pos {
        for &n in neg {
            doubled += if p > n { 2 } else if p == n { 1 } else { 0 };
        }
    }
    doubled as f64 / (2 * pos.len() * neg.len()) as f64
}

fn entropy(labels: &[usize]) -> f64 {
    let mut counts: BTreeMap<usize, f64> = BTreeMap::new();
    for &l in labels {
        *counts.entry(l).or_default() += 1.0;
    }
    let n = labels.len() as f64;
    -counts.values().map(|&c| (c / n) * (c / n).ln()).sum::<f64>()
}

pub fn oracle_nmi(x: &[usize], y: &[usize]) -> f64 {
    let n = x.len() as f64;
    let mut joint: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut px: BTreeMap<usize, f64> = BTreeMap::new();
    let mut py: BTreeMap<usize, f64> = BTreeMap::new();
    for (&a, &b) in x.iter().zip(y) {
        *joint.entry((a, b)).or_default() += 1.0 / n;
        *px.entry(a).or_default() += 1.0 / n;
        *py.entry(b).or_default() += 1.0 / n;
    }
    let mi: f64 = joint.iter().map(|(&(a, b), &p)| p * (p / (px[&a] * py[&b])).ln()).sum();
    let (hx, hy) = (entropy(x), entropy(y));
    if hx + hy == 0.0 {
        return 1.0;
    }
    mi / ((hx + hy) / 2.0)
}

fn groups(labels: &[usize]) -> Vec<BTreeSet<usize>> {
    let mut g: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate() {
        g.entry(l).or_default().insert(i);
    }
    g.into_values().collect()
}

fn pair_f1(a: &BTreeSet<usize>, b: &BTreeSet<usize>) -> f64 {
    2.0 * a.intersection(b).count() as f64 / (a.len() + b.len()) as f64
}

/// Size-weighted best-match F1 from `from` to `to`.
fn directed(from: &[BTreeSet<usize>], to: &[BTreeSet<usize>], n: usize) -> f64 {
    from.iter()
        .map(|a| a.len() as f64 * to.iter().map(|b| pair_f1(a, b)).fold(0.0, f64::max))
        .sum::<f64>()
        / n as f64
}

pub fn oracle_f1(predicted: &[usize], truth: &[usize]) -> f64 {
    let (p, t) = (groups(predicted), groups(truth));
    (directed(&t, &p, truth.len()) + directed(&p, &t, truth.len())) / 2.0
}

pub fn random_layer<R: Rng>(rng: &mut R, n: usize, m: usize, max_size: usize) -> HypergraphLayer {
    let edges = (0..m)
        .map(|_| {
            let size = rng.random_range(2..=max_size.min(n));
            let weight = rng.random_range(1..=3) as f64;
            Hyperedge::new(index::sample(rng, n, size).into_vec(), weight).unwrap()
        })
        .collect();
    HypergraphLayer::new(n, edges).unwrap()
}

pub fn random_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> Array2<f64> {
    Array2::from_shape_simple_fn((rows, cols), || rng.random_range(0.05..1.0))
}

/// Two random layers, optionally joined by random inter-edges.
pub fn random_pair<R: Rng>(rng: &mut R, n_max: usize, with_inter: bool) -> MultiHypergraph {
    let layers: Vec<HypergraphLayer> = (0..2)
        .map(|_| {
            let n = rng.random_range(8..=n_max);
            let m = rng.random_range(n..=3 * n);
            random_layer(rng, n, m, 4)
        })
        .collect();
    let inter = if with_inter {
        let count = rng.random_range(5..=40);
        let edges = (0..count)
            .map(|_| InterEdge {
                i: rng.random_range(0..layers[0].num_nodes()),
                j: rng.random_range(0..layers[1].num_nodes()),
                weight: rng.random_range(1..=2) as f64,
            })
            .collect();
        vec![InterEdgeSet::new(0, 1, edges).unwrap()]
    } else {
        vec![]
    };
    MultiHypergraph::new(layers, inter).unwrap()
}

/// Two layers made of two disjoint complete 3-uniform blocks of five nodes,
/// inter-edges joining every pair of matching blocks, and the state that
/// solves every update equation exactly.
pub fn fixed_point_instance() -> (MultiHypergraph, LatentState) {
    let block_layer = || {
        let mut edges = Vec::new();
        for base in [0, 5] {
            for a in 0..5 {
                for b in a + 1..5 {
                    for c in b + 1..5 {
                        edges.push(Hyperedge::new(vec![base + a, base + b, base + c], 1.0).unwrap());
                    }
                }
            }
        }
        HypergraphLayer::new(10, edges).unwrap()
    };
    let inter: Vec<InterEdge> = (0..10)
        .flat_map(|i| (0..10).filter(move |j| i / 5 == j / 5).map(move |j| InterEdge { i, j, weight: 1.0 }))
        .collect();
    let mh = MultiHypergraph::new(vec![block_layer(), block_layer()], vec![InterEdgeSet::new(0, 1, inter).unwrap()]).unwrap();
    let c = layer_constants(&mh.layers()[0], vec![], None).unwrap().c_l;
    let u = Array2::from_shape_fn((10, 2), |(i, k)| if i / 5 == k { 1.0 } else { 0.0 });
    let w = Array2::from_shape_fn((2, 2), |(r, q)| if r == q { 1.0 / c } else { 0.0 });
    let wc = Array2::eye(2);
    (mh, LatentState { u: vec![u.clone(), u], w: vec![w.clone(), w], w_cross: vec![wc] })
}

pub fn exact_context(mh: &MultiHypergraph) -> FitContext<'_> {
    let thetas = mh.layers().iter().map(InternalDegreeTable::for_layer).collect();
    let consts = mh.layers().iter().map(|l| layer_constants(l, vec![], None).unwrap()).collect();
    FitContext::with_constants(mh, thetas, consts)
}
