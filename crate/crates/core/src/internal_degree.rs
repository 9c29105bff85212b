//! Sub-hyperedge containment counts, hyperedge internal degrees and the
//! per-hyperedge information entropy built on the same counts.
//!
//! For a node set `e`, `eps[i]` is the number of observed hyperedges that
//! contain node `i` and are subsets of `e` (including `e` itself when it is
//! observed). The internal degree is `theta[i] = |e| * eps[i] / sum(eps)`,
//! falling back to 1 for every node when no sub-hyperedge exists.

use crate::error::{Error, Result};
use crate::hypergraph::{is_sorted_subset, HypergraphLayer};

/// Inverted index node -> incident hyperedges, each list sorted by hyperedge
/// size so containment queries can stop at the query size.
#[derive(Debug, Clone)]
pub struct ContainmentIndex<'a> {
    layer: &'a HypergraphLayer,
    incident: Vec<Vec<usize>>,
}

impl<'a> ContainmentIndex<'a> {
    pub fn new(layer: &'a HypergraphLayer) -> Self {
        let mut incident = vec![Vec::new(); layer.num_nodes()];
        for (idx, e) in layer.hyperedges().iter().enumerate() {
            for &v in e.nodes() {
                incident[v].push(idx);
            }
        }
        let edges = layer.hyperedges();
        for list in &mut incident {
            list.sort_by_key(|&idx| (edges[idx].size(), idx));
        }
        ContainmentIndex { layer, incident }
    }

    pub fn layer(&self) -> &HypergraphLayer {
        self.layer
    }

    /// Containment count for every node of the sorted node set `nodes`.
    /// Nodes outside the layer get a count of zero.
    pub fn sub_hyperedge_counts(&self, nodes: &[usize]) -> Vec<u64> {
        let edges = self.layer.hyperedges();
        nodes
            .iter()
            .map(|&v| {
                let Some(list) = self.incident.get(v) else {
                    return 0;
                };
                list.iter()
                    .map(|&idx| edges[idx].nodes())
                    .take_while(|sub| sub.len() <= nodes.len())
                    .filter(|sub| is_sorted_subset(sub, nodes))
                    .count() as u64
            })
            .collect()
    }

    /// Internal degrees for the node set, aligned with `nodes`.
    pub fn theta(&self, nodes: &[usize]) -> Vec<f64> {
        theta_from_counts(&self.sub_hyperedge_counts(nodes))
    }

    /// Internal-degree table for every observed hyperedge of the layer.
    pub fn table(&self) -> InternalDegreeTable {
        InternalDegreeTable {
            theta: self
                .layer
                .hyperedges()
                .iter()
                .map(|e| self.theta(e.nodes()))
                .collect(),
        }
    }
}

pub fn theta_from_counts(eps: &[u64]) -> Vec<f64> {
    let total: u64 = eps.iter().sum();
    if total == 0 {
        return vec![1.0; eps.len()];
    }
    let n = eps.len() as f64;
    eps.iter().map(|&c| n * c as f64 / total as f64).collect()
}

/// Containment counts of `nodes` (sorted) against the observed hyperedges.
pub fn count_sub_hyperedges(layer: &HypergraphLayer, nodes: &[usize]) -> Vec<u64> {
    ContainmentIndex::new(layer).sub_hyperedge_counts(nodes)
}

pub fn compute_theta(layer: &HypergraphLayer, nodes: &[usize]) -> Vec<f64> {
    ContainmentIndex::new(layer).theta(nodes)
}

/// Internal degrees of every observed hyperedge of one layer, indexed like
/// `layer.hyperedges()`, each row aligned with the hyperedge's node list.
#[derive(Debug, Clone, PartialEq)]
pub struct InternalDegreeTable {
    theta: Vec<Vec<f64>>,
}

impl InternalDegreeTable {
    pub fn for_layer(layer: &HypergraphLayer) -> Self {
        ContainmentIndex::new(layer).table()
    }

    /// Every hyperedge gets theta = 1 for all of its nodes.
    pub fn uniform(layer: &HypergraphLayer) -> Self {
        InternalDegreeTable {
            theta: layer.hyperedges().iter().map(|e| vec![1.0; e.size()]).collect(),
        }
    }

    pub fn get(&self, edge: usize) -> &[f64] {
        &self.theta[edge]
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EntropyBase {
    /// Natural-log entropy divided by `ln |e|`, in [0, 1].
    #[default]
    Normalized,
    Nats,
    Bits,
}

impl std::str::FromStr for EntropyBase {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "normalized" => Ok(EntropyBase::Normalized),
            "nats" => Ok(EntropyBase::Nats),
            "bits" => Ok(EntropyBase::Bits),
            other => Err(format!("unknown entropy base `{other}` (normalized|nats|bits)")),
        }
    }
}

pub fn entropy_from_counts(eps: &[u64], base: EntropyBase) -> Result<f64> {
    let total: u64 = eps.iter().sum();
    if total == 0 {
        return Err(Error::NoSubHyperedges);
    }
    let nats: f64 = -eps
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / total as f64;
            p * p.ln()
        })
        .sum::<f64>();
    let nats = nats.max(0.0);
    Ok(match base {
        EntropyBase::Nats => nats,
        EntropyBase::Bits => nats / std::f64::consts::LN_2,
        EntropyBase::Normalized => nats / (eps.len() as f64).ln(),
    })
}

pub fn hyperedge_entropy(layer: &HypergraphLayer, nodes: &[usize], base: EntropyBase) -> Result<f64> {
    entropy_from_counts(&count_sub_hyperedges(layer, nodes), base)
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct EntropyReport {
    pub base: String,
    pub threshold: f64,
    /// Observed hyperedges of size >= 3 that were scored.
    pub evaluated: usize,
    pub below_threshold: usize,
    pub fraction_below: f64,
    /// `(bin_lower, bin_upper, count)`.
    pub histogram: Vec<(f64, f64, usize)>,
    pub size2_hyperedges: usize,
    pub size2_contained: usize,
    /// Fraction of size-2 hyperedges that sit inside some larger observed
    /// hyperedge; `None` when the layer has no size-2 hyperedges.
    pub size2_containment_probability: Option<f64>,
}

/// Entropy summary over observed hyperedges of size >= 3 plus the
/// containment rate of size-2 hyperedges inside larger ones.
pub fn entropy_report(layer: &HypergraphLayer, threshold: f64, base: EntropyBase, bins: usize) -> EntropyReport {
    let index = ContainmentIndex::new(layer);
    let entropies: Vec<f64> = layer
        .hyperedges()
        .iter()
        .filter(|e| e.size() >= 3)
        .filter_map(|e| entropy_from_counts(&index.sub_hyperedge_counts(e.nodes()), base).ok())
        .collect();

    let bins = bins.max(1);
    let upper = match base {
        EntropyBase::Normalized => 1.0,
        _ => entropies.iter().copied().fold(0.0_f64, f64::max).max(f64::MIN_POSITIVE),
    };
    let width = upper / bins as f64;
    let mut counts = vec![0usize; bins];
    for &h in &entropies {
        let b = ((h / width) as usize).min(bins - 1);
        counts[b] += 1;
    }
    let histogram = counts
        .into_iter()
        .enumerate()
        .map(|(b, c)| (b as f64 * width, (b + 1) as f64 * width, c))
        .collect();

    let below = entropies.iter().filter(|&&h| h < threshold).count();

    let edges = layer.hyperedges();
    let mut size2 = 0;
    let mut contained = 0;
    for e in edges.iter().filter(|e| e.size() == 2) {
        size2 += 1;
        let (a, b) = (e.nodes()[0], e.nodes()[1]);
        let inside = index.incident[a]
            .iter()
            .map(|&idx| edges[idx].nodes())
            .any(|big| big.len() > 2 && big.binary_search(&b).is_ok());
        if inside {
            contained += 1;
        }
    }

    EntropyReport {
        base: format!("{base:?}").to_lowercase(),
        threshold,
        evaluated: entropies.len(),
        below_threshold: below,
        fraction_below: if entropies.is_empty() {
            0.0
        } else {
            below as f64 / entropies.len() as f64
        },
        histogram,
        size2_hyperedges: size2,
        size2_contained: contained,
        size2_containment_probability: (size2 > 0).then(|| contained as f64 / size2 as f64),
    }
}
