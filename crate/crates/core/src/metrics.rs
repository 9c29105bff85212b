//! Community-recovery and ranking metrics.

use std::collections::HashMap;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::hypergraph::dense_labels;

/// Row argmax of a membership matrix; ties go to the lowest community.
pub fn hard_labels(u: &Array2<f64>) -> Vec<usize> {
    u.rows()
        .into_iter()
        .map(|row| {
            let mut best = 0;
            for (k, &v) in row.iter().enumerate() {
                if v > row[best] {
                    best = k;
                }
            }
            best
        })
        .collect()
}

/// Predicted and true labels over the same nodes. Labels are opaque ids.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionPair {
    pub predicted: Vec<usize>,
    pub truth: Vec<usize>,
}

impl PartitionPair {
    pub fn new(predicted: Vec<usize>, truth: Vec<usize>) -> Result<Self> {
        if predicted.len() != truth.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} predicted labels vs {} true labels",
                predicted.len(),
                truth.len()
            )));
        }
        if predicted.is_empty() {
            return Err(Error::InvalidInput("partitions are empty".into()));
        }
        Ok(PartitionPair { predicted, truth })
    }

    /// Hard labels of `u` restricted to the nodes that have a true label.
    pub fn from_membership(u: &Array2<f64>, truth: &std::collections::BTreeMap<usize, usize>) -> Result<Self> {
        let labels = hard_labels(u);
        let mut predicted = Vec::with_capacity(truth.len());
        let mut t = Vec::with_capacity(truth.len());
        for (&node, &c) in truth {
            let p = *labels.get(node).ok_or_else(|| {
                Error::DimensionMismatch(format!("truth node {node} outside membership matrix"))
            })?;
            predicted.push(p);
            t.push(c);
        }
        PartitionPair::new(predicted, t)
    }
}

fn dense(labels: &[usize]) -> (Vec<usize>, usize) {
    let mut map = HashMap::new();
    let out = labels
        .iter()
        .map(|l| {
            let next = map.len();
            *map.entry(*l).or_insert(next)
        })
        .collect();
    (out, map.len())
}

fn entropy(counts: impl Iterator<Item = usize>, n: f64) -> f64 {
    -counts
        .filter(|&c| c > 0)
        .map(|c| {
            let p = c as f64 / n;
            p * p.ln()
        })
        .sum::<f64>()
}

/// Mutual information normalized by the arithmetic mean of the entropies.
pub fn nmi(pp: &PartitionPair) -> f64 {
    let (a, ka) = dense(&pp.predicted);
    let (b, kb) = dense(&pp.truth);
    let n = a.len() as f64;
    let mut joint = vec![0usize; ka * kb];
    let mut ca = vec![0usize; ka];
    let mut cb = vec![0usize; kb];
    for (&x, &y) in a.iter().zip(&b) {
        joint[x * kb + y] += 1;
        ca[x] += 1;
        cb[y] += 1;
    }
    let ha = entropy(ca.iter().copied(), n);
    let hb = entropy(cb.iter().copied(), n);
    if ha == 0.0 && hb == 0.0 {
        return 1.0;
    }
    let hab = entropy(joint.iter().copied(), n);
    let mi = (ha + hb - hab).max(0.0);
    (mi / (0.5 * (ha + hb))).clamp(0.0, 1.0)
}

fn groups(labels: &[usize]) -> Vec<Vec<usize>> {
    let (d, k) = dense(labels);
    let mut out = vec![Vec::new(); k];
    for (node, &c) in d.iter().enumerate() {
        out[c].push(node);
    }
    out
}

/// Size-weighted mean over `from` communities of the best F1 against any
/// community of `to`.
fn directed_f1(from: &[Vec<usize>], to_labels: &[usize], to_sizes: &[usize], n: usize) -> f64 {
    let mut acc = 0.0;
    for community in from {
        let mut overlap: HashMap<usize, usize> = HashMap::new();
        for &node in community {
            *overlap.entry(to_labels[node]).or_default() += 1;
        }
        let best = overlap
            .iter()
            .map(|(&t, &o)| 2.0 * o as f64 / (community.len() + to_sizes[t]) as f64)
            .fold(0.0, f64::max);
        acc += community.len() as f64 * best;
    }
    acc / n as f64
}

/// Best-match F1: every true community is matched to the predicted
/// community with the highest F1, averaged with weights by community size;
/// the same is done from the predicted side and both directions averaged.
pub fn community_f1(pp: &PartitionPair) -> f64 {
    let n = pp.truth.len();
    let (pd, _) = dense(&pp.predicted);
    let (td, _) = dense(&pp.truth);
    let pg = groups(&pp.predicted);
    let tg = groups(&pp.truth);
    let p_sizes: Vec<usize> = pg.iter().map(Vec::len).collect();
    let t_sizes: Vec<usize> = tg.iter().map(Vec::len).collect();
    let truth_side = directed_f1(&tg, &pd, &p_sizes, n);
    let pred_side = directed_f1(&pg, &td, &t_sizes, n);
    0.5 * (truth_side + pred_side)
}

/// Maximum-weight assignment of every row to a distinct column
/// (rows <= columns). Returns the column chosen for each row.
pub fn max_weight_assignment(weights: &Array2<f64>) -> Vec<usize> {
    let (n, m) = weights.dim();
    assert!(n <= m, "assignment needs rows <= columns");
    if n == 0 {
        return Vec::new();
    }
    // Shortest augmenting path Hungarian method on costs = -weights,
    // 1-based potentials as in the classic formulation.
    let cost = |i: usize, j: usize| -weights[[i - 1, j - 1]];
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; m + 1];
    let mut p = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=m {
                if !used[j] {
                    let cur = cost(i0, j) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0; n];
    for j in 1..=m {
        if p[j] != 0 {
            assignment[p[j] - 1] = j - 1;
        }
    }
    assignment
}

/// Cosine similarity between memberships and one-hot ground truth under
/// the best community relabeling.
///
/// With `normalize_rows` (the default protocol) the score is the mean
/// per-node cosine, zero rows contributing 0. Without it, the score is the
/// cosine between the whole matrices.
pub fn cosine_similarity(
    u: &Array2<f64>,
    truth: &std::collections::BTreeMap<usize, usize>,
    normalize_rows: bool,
) -> Result<f64> {
    let (nodes, labels) = dense_labels(truth);
    let t = labels.iter().max().map_or(0, |&m| m + 1);
    let k = u.ncols();
    if t > k {
        return Err(Error::InvalidInput(format!(
            "{t} true communities but only {k} membership columns"
        )));
    }
    if nodes.is_empty() {
        return Err(Error::InvalidInput("no labeled nodes".into()));
    }
    if let Some(&bad) = nodes.iter().find(|&&v| v >= u.nrows()) {
        return Err(Error::DimensionMismatch(format!("truth node {bad} outside membership matrix")));
    }
    let scale = |node: usize| -> f64 {
        let norm = u.row(node).dot(&u.row(node)).sqrt();
        if normalize_rows {
            if norm > 0.0 {
                1.0 / norm
            } else {
                0.0
            }
        } else {
            1.0
        }
    };
    let mut score = Array2::<f64>::zeros((t, k));
    for (&node, &lab) in nodes.iter().zip(&labels) {
        let f = scale(node);
        for c in 0..k {
            score[[lab, c]] += u[[node, c]] * f;
        }
    }
    let assignment = max_weight_assignment(&score);
    let matched: f64 = assignment.iter().enumerate().map(|(r, &c)| score[[r, c]]).sum();
    if normalize_rows {
        Ok(matched / nodes.len() as f64)
    } else {
        let fro: f64 = nodes.iter().map(|&v| u.row(v).dot(&u.row(v))).sum::<f64>().sqrt();
        if fro == 0.0 {
            return Ok(0.0);
        }
        Ok(matched / (fro * (nodes.len() as f64).sqrt()))
    }
}

/// Probability that a positive outscores a negative, ties counting half,
/// computed exactly over all pairs.
pub fn auc(pos_scores: &[f64], neg_scores: &[f64]) -> Result<f64> {
    if pos_scores.is_empty() || neg_scores.is_empty() {
        return Err(Error::InvalidInput("AUC needs at least one positive and one negative".into()));
    }
    if pos_scores.iter().chain(neg_scores).any(|s| s.is_nan()) {
        return Err(Error::InvalidInput("AUC scores contain NaN".into()));
    }
    let mut neg = neg_scores.to_vec();
    neg.sort_by(|a, b| a.partial_cmp(b).expect("no NaN"));
    // twice the number of wins plus ties, kept integral
    let mut doubled: u128 = 0;
    for &p in pos_scores {
        let below = neg.partition_point(|&x| x < p);
        let not_above = neg.partition_point(|&x| x <= p);
        doubled += 2 * below as u128 + (not_above - below) as u128;
    }
    let total = 2 * pos_scores.len() as u128 * neg_scores.len() as u128;
    Ok(doubled as f64 / total as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct MeanSd {
    pub mean: f64,
    pub sd: f64,
}

/// Mean and sample standard deviation (0 for a single value).
pub fn mean_sd(values: &[f64]) -> MeanSd {
    let n = values.len() as f64;
    if values.is_empty() {
        return MeanSd { mean: f64::NAN, sd: f64::NAN };
    }
    let mean = values.iter().sum::<f64>() / n;
    let sd = if values.len() > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    MeanSd { mean, sd }
}
