//! Poisson rate kernels, the negative-sample approximation constants and
//! the approximated log-likelihood that EM maximizes.
//!
//! Within a layer the rate of a hyperedge is
//! `lambda_e = sum_{i<j in e} theta_i theta_j u_i w u_j^T` and its expected
//! count is `lambda_e / mu_e` with `mu_e = |e|(|e|-1)/2`. Across layers the
//! rate of a pair is `lambda_ij = u_i W u_j^T`.

use ndarray::{Array1, Array2, ArrayView1, Axis};
use rand::seq::index;
use rand::Rng;

use crate::combinations::{binomial, Combinations};
use crate::error::{Error, Result};
use crate::hypergraph::{Hyperedge, HypergraphLayer, MultiHypergraph};
use crate::internal_degree::InternalDegreeTable;

/// Memberships, within-layer affinities and cross-layer affinities.
///
/// `w_cross[s]` belongs to `mh.inter_edges()[s]` and has shape
/// `K^a x K^b` for the set's `(layer_a, layer_b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentState {
    pub u: Vec<Array2<f64>>,
    pub w: Vec<Array2<f64>>,
    pub w_cross: Vec<Array2<f64>>,
}

impl LatentState {
    pub fn k_per_layer(&self) -> Vec<usize> {
        self.u.iter().map(|u| u.ncols()).collect()
    }

    /// Checks shapes against `mh`, non-negativity, finiteness and symmetry
    /// of every `w`.
    pub fn validate(&self, mh: &MultiHypergraph) -> Result<()> {
        let layers = mh.layers();
        if self.u.len() != layers.len() || self.w.len() != layers.len() {
            return Err(Error::DimensionMismatch(format!(
                "state has {} u / {} w matrices for {} layers",
                self.u.len(),
                self.w.len(),
                layers.len()
            )));
        }
        if self.w_cross.len() != mh.inter_edges().len() {
            return Err(Error::DimensionMismatch(format!(
                "state has {} cross affinities for {} inter-edge sets",
                self.w_cross.len(),
                mh.inter_edges().len()
            )));
        }
        for (l, (u, w)) in self.u.iter().zip(&self.w).enumerate() {
            let k = u.ncols();
            if u.nrows() != layers[l].num_nodes() || w.dim() != (k, k) {
                return Err(Error::DimensionMismatch(format!(
                    "layer {l}: u is {:?}, w is {:?}, layer has {} nodes",
                    u.dim(),
                    w.dim(),
                    layers[l].num_nodes()
                )));
            }
            for r in 0..k {
                for c in 0..r {
                    if (w[[r, c]] - w[[c, r]]).abs() > 1e-12 * w[[r, c]].abs().max(1.0) {
                        return Err(Error::InvalidInput(format!("layer {l}: w is not symmetric")));
                    }
                }
            }
        }
        for (s, set) in mh.inter_edges().iter().enumerate() {
            let want = (self.u[set.layer_a()].ncols(), self.u[set.layer_b()].ncols());
            if self.w_cross[s].dim() != want {
                return Err(Error::DimensionMismatch(format!(
                    "cross affinity {s} is {:?}, expected {want:?}",
                    self.w_cross[s].dim()
                )));
            }
        }
        let all = self.u.iter().chain(&self.w).chain(&self.w_cross);
        for m in all {
            if m.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
                return Err(Error::InvalidInput("state has a negative or non-finite entry".into()));
            }
        }
        Ok(())
    }
}

/// Number of node pairs in a hyperedge of the given size.
pub fn mu(size: usize) -> Result<f64> {
    if size < 2 {
        return Err(Error::InvalidHyperedge(format!("size {size} < 2")));
    }
    Ok((size * (size - 1)) as f64 / 2.0)
}

/// `x w y^T`.
pub(crate) fn bilinear(x: ArrayView1<f64>, w: &Array2<f64>, y: ArrayView1<f64>) -> f64 {
    let mut total = 0.0;
    for (k, &xk) in x.iter().enumerate() {
        if xk == 0.0 {
            continue;
        }
        let row = w.row(k);
        let mut inner = 0.0;
        for (&wv, &yv) in row.iter().zip(y.iter()) {
            inner += wv * yv;
        }
        total += xk * inner;
    }
    total
}

/// Hyperedge rate via the factored contraction
/// `1/2 [a w a^T - sum_i theta_i^2 u_i w u_i^T]` with `a = sum_i theta_i u_i`.
/// `theta` is aligned with `nodes`.
pub fn lambda_e(nodes: &[usize], theta: &[f64], u: &Array2<f64>, w: &Array2<f64>) -> f64 {
    debug_assert_eq!(nodes.len(), theta.len());
    let mut a = Array1::<f64>::zeros(u.ncols());
    let mut diag = 0.0;
    for (&v, &t) in nodes.iter().zip(theta) {
        let row = u.row(v);
        a.scaled_add(t, &row);
        diag += t * t * bilinear(row, w, row);
    }
    (0.5 * (bilinear(a.view(), w, a.view()) - diag)).max(0.0)
}

/// Inter-layer pair rate `u_i W u_j^T`.
pub fn lambda_ij(u_i: ArrayView1<f64>, u_j: ArrayView1<f64>, w_cross: &Array2<f64>) -> Result<f64> {
    if w_cross.dim() != (u_i.len(), u_j.len()) {
        return Err(Error::DimensionMismatch(format!(
            "u_i has {} entries, u_j has {}, cross affinity is {:?}",
            u_i.len(),
            u_j.len(),
            w_cross.dim()
        )));
    }
    Ok(bilinear(u_i, w_cross, u_j))
}

/// `sum_{i<j in V} u_i w u_j^T`, computed as `1/2 [s w s^T - sum_i u_i w u_i^T]`.
pub fn pairwise_penalty(u: &Array2<f64>, w: &Array2<f64>) -> f64 {
    let s = u.sum_axis(Axis(0));
    let diag: f64 = u.rows().into_iter().map(|r| bilinear(r, w, r)).sum();
    0.5 * (bilinear(s.view(), w, s.view()) - diag)
}

/// `sum_{i in V^a, j in V^b} u_i W u_j^T = s^a W (s^b)^T`.
pub fn cross_penalty(u_a: &Array2<f64>, w_cross: &Array2<f64>, u_b: &Array2<f64>) -> f64 {
    let s = u_a.sum_axis(Axis(0));
    let t = u_b.sum_axis(Axis(0));
    bilinear(s.view(), w_cross, t.view())
}

/// Above this many candidates per size, negatives are drawn by rejection
/// instead of enumerating the unobserved candidates.
const ENUMERATION_LIMIT: u128 = 200_000;
const REJECTION_ATTEMPTS_PER_DRAW: usize = 1_000;

/// One unobserved node set per observed hyperedge, with the same size,
/// aligned with `layer.hyperedges()`. Draws are uniform over the unobserved
/// candidates of each size and without replacement.
pub fn sample_negatives<R: Rng + ?Sized>(layer: &HypergraphLayer, rng: &mut R) -> Result<Vec<Hyperedge>> {
    let sizes: Vec<usize> = layer.hyperedges().iter().map(Hyperedge::size).collect();
    sample_unobserved(layer, &sizes, rng)
}

/// Distinct node sets absent from `layer`, one per entry of `sizes` and of
/// that size, uniform over the unobserved candidates of each size.
pub fn sample_unobserved<R: Rng + ?Sized>(layer: &HypergraphLayer, sizes: &[usize], rng: &mut R) -> Result<Vec<Hyperedge>> {
    let n = layer.num_nodes();
    let mut by_size: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for (idx, &size) in sizes.iter().enumerate() {
        by_size.entry(size).or_default().push(idx);
    }
    let mut observed: std::collections::BTreeMap<usize, u128> = Default::default();
    for e in layer.hyperedges() {
        *observed.entry(e.size()).or_default() += 1;
    }

    let mut out: Vec<Option<Hyperedge>> = vec![None; sizes.len()];
    for (&size, positions) in &by_size {
        let wanted = positions.len();
        let total = binomial(n, size);
        let available = total.saturating_sub(observed.get(&size).copied().unwrap_or(0));
        if available < wanted as u128 {
            return Err(Error::NegativeSpaceExhausted {
                size,
                reason: format!("{available} unobserved candidates for {wanted} negatives"),
            });
        }
        let drawn: Vec<Vec<usize>> = if total <= ENUMERATION_LIMIT {
            let pool: Vec<Vec<usize>> = Combinations::new(n, size).filter(|c| !layer.contains(c)).collect();
            index::sample(rng, pool.len(), wanted)
                .into_iter()
                .map(|i| pool[i].clone())
                .collect()
        } else {
            let mut seen = std::collections::HashSet::with_capacity(wanted);
            let mut drawn = Vec::with_capacity(wanted);
            let max_attempts = REJECTION_ATTEMPTS_PER_DRAW * wanted;
            let mut attempts = 0;
            while drawn.len() < wanted {
                attempts += 1;
                if attempts > max_attempts {
                    return Err(Error::NegativeSpaceExhausted {
                        size,
                        reason: format!("rejection sampling gave up after {max_attempts} attempts"),
                    });
                }
                let mut cand = index::sample(rng, n, size).into_vec();
                cand.sort_unstable();
                if layer.contains(&cand) || !seen.insert(cand.clone()) {
                    continue;
                }
                drawn.push(cand);
            }
            drawn
        };
        for (&pos, nodes) in positions.iter().zip(drawn) {
            out[pos] = Some(Hyperedge::new(nodes, 0.0)?);
        }
    }
    Ok(out.into_iter().map(|e| e.expect("every position filled")).collect())
}

/// Per-layer constants of the negative-sample approximation.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerConstants {
    pub negatives: Vec<Hyperedge>,
    /// Node pairs summed over observed hyperedges.
    pub q_pairs: u64,
    pub m_count: u64,
    /// Positive; enters the objective as `-c_l * sum_{i<j} u_i w u_j^T`.
    pub c_l: f64,
}

/// `|Q| = sum_e |e|(|e|-1)/2`, `M = |E+|` unless overridden, and
/// `C = M (1/|Q| + 2/(N(N-1)))`.
pub fn layer_constants(layer: &HypergraphLayer, negatives: Vec<Hyperedge>, m_override: Option<u64>) -> Result<LayerConstants> {
    let edges = layer.hyperedges();
    let q_pairs: u64 = edges.iter().map(|e| (e.size() * (e.size() - 1) / 2) as u64).sum();
    if q_pairs == 0 {
        return Err(Error::EmptyLayer(0));
    }
    let n = layer.num_nodes() as f64;
    if n < 2.0 {
        return Err(Error::InvalidInput("layer needs at least two nodes".into()));
    }
    let m_count = m_override.unwrap_or(edges.len() as u64);
    let c_l = m_count as f64 * (1.0 / q_pairs as f64 + 2.0 / (n * (n - 1.0)));
    Ok(LayerConstants {
        negatives,
        q_pairs,
        m_count,
        c_l,
    })
}

/// Approximated log-likelihood (equal to the Jensen surrogate at its
/// optimal variational distributions):
///
/// `sum_l [-C_l sum_{i<j} u_i w u_j^T + sum_e A_e ln lambda_e]
///  + sum_sets [-s^a W (s^b)^T + sum_(i,j) S_ij ln lambda_ij]`.
pub fn surrogate_objective(
    mh: &MultiHypergraph,
    thetas: &[InternalDegreeTable],
    state: &LatentState,
    consts: &[LayerConstants],
) -> Result<f64> {
    let mut total = 0.0;
    for (l, layer) in mh.layers().iter().enumerate() {
        let (u, w) = (&state.u[l], &state.w[l]);
        total -= consts[l].c_l * pairwise_penalty(u, w);
        for (idx, e) in layer.hyperedges().iter().enumerate() {
            if e.weight() == 0.0 {
                continue;
            }
            let lam = lambda_e(e.nodes(), thetas[l].get(idx), u, w);
            if lam <= 0.0 {
                return Err(Error::ZeroRate(format!("layer {l}, hyperedge {:?}", e.nodes())));
            }
            total += e.weight() * lam.ln();
        }
    }
    for (s, set) in mh.inter_edges().iter().enumerate() {
        let (ua, ub, wc) = (&state.u[set.layer_a()], &state.u[set.layer_b()], &state.w_cross[s]);
        total -= cross_penalty(ua, wc, ub);
        for e in set.edges() {
            let lam = bilinear(ua.row(e.i), wc, ub.row(e.j));
            if lam <= 0.0 {
                return Err(Error::ZeroRate(format!(
                    "inter-edge ({}, {}) between layers {} and {}",
                    e.i,
                    e.j,
                    set.layer_a(),
                    set.layer_b()
                )));
            }
            total += e.weight * lam.ln();
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeding::rng_for;
    use ndarray::array;

    fn layer(n: usize, edges: &[&[usize]]) -> HypergraphLayer {
        HypergraphLayer::new(
            n,
            edges.iter().map(|e| Hyperedge::new(e.to_vec(), 1.0).unwrap()).collect(),
        )
        .unwrap()
    }

    #[test]
    fn mu_values() {
        assert_eq!(mu(2).unwrap(), 1.0);
        assert_eq!(mu(3).unwrap(), 3.0);
        assert_eq!(mu(10).unwrap(), 45.0);
        assert!(mu(1).is_err());
    }

    #[test]
    fn lambda_e_examples() {
        let ones = Array2::ones((3, 1));
        assert_eq!(lambda_e(&[0, 1, 2], &[1.0; 3], &ones, &array![[1.0]]), 3.0);
        assert_eq!(lambda_e(&[0, 1, 2], &[1.0; 3], &ones, &array![[0.0]]), 0.0);
        let u = array![[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]];
        let w = array![[1.0, 2.0], [2.0, 3.0]];
        assert!((lambda_e(&[0, 1, 2], &[1.0; 3], &u, &w) - 10.0).abs() < 1e-12);
    }

    #[test]
    fn lambda_ij_examples() {
        let w = array![[0.0, 5.0], [0.0, 0.0]];
        assert_eq!(lambda_ij(array![1.0, 0.0].view(), array![0.0, 1.0].view(), &w).unwrap(), 5.0);
        let z = Array2::zeros((2, 2));
        assert_eq!(lambda_ij(array![1.0, 0.0].view(), array![0.0, 1.0].view(), &z).unwrap(), 0.0);
        let w = array![[1.0, 0.0], [0.0, 2.0]];
        assert_eq!(lambda_ij(array![1.0, 2.0].view(), array![3.0, 1.0].view(), &w).unwrap(), 7.0);
        assert!(lambda_ij(array![1.0].view(), array![3.0, 1.0].view(), &w).is_err());
    }

    #[test]
    fn negatives_small_space() {
        let l = layer(3, &[&[0, 1]]);
        for seed in 0..20 {
            let neg = sample_negatives(&l, &mut rng_for(seed, 0)).unwrap();
            assert_eq!(neg.len(), 1);
            assert!(neg[0].nodes() == [0, 2] || neg[0].nodes() == [1, 2]);
            assert_eq!(neg[0].weight(), 0.0);
        }
    }

    #[test]
    fn negatives_exhausted() {
        let l = layer(3, &[&[0, 1], &[0, 2], &[1, 2]]);
        let err = sample_negatives(&l, &mut rng_for(1, 0)).unwrap_err();
        assert!(matches!(err, Error::NegativeSpaceExhausted { size: 2, .. }));
    }

    #[test]
    fn negatives_match_sizes_and_avoid_positives() {
        let l = layer(40, &[&[0, 1], &[2, 3, 4], &[5, 6, 7, 8, 9, 10, 11], &[1, 2], &[0, 1, 2]]);
        let neg = sample_negatives(&l, &mut rng_for(3, 0)).unwrap();
        for (p, q) in l.hyperedges().iter().zip(&neg) {
            assert_eq!(p.size(), q.size());
            assert!(!l.contains(q.nodes()));
        }
        let again = sample_negatives(&l, &mut rng_for(3, 0)).unwrap();
        assert_eq!(neg, again);
    }

    #[test]
    fn constants_scalar_case() {
        let l = layer(3, &[&[0, 1]]);
        let c = layer_constants(&l, vec![], None).unwrap();
        assert_eq!(c.q_pairs, 1);
        assert_eq!(c.m_count, 1);
        assert!((c.c_l - 4.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn constants_full_hyperedge() {
        let n = 5;
        let l = layer(n, &[&[0, 1, 2, 3, 4]]);
        let c = layer_constants(&l, vec![], None).unwrap();
        let pairs = (n * (n - 1) / 2) as f64;
        assert_eq!(c.q_pairs, pairs as u64);
        assert!((c.c_l - 2.0 / pairs).abs() < 1e-15);
    }

    #[test]
    fn constants_ignore_weights() {
        let a = layer(6, &[&[0, 1], &[2, 3, 4]]);
        let doubled = HypergraphLayer::new(
            6,
            a.hyperedges().iter().map(|e| e.with_weight(2.0 * e.weight()).unwrap()).collect(),
        )
        .unwrap();
        let ca = layer_constants(&a, vec![], None).unwrap();
        let cb = layer_constants(&doubled, vec![], None).unwrap();
        assert_eq!(ca.c_l, cb.c_l);
        let overridden = layer_constants(&a, vec![], Some(4)).unwrap();
        assert!((overridden.c_l - 2.0 * ca.c_l).abs() < 1e-15);
    }

    #[test]
    fn penalties_match_direct_sums() {
        let u = array![[0.3, 1.0], [0.2, 0.5], [1.5, 0.1], [0.0, 0.7]];
        let w = array![[0.9, 0.4], [0.4, 0.2]];
        let mut direct = 0.0;
        for i in 0..4 {
            for j in i + 1..4 {
                direct += bilinear(u.row(i), &w, u.row(j));
            }
        }
        assert!((pairwise_penalty(&u, &w) - direct).abs() < 1e-12);

        let ub = array![[1.0, 0.0, 2.0], [0.5, 0.5, 0.5]];
        let wc = array![[1.0, 0.2, 0.0], [0.3, 0.0, 1.0]];
        let mut direct = 0.0;
        for i in 0..4 {
            for j in 0..2 {
                direct += bilinear(u.row(i), &wc, ub.row(j));
            }
        }
        assert!((cross_penalty(&u, &wc, &ub) - direct).abs() < 1e-12);
    }

    #[test]
    fn objective_scalar_case() {
        let l = layer(3, &[&[0, 1]]);
        let mh = MultiHypergraph::single(l.clone());
        let state = LatentState {
            u: vec![Array2::ones((3, 1))],
            w: vec![array![[1.0]]],
            w_cross: vec![],
        };
        let consts = vec![layer_constants(&l, vec![], None).unwrap()];
        let thetas = vec![InternalDegreeTable::uniform(&l)];
        let obj = surrogate_objective(&mh, &thetas, &state, &consts).unwrap();
        assert!((obj + 4.0).abs() < 1e-12);
    }

    #[test]
    fn objective_zero_rate_is_an_error() {
        let l = layer(3, &[&[0, 1]]);
        let mh = MultiHypergraph::single(l.clone());
        let state = LatentState {
            u: vec![Array2::zeros((3, 1))],
            w: vec![array![[1.0]]],
            w_cross: vec![],
        };
        let consts = vec![layer_constants(&l, vec![], None).unwrap()];
        let thetas = vec![InternalDegreeTable::uniform(&l)];
        assert!(matches!(
            surrogate_objective(&mh, &thetas, &state, &consts),
            Err(Error::ZeroRate(_))
        ));
    }
}
