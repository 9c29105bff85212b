//! EM inference: initialization, E-step marginals, block updates of
//! `u`, `w` and the cross-layer affinities, and multi-restart fitting.
//!
//! A sweep updates every layer's memberships, then every `w`, then every
//! cross-layer affinity, recomputing the E-step before each family. Each
//! block update is the exact maximizer of the Jensen bound with the other
//! blocks held fixed, so the approximated log-likelihood never decreases.
//! Memberships are updated node by node with running column sums.

use ndarray::{Array1, Array2, ArrayView1, Axis};
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hypergraph::MultiHypergraph;
use crate::internal_degree::InternalDegreeTable;
use crate::likelihood::{layer_constants, sample_negatives, surrogate_objective, LatentState, LayerConstants};
use crate::seeding::{derive_seed, rng_for};

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct InferenceConfig {
    pub k_per_layer: Vec<usize>,
    pub restarts: usize,
    pub max_iters: usize,
    pub tol: f64,
    pub check_every: usize,
    /// Start every `w` diagonal (off-diagonal entries exactly zero).
    pub assortative: bool,
    pub seed: u64,
    pub m_override: Option<u64>,
}

impl InferenceConfig {
    pub fn new(k_per_layer: Vec<usize>) -> Self {
        InferenceConfig {
            k_per_layer,
            restarts: 10,
            max_iters: 500,
            tol: 1e-7,
            check_every: 5,
            assortative: false,
            seed: 0,
            m_override: None,
        }
    }

    pub fn validate(&self, mh: &MultiHypergraph) -> Result<()> {
        if self.k_per_layer.len() != mh.num_layers() {
            return Err(Error::InvalidInput(format!(
                "{} community counts for {} layers",
                self.k_per_layer.len(),
                mh.num_layers()
            )));
        }
        if self.k_per_layer.contains(&0) {
            return Err(Error::InvalidInput("community counts must be positive".into()));
        }
        if self.restarts == 0 {
            return Err(Error::InvalidInput("restarts must be at least 1".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidInput("tol must be positive".into()));
        }
        if self.check_every == 0 {
            return Err(Error::InvalidInput("check_every must be at least 1".into()));
        }
        Ok(())
    }

    /// Generator seed of one restart.
    pub fn restart_seed(&self, restart: usize) -> u64 {
        self.seed.wrapping_add(restart as u64)
    }
}

/// Draw in (0.05, 1].
fn init_draw<R: Rng>(rng: &mut R) -> f64 {
    1.0 - 0.95 * rng.random::<f64>()
}

const CROSS_STREAM_BASE: u64 = 1 << 32;

/// Random starting point. Layer `l` draws from stream `l` of the restart
/// seed and inter-edge set `s` from its own stream, so layers are seeded
/// independently of each other.
pub fn initialize(mh: &MultiHypergraph, cfg: &InferenceConfig, restart_seed: u64) -> LatentState {
    let mut u = Vec::with_capacity(mh.num_layers());
    let mut w = Vec::with_capacity(mh.num_layers());
    for (l, layer) in mh.layers().iter().enumerate() {
        let k = cfg.k_per_layer[l];
        let mut rng = rng_for(restart_seed, l as u64);
        u.push(Array2::from_shape_simple_fn((layer.num_nodes(), k), || init_draw(&mut rng)));
        let mut wl = Array2::zeros((k, k));
        for r in 0..k {
            wl[[r, r]] = init_draw(&mut rng);
            for c in r + 1..k {
                let v = if cfg.assortative { 0.0 } else { init_draw(&mut rng) };
                wl[[r, c]] = v;
                wl[[c, r]] = v;
            }
        }
        w.push(wl);
    }
    let w_cross = mh
        .inter_edges()
        .iter()
        .enumerate()
        .map(|(s, set)| {
            let mut rng = rng_for(restart_seed, CROSS_STREAM_BASE + s as u64);
            let shape = (cfg.k_per_layer[set.layer_a()], cfg.k_per_layer[set.layer_b()]);
            Array2::from_shape_simple_fn(shape, || init_draw(&mut rng))
        })
        .collect();
    LatentState { u, w, w_cross }
}

/// Variational marginals of one hyperedge.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperedgeMarginals {
    /// `|e| x K`: mass of pair terms in which node `i` carries community
    /// `k`, both orientations counted. Sums to 2.
    pub node: Array2<f64>,
    /// `K x K` symmetric community-pair mass. Sums to 1.
    pub pair: Array2<f64>,
    pub lambda: f64,
}

pub fn e_step_hyperedge(nodes: &[usize], theta: &[f64], u: &Array2<f64>, w: &Array2<f64>) -> Result<HyperedgeMarginals> {
    let k = u.ncols();
    let mut a = Array1::<f64>::zeros(k);
    for (&v, &t) in nodes.iter().zip(theta) {
        a.scaled_add(t, &u.row(v));
    }
    let mut node = Array2::<f64>::zeros((nodes.len(), k));
    let mut pair = Array2::<f64>::zeros((k, k));
    for (r, (&v, &t)) in nodes.iter().zip(theta).enumerate() {
        let ui = u.row(v);
        // partners = a - theta_i u_i, the weighted membership of the others
        let partners = &a - &(&ui * t);
        let wp = w.dot(&partners);
        for c in 0..k {
            node[[r, c]] = t * ui[c] * wp[c];
        }
        for c in 0..k {
            let x = t * ui[c];
            if x == 0.0 {
                continue;
            }
            for q in 0..k {
                pair[[c, q]] += x * partners[q];
            }
        }
    }
    let twice_lambda = node.sum();
    if !(twice_lambda > 0.0) {
        return Err(Error::ZeroRate(format!("hyperedge {nodes:?}")));
    }
    node /= twice_lambda / 2.0;
    // pair[c, q] now holds sum_{i != j} theta_i theta_j u_ic u_jq
    pair.zip_mut_with(w, |p, &wv| *p *= wv);
    pair /= twice_lambda;
    Ok(HyperedgeMarginals {
        node,
        pair,
        lambda: twice_lambda / 2.0,
    })
}

/// `rho_kc = u_ik W_kc u_jc / lambda_ij`.
pub fn e_step_pair(u_i: ArrayView1<f64>, u_j: ArrayView1<f64>, w_cross: &Array2<f64>) -> Result<Array2<f64>> {
    if w_cross.dim() != (u_i.len(), u_j.len()) {
        return Err(Error::DimensionMismatch(format!(
            "u_i has {} entries, u_j has {}, cross affinity is {:?}",
            u_i.len(),
            u_j.len(),
            w_cross.dim()
        )));
    }
    let mut rho = Array2::from_shape_fn(w_cross.dim(), |(k, c)| u_i[k] * w_cross[[k, c]] * u_j[c]);
    let lambda = rho.sum();
    if !(lambda > 0.0) {
        return Err(Error::ZeroRate("inter-layer pair".into()));
    }
    rho /= lambda;
    Ok(rho)
}

/// Data and constants shared by every restart of one fit.
#[derive(Debug, Clone)]
pub struct FitContext<'a> {
    pub mh: &'a MultiHypergraph,
    pub thetas: Vec<InternalDegreeTable>,
    pub consts: Vec<LayerConstants>,
}

impl<'a> FitContext<'a> {
    /// Internal degrees and layer constants; negatives for layer `l` come
    /// from stream `l` of a seed derived from `cfg.seed`.
    pub fn new(mh: &'a MultiHypergraph, cfg: &InferenceConfig) -> Result<Self> {
        cfg.validate(mh)?;
        let neg_seed = derive_seed(cfg.seed, 0x6e65_6773);
        let mut thetas = Vec::with_capacity(mh.num_layers());
        let mut consts = Vec::with_capacity(mh.num_layers());
        for (l, layer) in mh.layers().iter().enumerate() {
            if layer.hyperedges().is_empty() {
                return Err(Error::EmptyLayer(l));
            }
            thetas.push(InternalDegreeTable::for_layer(layer));
            let negatives = sample_negatives(layer, &mut rng_for(neg_seed, l as u64))?;
            let c = layer_constants(layer, negatives, cfg.m_override).map_err(|e| match e {
                Error::EmptyLayer(_) => Error::EmptyLayer(l),
                other => other,
            })?;
            consts.push(c);
        }
        Ok(FitContext { mh, thetas, consts })
    }

    /// Context with caller-supplied constants (no negative sampling).
    pub fn with_constants(mh: &'a MultiHypergraph, thetas: Vec<InternalDegreeTable>, consts: Vec<LayerConstants>) -> Self {
        FitContext { mh, thetas, consts }
    }

    pub fn objective(&self, state: &LatentState) -> Result<f64> {
        surrogate_objective(self.mh, &self.thetas, state, &self.consts)
    }
}

/// E-step statistics for layer `l`: `sum_e A_e p_ik^(e)` (N x K) and
/// `sum_e A_e p_kq^(e)` (K x K).
pub fn layer_expectations(ctx: &FitContext, state: &LatentState, l: usize) -> Result<(Array2<f64>, Array2<f64>)> {
    let layer = &ctx.mh.layers()[l];
    let (u, w) = (&state.u[l], &state.w[l]);
    let k = u.ncols();
    let mut node_stats = Array2::<f64>::zeros((layer.num_nodes(), k));
    let mut pair_stats = Array2::<f64>::zeros((k, k));
    let mut scratch = Scratch::new(k, layer.max_size());
    for (idx, e) in layer.hyperedges().iter().enumerate() {
        let a = e.weight();
        if a == 0.0 {
            continue;
        }
        let twice_lambda = scratch.fill(e.nodes(), ctx.thetas[l].get(idx), u, w);
        if !(twice_lambda > 0.0) {
            return Err(Error::ZeroRate(format!("layer {l}, hyperedge {:?}", e.nodes())));
        }
        let scale = 2.0 * a / twice_lambda;
        for (r, &v) in e.nodes().iter().enumerate() {
            let mut row = node_stats.row_mut(v);
            for c in 0..k {
                row[c] += scale * scratch.node[r * k + c];
            }
        }
        let scale = a / twice_lambda;
        for ((c, q), p) in pair_stats.indexed_iter_mut() {
            *p += scale * w[[c, q]] * scratch.pair[c * k + q];
        }
    }
    Ok((node_stats, pair_stats))
}

/// Reusable buffers for the per-hyperedge E-step.
struct Scratch {
    k: usize,
    a: Vec<f64>,
    partners: Vec<f64>,
    /// `|e| x K` unnormalized node terms.
    node: Vec<f64>,
    /// `K x K` sums `sum_{i != j} theta_i theta_j u_ic u_jq`.
    pair: Vec<f64>,
}

impl Scratch {
    fn new(k: usize, max_size: usize) -> Self {
        Scratch {
            k,
            a: vec![0.0; k],
            partners: vec![0.0; k],
            node: vec![0.0; max_size * k],
            pair: vec![0.0; k * k],
        }
    }

    /// Fills the unnormalized marginals of one hyperedge and returns
    /// `2 lambda_e`.
    fn fill(&mut self, nodes: &[usize], theta: &[f64], u: &Array2<f64>, w: &Array2<f64>) -> f64 {
        let k = self.k;
        if self.node.len() < nodes.len() * k {
            self.node.resize(nodes.len() * k, 0.0);
        }
        self.a.iter_mut().for_each(|x| *x = 0.0);
        self.pair.iter_mut().for_each(|x| *x = 0.0);
        for (&v, &t) in nodes.iter().zip(theta) {
            for (ac, &uv) in self.a.iter_mut().zip(u.row(v).iter()) {
                *ac += t * uv;
            }
        }
        let mut twice_lambda = 0.0;
        for (r, (&v, &t)) in nodes.iter().zip(theta).enumerate() {
            let ui = u.row(v);
            for c in 0..k {
                self.partners[c] = self.a[c] - t * ui[c];
            }
            for c in 0..k {
                let x = t * ui[c];
                let out = &mut self.node[r * k + c];
                if x == 0.0 {
                    *out = 0.0;
                    continue;
                }
                let mut wp = 0.0;
                for q in 0..k {
                    wp += w[[c, q]] * self.partners[q];
                    self.pair[c * k + q] += x * self.partners[q];
                }
                *out = x * wp;
                twice_lambda += *out;
            }
        }
        twice_lambda
    }
}

/// E-step statistics for inter-edge set `s`: contributions to the
/// membership numerators of both layers and `sum S_ij rho_ij` (K^a x K^b).
pub struct CrossExpectations {
    pub layer_a: Array2<f64>,
    pub layer_b: Array2<f64>,
    pub affinity: Array2<f64>,
}

pub fn cross_expectations(ctx: &FitContext, state: &LatentState, s: usize) -> Result<CrossExpectations> {
    let set = &ctx.mh.inter_edges()[s];
    let (ua, ub, wc) = (&state.u[set.layer_a()], &state.u[set.layer_b()], &state.w_cross[s]);
    let mut out = CrossExpectations {
        layer_a: Array2::zeros(ua.dim()),
        layer_b: Array2::zeros(ub.dim()),
        affinity: Array2::zeros(wc.dim()),
    };
    let (ka, kb) = wc.dim();
    let mut rho = vec![0.0; ka * kb];
    for e in set.edges() {
        let (ui, uj) = (ua.row(e.i), ub.row(e.j));
        let mut lambda = 0.0;
        for k in 0..ka {
            for c in 0..kb {
                let v = ui[k] * wc[[k, c]] * uj[c];
                rho[k * kb + c] = v;
                lambda += v;
            }
        }
        if !(lambda > 0.0) {
            return Err(Error::ZeroRate(format!(
                "inter-edge ({}, {}) between layers {} and {}",
                e.i,
                e.j,
                set.layer_a(),
                set.layer_b()
            )));
        }
        let scale = e.weight / lambda;
        for k in 0..ka {
            for c in 0..kb {
                let v = scale * rho[k * kb + c];
                out.layer_a[[e.i, k]] += v;
                out.layer_b[[e.j, c]] += v;
                out.affinity[[k, c]] += v;
            }
        }
    }
    Ok(out)
}

/// Numerators of the membership update for every layer.
pub fn membership_numerators(ctx: &FitContext, state: &LatentState) -> Result<Vec<Array2<f64>>> {
    let mut numer = (0..ctx.mh.num_layers())
        .map(|l| layer_expectations(ctx, state, l).map(|(n, _)| n))
        .collect::<Result<Vec<_>>>()?;
    for (s, set) in ctx.mh.inter_edges().iter().enumerate() {
        let cx = cross_expectations(ctx, state, s)?;
        numer[set.layer_a()] += &cx.layer_a;
        numer[set.layer_b()] += &cx.layer_b;
    }
    Ok(numer)
}

fn ratio(numer: f64, denom: f64, what: impl FnOnce() -> String) -> Result<f64> {
    if numer == 0.0 {
        return Ok(0.0);
    }
    let v = numer / denom;
    if !(denom > 0.0) || !v.is_finite() {
        return Err(Error::NonFiniteUpdate(what()));
    }
    Ok(v)
}

/// Membership update of layer `l` given its E-step numerators:
/// `u_ik = numer_ik / (C sum_q w_kq (s_q - u_iq) + sum_sets (W t)_k)`,
/// visiting nodes in index order with running column sums `s`.
pub fn update_u(ctx: &FitContext, state: &LatentState, l: usize, numer: &Array2<f64>) -> Result<Array2<f64>> {
    let mut u = state.u[l].clone();
    let w = &state.w[l];
    let c_l = ctx.consts[l].c_l;
    let k = u.ncols();

    let mut cross = Array1::<f64>::zeros(k);
    for (s, set) in ctx.mh.inter_edges().iter().enumerate() {
        let wc = &state.w_cross[s];
        if set.layer_a() == l {
            cross += &wc.dot(&state.u[set.layer_b()].sum_axis(Axis(0)));
        } else if set.layer_b() == l {
            cross += &wc.t().dot(&state.u[set.layer_a()].sum_axis(Axis(0)));
        }
    }

    let mut s = u.sum_axis(Axis(0));
    for i in 0..u.nrows() {
        s -= &u.row(i);
        let others = w.dot(&s);
        for c in 0..k {
            let denom = c_l * others[c] + cross[c];
            u[[i, c]] = ratio(numer[[i, c]], denom, || format!("u[{l}][{i}, {c}]"))?;
        }
        s += &u.row(i);
    }
    Ok(u)
}

/// `w_kq = sum_e A_e p_kq^(e) / (C sum_{i<j} (u_ik u_jq + u_iq u_jk) / 2)`.
pub fn update_w(ctx: &FitContext, state: &LatentState, l: usize, pair_stats: &Array2<f64>) -> Result<Array2<f64>> {
    let u = &state.u[l];
    let c_l = ctx.consts[l].c_l;
    let s = u.sum_axis(Axis(0));
    let gram = u.t().dot(u);
    let k = u.ncols();
    let mut w = Array2::<f64>::zeros((k, k));
    for r in 0..k {
        for c in r..k {
            let numer = 0.5 * (pair_stats[[r, c]] + pair_stats[[c, r]]);
            let denom = 0.5 * c_l * (s[r] * s[c] - gram[[r, c]]);
            let v = ratio(numer, denom, || format!("w[{l}][{r}, {c}]"))?;
            w[[r, c]] = v;
            w[[c, r]] = v;
        }
    }
    Ok(w)
}

/// `W_kc = sum S_ij rho_ijkc / (s^a_k t^b_c)`.
pub fn update_w_cross(ctx: &FitContext, state: &LatentState, s: usize, affinity_stats: &Array2<f64>) -> Result<Array2<f64>> {
    let set = &ctx.mh.inter_edges()[s];
    let sa = state.u[set.layer_a()].sum_axis(Axis(0));
    let tb = state.u[set.layer_b()].sum_axis(Axis(0));
    let mut out = Array2::zeros(affinity_stats.dim());
    for ((k, c), v) in out.indexed_iter_mut() {
        *v = ratio(affinity_stats[[k, c]], sa[k] * tb[c], || format!("w_cross[{s}][{k}, {c}]"))?;
    }
    Ok(out)
}

/// One full EM sweep in place: memberships, then affinities, then cross
/// affinities.
pub fn sweep(ctx: &FitContext, state: &mut LatentState) -> Result<()> {
    let numer = membership_numerators(ctx, state)?;
    for (l, n) in numer.iter().enumerate() {
        state.u[l] = update_u(ctx, state, l, n)?;
    }
    for l in 0..ctx.mh.num_layers() {
        let (_, pair_stats) = layer_expectations(ctx, state, l)?;
        state.w[l] = update_w(ctx, state, l, &pair_stats)?;
    }
    for s in 0..ctx.mh.inter_edges().len() {
        let cx = cross_expectations(ctx, state, s)?;
        state.w_cross[s] = update_w_cross(ctx, state, s, &cx.affinity)?;
    }
    Ok(())
}

/// Result of one restart.
#[derive(Debug, Clone)]
pub struct RestartOutcome {
    pub restart: usize,
    pub state: LatentState,
    pub objective: f64,
    pub trace: Vec<(usize, f64)>,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct FitResult {
    pub state: LatentState,
    /// `(iteration, objective)` at iteration 0 and every check.
    pub objective_trace: Vec<(usize, f64)>,
    pub best_restart: usize,
    pub converged: bool,
    pub iterations: usize,
    /// Final objective per restart, `None` for degenerate restarts.
    pub restart_objectives: Vec<Option<f64>>,
}

impl FitResult {
    pub fn objective(&self) -> f64 {
        self.objective_trace.last().map_or(f64::NEG_INFINITY, |&(_, o)| o)
    }
}

/// Runs EM from the initialization of one restart until the relative
/// objective change stays below `tol` at two consecutive checks.
pub fn run_restart(ctx: &FitContext, cfg: &InferenceConfig, restart: usize) -> Result<RestartOutcome> {
    let mut state = initialize(ctx.mh, cfg, cfg.restart_seed(restart));
    let mut prev = ctx.objective(&state)?;
    let mut trace = vec![(0, prev)];
    let mut quiet_checks = 0;
    let mut converged = false;
    let mut iterations = 0;
    for it in 1..=cfg.max_iters {
        sweep(ctx, &mut state)?;
        iterations = it;
        if it % cfg.check_every != 0 && it != cfg.max_iters {
            continue;
        }
        let obj = ctx.objective(&state)?;
        trace.push((it, obj));
        log::debug!("restart {restart} iteration {it}: objective {obj}");
        let rel = (obj - prev).abs() / prev.abs().max(f64::MIN_POSITIVE);
        prev = obj;
        if rel < cfg.tol {
            quiet_checks += 1;
            if quiet_checks >= 2 {
                converged = true;
                break;
            }
        } else {
            quiet_checks = 0;
        }
    }
    Ok(RestartOutcome {
        restart,
        state,
        objective: prev,
        trace,
        iterations,
        converged,
    })
}

/// Every restart of a fit, in restart order. Restarts run in parallel.
pub fn fit_restarts(ctx: &FitContext, cfg: &InferenceConfig) -> Vec<Result<RestartOutcome>> {
    (0..cfg.restarts)
        .into_par_iter()
        .map(|r| run_restart(ctx, cfg, r))
        .collect()
}

/// Fits the model and keeps the restart with the highest final objective
/// (lowest restart index on ties).
pub fn fit(mh: &MultiHypergraph, cfg: &InferenceConfig) -> Result<FitResult> {
    let ctx = FitContext::new(mh, cfg)?;
    select_best(fit_restarts(&ctx, cfg))
}

pub fn select_best(outcomes: Vec<Result<RestartOutcome>>) -> Result<FitResult> {
    let restart_objectives: Vec<Option<f64>> = outcomes
        .iter()
        .map(|o| o.as_ref().ok().map(|o| o.objective))
        .collect();
    let mut best: Option<RestartOutcome> = None;
    let mut last_err = None;
    for o in outcomes {
        match o {
            Ok(o) => {
                if best.as_ref().is_none_or(|b| o.objective > b.objective) {
                    best = Some(o);
                }
            }
            Err(e) => {
                log::warn!("restart degenerated: {e}");
                last_err = Some(e);
            }
        }
    }
    let best = best.ok_or_else(|| {
        Error::FitFailed(last_err.map_or_else(|| "no restarts".to_string(), |e| e.to_string()))
    })?;
    Ok(FitResult {
        state: best.state,
        objective_trace: best.trace,
        best_restart: best.restart,
        converged: best.converged,
        iterations: best.iterations,
        restart_objectives,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypergraph::{Hyperedge, HypergraphLayer, InterEdge, InterEdgeSet};
    use ndarray::array;

    fn layer(n: usize, edges: &[&[usize]]) -> HypergraphLayer {
        HypergraphLayer::new(
            n,
            edges.iter().map(|e| Hyperedge::new(e.to_vec(), 1.0).unwrap()).collect(),
        )
        .unwrap()
    }

    fn scalar_ctx(mh: &MultiHypergraph) -> FitContext<'_> {
        let thetas = mh.layers().iter().map(InternalDegreeTable::uniform).collect();
        let consts = mh
            .layers()
            .iter()
            .map(|l| layer_constants(l, vec![], None).unwrap())
            .collect();
        FitContext::with_constants(mh, thetas, consts)
    }

    #[test]
    fn init_respects_assortative_flag() {
        let l = layer(5, &[&[0, 1], &[2, 3, 4]]);
        let mh = MultiHypergraph::single(l);
        let mut cfg = InferenceConfig::new(vec![3]);
        cfg.assortative = true;
        let s = initialize(&mh, &cfg, 11);
        for r in 0..3 {
            for c in 0..3 {
                if r != c {
                    assert_eq!(s.w[0][[r, c]], 0.0);
                } else {
                    assert!(s.w[0][[r, c]] > 0.05);
                }
            }
        }
        cfg.assortative = false;
        let s = initialize(&mh, &cfg, 11);
        assert!(s.w[0].iter().all(|&v| v > 0.05 && v <= 1.0));
        assert!(s.u[0].iter().all(|&v| v > 0.05 && v <= 1.0));
        assert_eq!(s.w[0], s.w[0].t());
        assert_eq!(s, initialize(&mh, &cfg, 11));
        assert_ne!(s, initialize(&mh, &cfg, 12));
    }

    #[test]
    fn hyperedge_marginals_k1() {
        let u = Array2::ones((3, 1));
        let m = e_step_hyperedge(&[0, 1, 2], &[1.0; 3], &u, &array![[1.0]]).unwrap();
        for r in 0..3 {
            assert!((m.node[[r, 0]] - 2.0 / 3.0).abs() < 1e-15);
        }
        assert!((m.pair[[0, 0]] - 1.0).abs() < 1e-15);

        let m = e_step_hyperedge(&[0, 1], &[1.0; 2], &u, &array![[2.5]]).unwrap();
        assert_eq!(m.node, array![[1.0], [1.0]]);
        assert!((m.pair[[0, 0]] - 1.0).abs() < 1e-15);
        assert!((m.lambda - 2.5).abs() < 1e-15);
    }

    #[test]
    fn hyperedge_marginals_zero_rate() {
        let u = Array2::zeros((2, 1));
        assert!(e_step_hyperedge(&[0, 1], &[1.0; 2], &u, &array![[1.0]]).is_err());
    }

    #[test]
    fn pair_marginals() {
        let rho = e_step_pair(array![1.0].view(), array![4.0].view(), &array![[2.0]]).unwrap();
        assert_eq!(rho, array![[1.0]]);
        let rho = e_step_pair(array![1.0, 0.0].view(), array![0.3, 0.9].view(), &array![[1.0, 2.0], [3.0, 4.0]]).unwrap();
        assert!(rho.row(1).iter().all(|&v| v == 0.0));
        let rho = e_step_pair(array![1.0, 2.0].view(), array![3.0, 1.0].view(), &array![[1.0, 0.0], [0.0, 2.0]]).unwrap();
        assert!((rho[[0, 0]] - 3.0 / 7.0).abs() < 1e-15);
        assert!((rho[[1, 1]] - 4.0 / 7.0).abs() < 1e-15);
        assert_eq!(rho[[0, 1]], 0.0);
        assert!(e_step_pair(array![1.0].view(), array![0.0].view(), &array![[1.0]]).is_err());
    }

    #[test]
    fn scalar_membership_update() {
        let mh = MultiHypergraph::single(layer(3, &[&[0, 1]]));
        let ctx = scalar_ctx(&mh);
        let state = LatentState {
            u: vec![Array2::ones((3, 1))],
            w: vec![array![[1.0]]],
            w_cross: vec![],
        };
        let numer = membership_numerators(&ctx, &state).unwrap();
        let u = update_u(&ctx, &state, 0, &numer[0]).unwrap();
        assert!((u[[0, 0]] - 3.0 / 8.0).abs() < 1e-12);
        // node 2 is in no hyperedge
        assert_eq!(u[[2, 0]], 0.0);
    }

    #[test]
    fn scalar_affinity_update() {
        let mh = MultiHypergraph::single(layer(3, &[&[0, 1]]));
        let ctx = scalar_ctx(&mh);
        let state = LatentState {
            u: vec![Array2::ones((3, 1))],
            w: vec![array![[1.0]]],
            w_cross: vec![],
        };
        let (_, pair) = layer_expectations(&ctx, &state, 0).unwrap();
        let w = update_w(&ctx, &state, 0, &pair).unwrap();
        assert!((w[[0, 0]] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn scalar_cross_update() {
        let a = layer(2, &[&[0, 1]]);
        let b = layer(3, &[&[0, 1, 2]]);
        let set = InterEdgeSet::new(0, 1, vec![InterEdge { i: 0, j: 2, weight: 1.0 }]).unwrap();
        let mh = MultiHypergraph::new(vec![a, b], vec![set]).unwrap();
        let ctx = scalar_ctx(&mh);
        let state = LatentState {
            u: vec![Array2::ones((2, 1)), Array2::ones((3, 1))],
            w: vec![array![[1.0]], array![[1.0]]],
            w_cross: vec![array![[1.0]]],
        };
        let cx = cross_expectations(&ctx, &state, 0).unwrap();
        let wc = update_w_cross(&ctx, &state, 0, &cx.affinity).unwrap();
        assert!((wc[[0, 0]] - 1.0 / 6.0).abs() < 1e-12);

        let empty = mh.with_inter_edges(vec![InterEdgeSet::new(0, 1, vec![]).unwrap()]).unwrap();
        let ctx = scalar_ctx(&empty);
        let cx = cross_expectations(&ctx, &state, 0).unwrap();
        assert_eq!(update_w_cross(&ctx, &state, 0, &cx.affinity).unwrap(), array![[0.0]]);
    }

    #[test]
    fn zero_denominator_with_mass_is_an_error() {
        assert!(ratio(1.0, 0.0, || "x".into()).is_err());
        assert_eq!(ratio(0.0, 0.0, || "x".into()).unwrap(), 0.0);
    }

    #[test]
    fn config_validation() {
        let mh = MultiHypergraph::single(layer(3, &[&[0, 1]]));
        let mut cfg = InferenceConfig::new(vec![2]);
        assert!(cfg.validate(&mh).is_ok());
        cfg.restarts = 0;
        assert!(cfg.validate(&mh).is_err());
        let cfg = InferenceConfig::new(vec![2, 2]);
        assert!(cfg.validate(&mh).is_err());
        let mut cfg = InferenceConfig::new(vec![2]);
        cfg.tol = 0.0;
        assert!(cfg.validate(&mh).is_err());
    }
}
