//! Held-out prediction protocols: hyperedge cross-validation, inter-edge
//! prediction under a removal ratio, and a K sweep on top of the former.

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hypergraph::{Hyperedge, HypergraphLayer, InterEdge, MultiHypergraph};
use crate::inference::{fit, InferenceConfig};
use crate::internal_degree::ContainmentIndex;
use crate::likelihood::{lambda_e, lambda_ij, mu, sample_unobserved, LatentState};
use crate::metrics::{auc, mean_sd, MeanSd};
use crate::seeding::{derive_seed, rng_for};

/// Scores candidate hyperedges of one layer against a fitted state.
pub struct HyperedgeScorer<'a> {
    index: ContainmentIndex<'a>,
    u: &'a Array2<f64>,
    w: &'a Array2<f64>,
}

impl<'a> HyperedgeScorer<'a> {
    /// `train` supplies the internal degrees of candidates.
    pub fn new(train: &'a HypergraphLayer, u: &'a Array2<f64>, w: &'a Array2<f64>) -> Self {
        HyperedgeScorer {
            index: ContainmentIndex::new(train),
            u,
            w,
        }
    }

    /// Expected count `lambda_e / mu_e`; node order does not matter.
    pub fn score(&self, nodes: &[usize]) -> Result<f64> {
        let mut sorted = nodes.to_vec();
        sorted.sort_unstable();
        if sorted.windows(2).any(|p| p[0] == p[1]) {
            return Err(Error::InvalidHyperedge(format!("repeated node in {nodes:?}")));
        }
        if let Some(&bad) = sorted.iter().find(|&&v| v >= self.u.nrows()) {
            return Err(Error::DimensionMismatch(format!("node {bad} outside membership matrix")));
        }
        let theta = self.index.theta(&sorted);
        Ok(lambda_e(&sorted, &theta, self.u, self.w) / mu(sorted.len())?)
    }
}

/// One-off score of a candidate hyperedge of layer `l`.
pub fn score_hyperedge(nodes: &[usize], train: &HypergraphLayer, state: &LatentState, l: usize) -> Result<f64> {
    HyperedgeScorer::new(train, &state.u[l], &state.w[l]).score(nodes)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FoldResult {
    pub layer: usize,
    pub fold: usize,
    /// Seed of the negative sample drawn for this layer and fold.
    pub negative_seed: u64,
    pub positives: usize,
    pub auc: f64,
    /// `(D, AUC)` over test hyperedges of size at most `D`; `None` when no
    /// test hyperedge is that small.
    pub auc_by_max_size: Vec<(usize, Option<f64>)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HyperedgeCvReport {
    pub folds: Vec<FoldResult>,
    /// Mean and sd across folds, one entry per layer.
    pub per_layer: Vec<MeanSd>,
    /// Mean of the layer means and mean of the layer sds.
    pub summary: MeanSd,
    /// Same aggregation restricted to test hyperedges of size at most `D`.
    pub by_max_size: Vec<(usize, MeanSd)>,
}

fn aggregate_layers(per_layer: &[MeanSd]) -> MeanSd {
    let valid: Vec<&MeanSd> = per_layer.iter().filter(|m| m.mean.is_finite()).collect();
    if valid.is_empty() {
        return MeanSd { mean: f64::NAN, sd: f64::NAN };
    }
    let n = valid.len() as f64;
    MeanSd {
        mean: valid.iter().map(|m| m.mean).sum::<f64>() / n,
        sd: valid.iter().map(|m| m.sd).sum::<f64>() / n,
    }
}

const FOLD_SALT: u64 = 0x666f_6c64;
const NEGATIVE_SALT: u64 = 0x7465_7374;

/// `folds`-fold cross-validation of hyperedge prediction. Hyperedges of
/// every layer are shuffled into folds; fold `f` is held out of all layers
/// at once, the model is fit on the rest, and each held-out hyperedge is
/// scored against one size-matched node set never observed in the full
/// layer. `max_sizes` lists the `D` thresholds reported separately.
pub fn hyperedge_prediction_cv(
    mh: &MultiHypergraph,
    cfg: &InferenceConfig,
    folds: usize,
    seed: u64,
    max_sizes: &[usize],
) -> Result<HyperedgeCvReport> {
    if folds < 2 {
        return Err(Error::InvalidInput(format!("need at least 2 folds, got {folds}")));
    }
    cfg.validate(mh)?;
    let fold_seed = derive_seed(seed, FOLD_SALT);
    let assignment: Vec<Vec<usize>> = mh
        .layers()
        .iter()
        .enumerate()
        .map(|(l, layer)| {
            let mut order: Vec<usize> = (0..layer.hyperedges().len()).collect();
            order.shuffle(&mut rng_for(fold_seed, l as u64));
            let mut fold_of = vec![0; order.len()];
            for (pos, &idx) in order.iter().enumerate() {
                fold_of[idx] = pos % folds;
            }
            fold_of
        })
        .collect();

    let per_fold: Vec<Vec<FoldResult>> = (0..folds)
        .into_par_iter()
        .map(|f| run_fold(mh, cfg, &assignment, f, seed, max_sizes))
        .collect::<Result<_>>()?;
    let results: Vec<FoldResult> = per_fold.into_iter().flatten().collect();

    let per_layer: Vec<MeanSd> = (0..mh.num_layers())
        .map(|l| mean_sd(&results.iter().filter(|r| r.layer == l).map(|r| r.auc).collect::<Vec<_>>()))
        .collect();
    let by_max_size = max_sizes
        .iter()
        .enumerate()
        .map(|(k, &d)| {
            let layer_stats: Vec<MeanSd> = (0..mh.num_layers())
                .map(|l| {
                    let vals: Vec<f64> = results
                        .iter()
                        .filter(|r| r.layer == l)
                        .filter_map(|r| r.auc_by_max_size[k].1)
                        .collect();
                    mean_sd(&vals)
                })
                .collect();
            (d, aggregate_layers(&layer_stats))
        })
        .collect();
    Ok(HyperedgeCvReport {
        summary: aggregate_layers(&per_layer),
        folds: results,
        per_layer,
        by_max_size,
    })
}

fn run_fold(
    mh: &MultiHypergraph,
    cfg: &InferenceConfig,
    assignment: &[Vec<usize>],
    fold: usize,
    seed: u64,
    max_sizes: &[usize],
) -> Result<Vec<FoldResult>> {
    let mut train_layers = Vec::with_capacity(mh.num_layers());
    let mut tests: Vec<Vec<&Hyperedge>> = Vec::with_capacity(mh.num_layers());
    for (l, layer) in mh.layers().iter().enumerate() {
        let keep: Vec<usize> = (0..layer.hyperedges().len()).filter(|&i| assignment[l][i] != fold).collect();
        if keep.is_empty() {
            return Err(Error::InvalidInput(format!("fold {fold} leaves layer {l} without training hyperedges")));
        }
        tests.push(
            (0..layer.hyperedges().len())
                .filter(|&i| assignment[l][i] == fold)
                .map(|i| &layer.hyperedges()[i])
                .collect(),
        );
        train_layers.push(layer.subset(&keep)?);
    }
    let train = mh.with_layers(train_layers)?;
    let fitted = fit(&train, cfg)?;
    log::info!("fold {fold}: objective {}", fitted.objective());

    let neg_seed = derive_seed(seed, NEGATIVE_SALT);
    let mut out = Vec::new();
    for (l, test) in tests.iter().enumerate() {
        if test.is_empty() {
            continue;
        }
        let stream = (fold * mh.num_layers() + l) as u64;
        let sizes: Vec<usize> = test.iter().map(|e| e.size()).collect();
        let negatives = sample_unobserved(&mh.layers()[l], &sizes, &mut rng_for(neg_seed, stream))?;
        let scorer = HyperedgeScorer::new(&train.layers()[l], &fitted.state.u[l], &fitted.state.w[l]);
        let pos: Vec<f64> = test.iter().map(|e| scorer.score(e.nodes())).collect::<Result<_>>()?;
        let neg: Vec<f64> = negatives.iter().map(|e| scorer.score(e.nodes())).collect::<Result<_>>()?;
        let auc_by_max_size = max_sizes
            .iter()
            .map(|&d| {
                let keep: Vec<usize> = (0..sizes.len()).filter(|&i| sizes[i] <= d).collect();
                if keep.is_empty() {
                    return Ok((d, None));
                }
                let p: Vec<f64> = keep.iter().map(|&i| pos[i]).collect();
                let n: Vec<f64> = keep.iter().map(|&i| neg[i]).collect();
                Ok((d, Some(auc(&p, &n)?)))
            })
            .collect::<Result<_>>()?;
        out.push(FoldResult {
            layer: l,
            fold,
            negative_seed: neg_seed,
            positives: test.len(),
            auc: auc(&pos, &neg)?,
            auc_by_max_size,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InterEdgeRepeat {
    pub repeat: usize,
    pub seed: u64,
    pub test_positives: usize,
    pub auc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InterEdgeReport {
    pub removal_ratio: f64,
    pub repeats: Vec<InterEdgeRepeat>,
    pub summary: MeanSd,
}

/// Inter-edge prediction: per repetition, remove `ceil(r |S|)` inter-edges
/// of every set, split the remainder 4:1 into train and test, fit on the
/// training data and score test pairs against as many uniformly drawn
/// cross pairs absent from the full set.
pub fn inter_edge_prediction(
    mh: &MultiHypergraph,
    cfg: &InferenceConfig,
    removal_ratio: f64,
    repeats: usize,
    seed: u64,
) -> Result<InterEdgeReport> {
    if mh.inter_edges().is_empty() {
        return Err(Error::InvalidInput("inter-edge prediction needs at least one inter-edge set".into()));
    }
    if !(0.0..1.0).contains(&removal_ratio) {
        return Err(Error::InvalidInput(format!("removal ratio {removal_ratio} outside [0, 1)")));
    }
    if repeats == 0 {
        return Err(Error::InvalidInput("at least one repetition is required".into()));
    }
    cfg.validate(mh)?;
    let runs = (0..repeats)
        .into_par_iter()
        .map(|rep| inter_edge_repeat(mh, cfg, removal_ratio, rep, derive_seed(seed, rep as u64)))
        .collect::<Result<Vec<_>>>()?;
    let summary = mean_sd(&runs.iter().map(|r| r.auc).collect::<Vec<_>>());
    Ok(InterEdgeReport {
        removal_ratio,
        repeats: runs,
        summary,
    })
}

const PAIR_ATTEMPTS_PER_DRAW: usize = 1_000;

fn inter_edge_repeat(mh: &MultiHypergraph, cfg: &InferenceConfig, ratio: f64, repeat: usize, seed: u64) -> Result<InterEdgeRepeat> {
    let mut train_sets = Vec::with_capacity(mh.inter_edges().len());
    let mut tests: Vec<Vec<InterEdge>> = Vec::with_capacity(mh.inter_edges().len());
    for (s, set) in mh.inter_edges().iter().enumerate() {
        let mut edges = set.edges().to_vec();
        edges.shuffle(&mut rng_for(seed, s as u64));
        let removed = ((ratio * edges.len() as f64).ceil() as usize).min(edges.len());
        let rest = &edges[removed..];
        let n_test = rest.len().div_ceil(5);
        tests.push(rest[..n_test].to_vec());
        train_sets.push(set.with_edges(rest[n_test..].to_vec())?);
    }
    let total_test: usize = tests.iter().map(Vec::len).sum();
    if total_test == 0 {
        return Err(Error::InvalidInput(format!("removal ratio {ratio} leaves no inter-edges to test")));
    }
    let train = mh.with_inter_edges(train_sets)?;
    let fit_cfg = InferenceConfig {
        seed: derive_seed(cfg.seed, repeat as u64),
        ..cfg.clone()
    };
    let fitted = fit(&train, &fit_cfg)?;

    let mut pos = Vec::with_capacity(total_test);
    let mut neg = Vec::with_capacity(total_test);
    for (s, set) in mh.inter_edges().iter().enumerate() {
        let wc = &fitted.state.w_cross[s];
        let (ua, ub) = (&fitted.state.u[set.layer_a()], &fitted.state.u[set.layer_b()]);
        for e in &tests[s] {
            pos.push(lambda_ij(ua.row(e.i), ub.row(e.j), wc)?);
        }
        let mut rng = rng_for(seed, (1 << 32) + s as u64);
        for (i, j) in sample_unobserved_pairs(set, ua.nrows(), ub.nrows(), tests[s].len(), &mut rng)? {
            neg.push(lambda_ij(ua.row(i), ub.row(j), wc)?);
        }
    }
    Ok(InterEdgeRepeat {
        repeat,
        seed,
        test_positives: total_test,
        auc: auc(&pos, &neg)?,
    })
}

/// Distinct uniform cross pairs absent from `set`.
fn sample_unobserved_pairs<R: Rng>(
    set: &crate::hypergraph::InterEdgeSet,
    n_a: usize,
    n_b: usize,
    count: usize,
    rng: &mut R,
) -> Result<Vec<(usize, usize)>> {
    let available = (n_a * n_b).saturating_sub(set.len());
    if available < count {
        return Err(Error::InvalidInput(format!(
            "{available} unobserved cross pairs for {count} negatives"
        )));
    }
    let mut seen = std::collections::HashSet::with_capacity(count);
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0;
    while out.len() < count {
        attempts += 1;
        if attempts > PAIR_ATTEMPTS_PER_DRAW * count {
            return Err(Error::InvalidInput("could not draw enough unobserved cross pairs".into()));
        }
        let (i, j) = (rng.random_range(0..n_a), rng.random_range(0..n_b));
        if !set.contains(i, j) && seen.insert((i, j)) {
            out.push((i, j));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KSweepReport {
    pub entries: Vec<(Vec<usize>, MeanSd)>,
    /// Index into `entries` of the highest mean AUC (first on ties).
    pub best: usize,
}

/// Repeats hyperedge cross-validation for each community-count vector of
/// `grid` and reports the one with the highest mean AUC.
pub fn k_sweep(
    mh: &MultiHypergraph,
    base: &InferenceConfig,
    grid: &[Vec<usize>],
    folds: usize,
    seed: u64,
) -> Result<KSweepReport> {
    if grid.is_empty() {
        return Err(Error::InvalidInput("empty K grid".into()));
    }
    let mut entries = Vec::with_capacity(grid.len());
    for ks in grid {
        let cfg = InferenceConfig {
            k_per_layer: ks.clone(),
            ..base.clone()
        };
        let report = hyperedge_prediction_cv(mh, &cfg, folds, seed, &[])?;
        entries.push((ks.clone(), report.summary));
    }
    let best = entries
        .iter()
        .enumerate()
        .fold(0, |b, (i, e)| if e.1.mean > entries[b].1.mean { i } else { b });
    Ok(KSweepReport { entries, best })
}
