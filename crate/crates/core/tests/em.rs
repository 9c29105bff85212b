mod common;

use mhsbm::hypergraph::MultiHypergraph;
use mhsbm::inference::{fit, initialize, run_restart, sweep, FitContext, InferenceConfig};
use mhsbm::likelihood::LatentState;
use mhsbm::seeding::rng_for;
use ndarray::{Array2, Axis};

use common::*;

fn max_abs_diff(a: &LatentState, b: &LatentState) -> f64 {
    let pairs = a.u.iter().zip(&b.u).chain(a.w.iter().zip(&b.w)).chain(a.w_cross.iter().zip(&b.w_cross));
    pairs.flat_map(|(x, y)| (x - y).into_iter()).fold(0.0, |m, d| m.max(d.abs()))
}

#[test]
fn fixed_point_survives_a_sweep() {
    let (mh, state) = fixed_point_instance();
    let ctx = exact_context(&mh);
    assert!(ctx.thetas.iter().all(|t| (0..t.len()).all(|e| t.get(e).iter().all(|&x| x == 1.0))));
    let mut next = state.clone();
    sweep(&ctx, &mut next).unwrap();
    assert!(max_abs_diff(&state, &next) < 1e-10, "moved by {}", max_abs_diff(&state, &next));
}

#[test]
fn objective_never_decreases() {
    let mut rng = rng_for(42, 0);
    for case in 0..8 {
        let mh = random_pair(&mut rng, 30, case % 2 == 0);
        let cfg = InferenceConfig { seed: case, ..InferenceConfig::new(vec![2 + case as usize % 3, 3]) };
        let ctx = FitContext::new(&mh, &cfg).unwrap();
        let mut state = initialize(&mh, &cfg, case);
        let mut prev = ctx.objective(&state).unwrap();
        for it in 0..40 {
            sweep(&ctx, &mut state).unwrap();
            let obj = ctx.objective(&state).unwrap();
            assert!(obj >= prev - 1e-8 * prev.abs(), "case {case} sweep {it}: {prev} -> {obj}");
            prev = obj;
        }
    }
}

#[test]
fn layers_without_inter_edges_evolve_independently() {
    let mut rng = rng_for(5, 0);
    let mh = random_pair(&mut rng, 20, false);
    let cfg = InferenceConfig::new(vec![3, 2]);
    let ctx = FitContext::new(&mh, &cfg).unwrap();
    let mut joint = initialize(&mh, &cfg, 9);
    let singles: Vec<MultiHypergraph> = mh.layers().iter().map(|l| MultiHypergraph::single(l.clone())).collect();
    let mut alone: Vec<LatentState> = (0..2)
        .map(|l| LatentState { u: vec![joint.u[l].clone()], w: vec![joint.w[l].clone()], w_cross: vec![] })
        .collect();
    for _ in 0..5 {
        sweep(&ctx, &mut joint).unwrap();
        for l in 0..2 {
            let single_ctx = FitContext::with_constants(&singles[l], vec![ctx.thetas[l].clone()], vec![ctx.consts[l].clone()]);
            sweep(&single_ctx, &mut alone[l]).unwrap();
        }
    }
    for (l, single) in alone.iter().enumerate() {
        assert_eq!(joint.u[l], single.u[0]);
        assert_eq!(joint.w[l], single.w[0]);
    }
}

#[test]
fn relabeling_communities_relabels_the_fit() {
    let mut rng = rng_for(11, 0);
    let mh = random_pair(&mut rng, 15, true);
    let cfg = InferenceConfig::new(vec![3, 3]);
    let ctx = FitContext::new(&mh, &cfg).unwrap();
    let mut a = initialize(&mh, &cfg, 1);
    let perm = [2usize, 0, 1];
    let permute_cols = |m: &Array2<f64>| Array2::from_shape_fn(m.dim(), |(i, c)| m[[i, perm[c]]]);
    let permute_both = |m: &Array2<f64>| Array2::from_shape_fn(m.dim(), |(r, c)| m[[perm[r], perm[c]]]);
    let mut b = LatentState {
        u: a.u.iter().map(permute_cols).collect(),
        w: a.w.iter().map(permute_both).collect(),
        w_cross: a.w_cross.iter().map(permute_both).collect(),
    };
    for _ in 0..10 {
        sweep(&ctx, &mut a).unwrap();
        sweep(&ctx, &mut b).unwrap();
    }
    for l in 0..2 {
        assert!((&permute_cols(&a.u[l]) - &b.u[l]).iter().all(|d| d.abs() < 1e-9));
        assert!((&permute_both(&a.w[l]) - &b.w[l]).iter().all(|d| d.abs() < 1e-9));
    }
    assert!((&permute_both(&a.w_cross[0]) - &b.w_cross[0]).iter().all(|d| d.abs() < 1e-9));
}

#[test]
fn fits_are_reproducible_and_pick_the_best_restart() {
    let mut rng = rng_for(3, 0);
    let mh = random_pair(&mut rng, 20, true);
    let cfg = InferenceConfig { restarts: 4, max_iters: 60, seed: 17, ..InferenceConfig::new(vec![2, 2]) };
    let a = fit(&mh, &cfg).unwrap();
    let b = fit(&mh, &cfg).unwrap();
    assert_eq!(a.state, b.state);
    assert_eq!(a.objective_trace, b.objective_trace);
    let best = a.restart_objectives.iter().map(|o| o.unwrap()).fold(f64::NEG_INFINITY, f64::max);
    assert_eq!(a.objective(), best);
    assert_eq!(a.restart_objectives[a.best_restart], Some(best));

    let ctx = FitContext::new(&mh, &cfg).unwrap();
    let solo = run_restart(&ctx, &cfg, a.best_restart).unwrap();
    assert_eq!(solo.state, a.state);
}

#[test]
fn assortative_start_keeps_affinities_diagonal() {
    let mut rng = rng_for(8, 0);
    let mh = random_pair(&mut rng, 15, true);
    let cfg = InferenceConfig { assortative: true, restarts: 1, max_iters: 20, ..InferenceConfig::new(vec![3, 3]) };
    let res = fit(&mh, &cfg).unwrap();
    for w in &res.state.w {
        for ((r, c), &v) in w.indexed_iter() {
            if r != c {
                assert_eq!(v, 0.0);
            }
        }
    }
}

#[test]
fn memberships_stay_nonnegative_and_finite() {
    let mut rng = rng_for(21, 0);
    let mh = random_pair(&mut rng, 25, true);
    let cfg = InferenceConfig { restarts: 2, max_iters: 50, ..InferenceConfig::new(vec![4, 2]) };
    let res = fit(&mh, &cfg).unwrap();
    for m in res.state.u.iter().chain(&res.state.w).chain(&res.state.w_cross) {
        assert!(m.iter().all(|v| v.is_finite() && *v >= 0.0));
    }
    // every node in some hyperedge keeps positive total membership
    for (l, layer) in mh.layers().iter().enumerate() {
        let mass = res.state.u[l].sum_axis(Axis(1));
        for e in layer.hyperedges() {
            for &v in e.nodes() {
                assert!(mass[v] > 0.0);
            }
        }
    }
}
