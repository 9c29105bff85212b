use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use mhsbm::internal_degree::{entropy_report as layer_entropy, EntropyBase};
use mhsbm::io::{
    format_float, read_matrix, write_ground_truth_file, write_hyperedge_file, write_inter_edge_file, write_matrix,
    Manifest,
};
use mhsbm::metrics::{community_f1, cosine_similarity, nmi, PartitionPair};
use mhsbm::prediction::{hyperedge_prediction_cv, inter_edge_prediction};
use mhsbm::seeding::derive_seed;
use mhsbm::synth::{build_views, planted, InterBudget, PlantedConfig, SynthConfig};
use mhsbm::{Error, InferenceConfig, MultiHypergraph};
use serde::Serialize;

use crate::{EntropyArgs, EvalArgs, FitArgs, PredictHyperedgesArgs, PredictInterArgs, Preset, SynthArgs};

pub enum CliError {
    Usage(String),
    Model(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Model(e)
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

const VERSION: &str = concat!("mhsbm ", env!("CARGO_PKG_VERSION"));
/// Salt of the negative-sample seed derived inside `FitContext::new`.
const NEGATIVE_SALT: u64 = 0x6e65_6773;

fn load_manifest(path: &Path) -> CliResult<Manifest> {
    if !path.is_file() {
        return Err(CliError::Usage(format!("manifest not found: {}", path.display())));
    }
    Ok(Manifest::load(path)?)
}

fn create_out_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::Model(Error::Io { path: dir.to_path_buf(), source: e }))
}

fn write_file(path: PathBuf, text: &str) -> CliResult<()> {
    fs::write(&path, text).map_err(|e| CliError::Model(Error::Io { path, source: e }))
}

fn write_json<T: Serialize>(path: PathBuf, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).expect("report serializes");
    text.push('\n');
    write_file(path, &text)
}

fn absolute(p: &Path) -> PathBuf {
    std::path::absolute(p).unwrap_or_else(|_| p.to_path_buf())
}

/// Copies every manifest entry, pinning path entries to absolute paths so
/// the written manifest works from any directory.
fn effective_manifest(input: &Manifest, command: &str) -> Manifest {
    let mut out = Manifest::new();
    for (k, v) in input.entries() {
        let is_path = k == "inter_edges" || k.ends_with(".edges") || k.ends_with(".truth");
        match input.path(k).filter(|_| is_path) {
            Some(p) => out.set(k, absolute(&p).display()),
            None => out.set(k, v),
        }
    }
    out.set("command", command);
    out.set("version", VERSION);
    out
}

fn finish_run(out_dir: &Path, manifest: &Manifest) -> CliResult<()> {
    manifest.write(out_dir.join("run.cfg"))?;
    write_file(out_dir.join("VERSION"), &format!("{VERSION}\n"))
}

/// Builds the inference config from manifest defaults and flag overrides
/// and records it in `manifest`.
fn inference_config(args: &FitArgs, input: &Manifest, mh: &MultiHypergraph, manifest: &mut Manifest) -> CliResult<InferenceConfig> {
    let layers = mh.num_layers();
    let k = if !args.k.is_empty() {
        match args.k.len() {
            1 => vec![args.k[0]; layers],
            n if n == layers => args.k.clone(),
            n => return Err(CliError::Usage(format!("--k has {n} values for {layers} layers"))),
        }
    } else {
        input
            .k_per_layer()?
            .ok_or_else(|| CliError::Usage("community counts missing: pass --k or set layer.<i>.k".into()))?
    };
    let mut cfg = InferenceConfig::new(k);
    if let Some(v) = input.get_parsed("restarts")? {
        cfg.restarts = v;
    }
    if let Some(v) = input.get_parsed("max_iter")? {
        cfg.max_iters = v;
    }
    if let Some(v) = input.get_parsed("tol")? {
        cfg.tol = v;
    }
    if let Some(v) = input.get_parsed("check_every")? {
        cfg.check_every = v;
    }
    if let Some(v) = input.get_parsed("assortative")? {
        cfg.assortative = v;
    }
    if let Some(v) = input.get_parsed("seed")? {
        cfg.seed = v;
    }
    cfg.m_override = input.get_parsed("m_override")?;
    cfg.restarts = args.restarts.unwrap_or(cfg.restarts);
    cfg.max_iters = args.max_iter.unwrap_or(cfg.max_iters);
    cfg.tol = args.tol.unwrap_or(cfg.tol);
    cfg.check_every = args.check_every.unwrap_or(cfg.check_every);
    cfg.assortative |= args.assortative;
    cfg.seed = args.seed.unwrap_or(cfg.seed);
    if cfg.assortative && cfg.k_per_layer.contains(&1) {
        log::warn!("--assortative has no effect on layers with a single community");
    }
    cfg.validate(mh)?;

    for (l, k) in cfg.k_per_layer.iter().enumerate() {
        manifest.set(format!("layer.{l}.k"), k);
    }
    manifest.set("restarts", cfg.restarts);
    manifest.set("max_iter", cfg.max_iters);
    manifest.set("tol", format_float(cfg.tol));
    manifest.set("check_every", cfg.check_every);
    manifest.set("assortative", cfg.assortative);
    manifest.set("seed", cfg.seed);
    if let Some(m) = cfg.m_override {
        manifest.set("m_override", m);
    }
    manifest.set("negative_seed", derive_seed(cfg.seed, NEGATIVE_SALT));
    for r in 0..cfg.restarts {
        manifest.set(format!("restart.{r}.seed"), cfg.restart_seed(r));
    }
    Ok(cfg)
}

struct Prepared {
    mh: MultiHypergraph,
    cfg: InferenceConfig,
    manifest: Manifest,
}

fn prepare(args: &FitArgs, command: &str) -> CliResult<Prepared> {
    let input = load_manifest(&args.manifest)?;
    let mh = input.load_multi_hypergraph()?;
    let mut manifest = effective_manifest(&input, command);
    let cfg = inference_config(args, &input, &mh, &mut manifest)?;
    create_out_dir(&args.out_dir)?;
    Ok(Prepared { mh, cfg, manifest })
}

#[derive(Serialize)]
struct FitSummary {
    objective: f64,
    iterations: usize,
    best_restart: usize,
    converged: bool,
    restart_objectives: Vec<Option<f64>>,
}

pub fn fit(args: &FitArgs) -> CliResult<()> {
    let Prepared { mh, cfg, manifest } = prepare(args, "fit")?;
    let result = mhsbm::fit(&mh, &cfg)?;
    let out = &args.out_dir;
    for (l, (u, w)) in result.state.u.iter().zip(&result.state.w).enumerate() {
        write_matrix(out.join(format!("u_{l}.csv")), u)?;
        write_matrix(out.join(format!("w_{l}.csv")), w)?;
    }
    for (set, wc) in mh.inter_edges().iter().zip(&result.state.w_cross) {
        write_matrix(out.join(format!("w_cross_{}_{}.csv", set.layer_a(), set.layer_b())), wc)?;
    }
    let mut trace = String::from("iteration,objective\n");
    for (it, obj) in &result.objective_trace {
        let _ = writeln!(trace, "{it},{}", format_float(*obj));
    }
    write_file(out.join("trace.csv"), &trace)?;
    write_json(
        out.join("summary.json"),
        &FitSummary {
            objective: result.objective(),
            iterations: result.iterations,
            best_restart: result.best_restart,
            converged: result.converged,
            restart_objectives: result.restart_objectives.clone(),
        },
    )?;
    log::info!("best restart {} objective {}", result.best_restart, result.objective());
    finish_run(out, &manifest)
}

#[derive(Serialize)]
struct LayerScores {
    layer: usize,
    labeled_nodes: usize,
    nmi: Option<f64>,
    f1: Option<f64>,
    cs: Option<f64>,
}

#[derive(Serialize)]
struct EvalReport {
    cs_normalize_rows: bool,
    layers: Vec<LayerScores>,
}

pub fn eval_communities(args: &EvalArgs) -> CliResult<()> {
    let input = load_manifest(&args.manifest)?;
    let mh = input.load_multi_hypergraph()?;
    let mut layers = Vec::with_capacity(mh.num_layers());
    for (l, layer) in mh.layers().iter().enumerate() {
        let u = read_matrix(args.fit_dir.join(format!("u_{l}.csv")))?;
        if u.nrows() != layer.num_nodes() {
            return Err(Error::DimensionMismatch(format!(
                "u_{l}.csv has {} rows for {} nodes",
                u.nrows(),
                layer.num_nodes()
            ))
            .into());
        }
        let scores = match layer.ground_truth() {
            Some(truth) => {
                let pp = PartitionPair::from_membership(&u, truth)?;
                LayerScores {
                    layer: l,
                    labeled_nodes: truth.len(),
                    nmi: Some(nmi(&pp)),
                    f1: Some(community_f1(&pp)),
                    cs: cosine_similarity(&u, truth, args.cs_normalize_rows).ok(),
                }
            }
            None => LayerScores { layer: l, labeled_nodes: 0, nmi: None, f1: None, cs: None },
        };
        layers.push(scores);
    }
    let report = EvalReport { cs_normalize_rows: args.cs_normalize_rows, layers };
    println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    if let Some(out) = &args.out_dir {
        create_out_dir(out)?;
        write_json(out.join("metrics.json"), &report)?;
        let mut manifest = effective_manifest(&input, "eval-communities");
        manifest.set("fit_dir", absolute(&args.fit_dir).display());
        manifest.set("cs_normalize_rows", args.cs_normalize_rows);
        finish_run(out, &manifest)?;
    }
    Ok(())
}

pub fn predict_hyperedges(args: &PredictHyperedgesArgs) -> CliResult<()> {
    let Prepared { mh, cfg, mut manifest } = prepare(&args.fit, "predict-hyperedges")?;
    if args.folds < 2 {
        return Err(CliError::Usage(format!("--folds must be at least 2, got {}", args.folds)));
    }
    let max_sizes: Vec<usize> = if args.max_size.is_empty() {
        let largest = mh.layers().iter().map(|l| l.max_size()).max().unwrap_or(2);
        (2..=largest.max(2)).collect()
    } else {
        args.max_size.clone()
    };
    let report = hyperedge_prediction_cv(&mh, &cfg, args.folds, cfg.seed, &max_sizes)?;
    let out = &args.fit.out_dir;
    let mut folds = String::from("layer,fold,positives,negative_seed,auc\n");
    for f in &report.folds {
        let _ = writeln!(folds, "{},{},{},{},{}", f.layer, f.fold, f.positives, f.negative_seed, format_float(f.auc));
    }
    write_file(out.join("folds.csv"), &folds)?;
    let mut by_d = String::from("max_size,mean,sd\n");
    for (d, m) in &report.by_max_size {
        let _ = writeln!(by_d, "{d},{},{}", format_float(m.mean), format_float(m.sd));
    }
    write_file(out.join("by_max_size.csv"), &by_d)?;
    write_json(out.join("summary.json"), &report)?;
    println!("AUC {} +- {}", format_float(report.summary.mean), format_float(report.summary.sd));
    manifest.set("folds", args.folds);
    manifest.set("max_size", join(&max_sizes));
    finish_run(out, &manifest)
}

fn join<T: ToString>(values: &[T]) -> String {
    values.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

pub fn predict_interedges(args: &PredictInterArgs) -> CliResult<()> {
    let Prepared { mh, cfg, mut manifest } = prepare(&args.fit, "predict-interedges")?;
    if args.repeats == 0 {
        return Err(CliError::Usage("--repeats must be positive".into()));
    }
    let mut reports = Vec::with_capacity(args.removal_ratio.len());
    for &r in &args.removal_ratio {
        reports.push(inter_edge_prediction(&mh, &cfg, r, args.repeats, cfg.seed)?);
    }
    let out = &args.fit.out_dir;
    let mut sweep = String::from("removal_ratio,mean,sd\n");
    let mut repeats = String::from("removal_ratio,repeat,seed,test_positives,auc\n");
    for rep in &reports {
        let ratio = format_float(rep.removal_ratio);
        let _ = writeln!(sweep, "{ratio},{},{}", format_float(rep.summary.mean), format_float(rep.summary.sd));
        for r in &rep.repeats {
            let _ = writeln!(repeats, "{ratio},{},{},{},{}", r.repeat, r.seed, r.test_positives, format_float(r.auc));
        }
    }
    write_file(out.join("sweep.csv"), &sweep)?;
    write_file(out.join("repeats.csv"), &repeats)?;
    write_json(out.join("summary.json"), &reports)?;
    manifest.set("removal_ratio", join(&args.removal_ratio.iter().map(|&r| format_float(r)).collect::<Vec<_>>()));
    manifest.set("repeats", args.repeats);
    finish_run(out, &manifest)
}

pub fn synth(args: &SynthArgs) -> CliResult<()> {
    create_out_dir(&args.out_dir)?;
    let mut manifest = Manifest::new();
    let (mh, ks, config_json) = match args.preset {
        Preset::Planted => {
            let cfg = PlantedConfig {
                num_layers: args.layers,
                nodes_per_layer: args.nodes,
                communities: args.communities,
                c_in: args.c_in,
                c_out: args.c_out,
                cross_in: args.cross_in,
                cross_out: args.cross_out,
                max_size: args.max_size,
                seed: args.seed,
            };
            let mh = planted(&cfg)?;
            (mh, vec![args.communities; args.layers], serde_json::to_value(&cfg))
        }
        Preset::Views => {
            let (Some(source), Some(truth)) = (&args.source, &args.truth) else {
                return Err(CliError::Usage("--source and --truth are required for the views preset".into()));
            };
            if args.budgets.len() + 1 != args.fractions.len() {
                return Err(CliError::Usage(format!(
                    "{} views need {} budgets, got {}",
                    args.fractions.len(),
                    args.fractions.len().saturating_sub(1),
                    args.budgets.len()
                )));
            }
            let truth_map = mhsbm::io::parse_ground_truth_file(truth)?;
            let mut layer = mhsbm::io::parse_hyperedge_file(source, None)?;
            let needed = truth_map.keys().next_back().map_or(0, |&m| m + 1);
            if needed > layer.num_nodes() {
                layer = mhsbm::HypergraphLayer::new(needed, layer.hyperedges().to_vec())?;
            }
            let layer = layer.with_ground_truth(truth_map.clone())?;
            let cfg = SynthConfig {
                sample_fractions: args.fractions.clone(),
                budgets: args
                    .budgets
                    .iter()
                    .enumerate()
                    .map(|(b, &count)| InterBudget { layer_a: 0, layer_b: b + 1, count })
                    .collect(),
                noise_fraction: args.noise,
                seed: args.seed,
            };
            let mh = build_views(&layer, &cfg)?;
            let k = truth_map.values().collect::<BTreeSet<_>>().len().max(1);
            manifest.set("source", absolute(source).display());
            (mh, vec![k; args.fractions.len()], serde_json::to_value(&cfg))
        }
    };
    let out = &args.out_dir;
    for (l, layer) in mh.layers().iter().enumerate() {
        write_hyperedge_file(out.join(format!("layer_{l}.edges")), layer)?;
        manifest.set(format!("layer.{l}.edges"), format!("layer_{l}.edges"));
        manifest.set(format!("layer.{l}.nodes"), layer.num_nodes());
        manifest.set(format!("layer.{l}.k"), ks[l]);
        if let Some(truth) = layer.ground_truth() {
            write_ground_truth_file(out.join(format!("layer_{l}.truth")), truth)?;
            manifest.set(format!("layer.{l}.truth"), format!("layer_{l}.truth"));
        }
    }
    write_inter_edge_file(out.join("inter_edges.txt"), mh.inter_edges())?;
    manifest.set("inter_edges", "inter_edges.txt");
    manifest.set("seed", args.seed);
    manifest.write(out.join("manifest.cfg"))?;
    write_json(out.join("synth.json"), &config_json.expect("config serializes"))?;
    let mut run = manifest.clone();
    run.set("command", "synth");
    run.set("preset", format!("{:?}", args.preset).to_lowercase());
    run.set("version", VERSION);
    finish_run(out, &run)
}

pub fn entropy_report(args: &EntropyArgs) -> CliResult<()> {
    let base: EntropyBase = args
        .base
        .parse()
        .map_err(|_| CliError::Usage(format!("unknown entropy base `{}`", args.base)))?;
    if args.bins == 0 {
        return Err(CliError::Usage("--bins must be positive".into()));
    }
    let input = load_manifest(&args.manifest)?;
    let mh = input.load_multi_hypergraph()?;
    create_out_dir(&args.out_dir)?;
    let mut reports = BTreeMap::new();
    for (l, layer) in mh.layers().iter().enumerate() {
        let report = layer_entropy(layer, args.threshold, base, args.bins);
        let mut csv = String::from("bin_lower,bin_upper,count\n");
        for (lo, hi, c) in &report.histogram {
            let _ = writeln!(csv, "{},{},{c}", format_float(*lo), format_float(*hi));
        }
        write_file(args.out_dir.join(format!("entropy_{l}.csv")), &csv)?;
        let containment = report
            .size2_containment_probability
            .map_or_else(|| "n/a".to_string(), format_float);
        println!(
            "layer {l}: {}/{} hyperedges of size >= 3 below {} (fraction {}); size-2 containment {}",
            report.below_threshold,
            report.evaluated,
            format_float(args.threshold),
            format_float(report.fraction_below),
            containment
        );
        reports.insert(l, report);
    }
    write_json(args.out_dir.join("entropy_summary.json"), &reports)?;
    let mut manifest = effective_manifest(&input, "entropy-report");
    manifest.set("threshold", format_float(args.threshold));
    manifest.set("base", &args.base);
    manifest.set("bins", args.bins);
    finish_run(&args.out_dir, &manifest)
}
