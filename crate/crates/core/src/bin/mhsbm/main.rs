mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};

use commands::CliError;

/// Community detection and link prediction on coupled hypergraphs.
///
/// Inputs are described by a flat `key = value` manifest:
/// `layer.<i>.edges`, optional `layer.<i>.nodes`, `layer.<i>.truth`,
/// `layer.<i>.k`, and `inter_edges`. Fit settings (`restarts`, `max_iter`,
/// `tol`, `check_every`, `assortative`, `seed`) may also live in the
/// manifest; flags override them. Every output directory receives the
/// effective manifest (`run.cfg`) and the tool version (`VERSION`).
#[derive(Debug, Parser)]
#[command(name = "mhsbm", version)]
struct Cli {
    /// Log verbosity (-v info, -vv debug with per-check objectives).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    /// Worker threads for restarts and folds (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit the model. Writes u_<l>.csv, w_<l>.csv, w_cross_<a>_<b>.csv,
    /// trace.csv (iteration,objective) and summary.json (objective,
    /// iterations, best_restart, converged, restart_objectives).
    Fit(FitArgs),
    /// Score fitted memberships against ground truth. Prints JSON with
    /// per-layer nmi, f1 and cs; also writes metrics.json with --out-dir.
    EvalCommunities(EvalArgs),
    /// Cross-validated hyperedge prediction. Writes folds.csv
    /// (layer,fold,positives,negative_seed,auc), by_max_size.csv
    /// (max_size,mean,sd) and summary.json.
    PredictHyperedges(PredictHyperedgesArgs),
    /// Inter-edge prediction over removal ratios. Writes sweep.csv
    /// (removal_ratio,mean,sd), repeats.csv
    /// (removal_ratio,repeat,seed,test_positives,auc) and summary.json.
    PredictInteredges(PredictInterArgs),
    /// Generate a benchmark: layer_<l>.edges, layer_<l>.truth,
    /// inter_edges.txt and a manifest.cfg ready for `fit`.
    Synth(SynthArgs),
    /// Hyperedge entropy statistics. Writes entropy_<l>.csv
    /// (bin_lower,bin_upper,count) and entropy_summary.json, and prints one
    /// summary line per layer.
    EntropyReport(EntropyArgs),
}

#[derive(Debug, Args)]
struct FitArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
    /// Communities per layer; a single value applies to every layer.
    #[arg(long, value_delimiter = ',')]
    k: Vec<usize>,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    /// Iterations between convergence checks.
    #[arg(long)]
    check_every: Option<usize>,
    /// Start every `w` diagonal.
    #[arg(long)]
    assortative: bool,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Output directory of a previous `fit`.
    #[arg(long)]
    fit_dir: PathBuf,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Mean per-node cosine (true) or whole-matrix cosine (false).
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    cs_normalize_rows: bool,
}

#[derive(Debug, Args)]
struct PredictHyperedgesArgs {
    #[command(flatten)]
    fit: FitArgs,
    #[arg(long, default_value_t = 5)]
    folds: usize,
    /// Maximum hyperedge sizes D reported separately (default: 2 up to the
    /// largest observed size).
    #[arg(long, value_delimiter = ',')]
    max_size: Vec<usize>,
}

#[derive(Debug, Args)]
struct PredictInterArgs {
    #[command(flatten)]
    fit: FitArgs,
    #[arg(long, value_delimiter = ',', default_value = "0")]
    removal_ratio: Vec<f64>,
    #[arg(long, default_value_t = 5)]
    repeats: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Preset {
    Views,
    Planted,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long, value_enum)]
    preset: Preset,
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// views: source hyperedge file.
    #[arg(long, required_if_eq("preset", "views"))]
    source: Option<PathBuf>,
    /// views: ground-truth file of the source.
    #[arg(long, required_if_eq("preset", "views"))]
    truth: Option<PathBuf>,
    /// views: fraction of source hyperedges kept per view.
    #[arg(long, value_delimiter = ',', default_value = "0.2,0.2,0.2")]
    fractions: Vec<f64>,
    /// views: inter-edges from view 0 to each later view.
    #[arg(long, value_delimiter = ',', default_value = "2867,2792")]
    budgets: Vec<usize>,
    /// views: cross-community noise as a fraction of each budget.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    /// planted: number of layers.
    #[arg(long, default_value_t = 2)]
    layers: usize,
    /// planted: nodes per layer.
    #[arg(long, default_value_t = 60)]
    nodes: usize,
    /// planted: communities per layer.
    #[arg(long, default_value_t = 3)]
    communities: usize,
    #[arg(long, default_value_t = 0.1)]
    c_in: f64,
    #[arg(long, default_value_t = 0.01)]
    c_out: f64,
    #[arg(long, default_value_t = 0.1)]
    cross_in: f64,
    #[arg(long, default_value_t = 0.0)]
    cross_out: f64,
    /// planted: largest generated hyperedge.
    #[arg(long, default_value_t = 3)]
    max_size: usize,
}

#[derive(Debug, Args)]
struct EntropyArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long, default_value_t = 0.6)]
    threshold: f64,
    /// normalized, nats or bits.
    #[arg(long, default_value = "normalized")]
    base: String,
    #[arg(long, default_value_t = 10)]
    bins: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).init();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("could not size the thread pool: {e}");
        }
    }
    let result = match cli.command {
        Command::Fit(a) => commands::fit(&a),
        Command::EvalCommunities(a) => commands::eval_communities(&a),
        Command::PredictHyperedges(a) => commands::predict_hyperedges(&a),
        Command::PredictInteredges(a) => commands::predict_interedges(&a),
        Command::Synth(a) => commands::synth(&a),
        Command::EntropyReport(a) => commands::entropy_report(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}\n\n{}", Cli::command().render_usage());
            ExitCode::from(2)
        }
        Err(CliError::Model(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
