use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;

use lsi_update_cli::{run_experiment, ExperimentConfig, PolicySpec, Preset};

/// Compare LSI updating schemes by appending documents in groups and
/// tracking retrieval precision and update time.
#[derive(Debug, Parser)]
#[command(name = "lsi-update", version)]
struct Args {
    /// Start from a shipped configuration (synthetic, medline, medline-p50,
    /// npl, npl-p500, trec8, trec8-p1000).
    #[arg(long)]
    preset: Option<String>,

    /// key=value file applied after the preset and before other flags.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Term-document count matrix (Matrix Market).
    #[arg(long)]
    matrix: Option<PathBuf>,

    /// Queries: Matrix Market with one column per query, or one line of
    /// 1-based term indices per query.
    #[arg(long)]
    queries: Option<PathBuf>,

    /// Relevance judgments in TREC qrels format.
    #[arg(long)]
    qrels: Option<PathBuf>,

    #[arg(long)]
    k: Option<usize>,

    /// Number of initial documents.
    #[arg(long)]
    t: Option<usize>,

    /// Documents per update group.
    #[arg(long)]
    p: Option<usize>,

    /// Policy to run; repeat for several (zs, ob, sv:l=10, gkl:l=20).
    #[arg(long = "policy")]
    policies: Vec<String>,

    #[arg(long)]
    alpha: Option<f64>,

    /// Score without row normalization.
    #[arg(long)]
    no_normalize: bool,

    /// Recall levels for interpolated average precision.
    #[arg(long)]
    n_points: Option<usize>,

    #[arg(long)]
    seed: Option<u64>,

    /// Output directory for results.csv, map.dat and time.dat.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Use at most this many documents of the collection.
    #[arg(long)]
    max_docs: Option<usize>,

    /// SMART weighting, documents then queries.
    #[arg(long)]
    weighting: Option<String>,

    /// Write zeros in the timing columns for byte-identical reruns.
    #[arg(long)]
    deterministic: bool,
}

fn build_config(args: &Args) -> Result<ExperimentConfig> {
    let mut config = match &args.preset {
        Some(name) => name.parse::<Preset>()?.config(),
        None => ExperimentConfig::default(),
    };
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        config.apply_file(&text)?;
    }
    let mut set = |key: &str, value: Option<String>| -> Result<()> {
        if let Some(v) = value {
            config.set(key, &v)?;
        }
        Ok(())
    };
    let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string());
    set("matrix", path(&args.matrix))?;
    set("queries", path(&args.queries))?;
    set("qrels", path(&args.qrels))?;
    set("k", args.k.map(|v| v.to_string()))?;
    set("t", args.t.map(|v| v.to_string()))?;
    set("p", args.p.map(|v| v.to_string()))?;
    set("alpha", args.alpha.map(|v| v.to_string()))?;
    set("n-points", args.n_points.map(|v| v.to_string()))?;
    set("seed", args.seed.map(|v| v.to_string()))?;
    set("out", path(&args.out))?;
    set("max-docs", args.max_docs.map(|v| v.to_string()))?;
    set("weighting", args.weighting.clone())?;
    if args.no_normalize {
        config.normalize = false;
    }
    if args.deterministic {
        config.deterministic = true;
    }
    if !args.policies.is_empty() {
        config.policies = args
            .policies
            .iter()
            .map(|s| s.parse::<PolicySpec>())
            .collect::<Result<_, _>>()?;
    }
    Ok(config)
}

fn run() -> Result<()> {
    let args = Args::parse();
    let config = build_config(&args)?;
    if let Some(name) = &args.preset {
        if !name.parse::<Preset>()?.desk_scale() {
            eprintln!("warning: preset {name} needs far more memory and time than a desktop run");
        }
    }
    let output = run_experiment(&config)?;
    println!("{:>5} {:>7} {:>14} {:>8} {:>12}", "step", "n_docs", "policy", "map", "cum_time_s");
    for r in &output.records {
        for p in &r.policies {
            let time = if config.deterministic { 0.0 } else { p.cum_time.as_secs_f64() };
            println!("{:>5} {:>7} {:>14} {:>8.4} {:>12.6}", r.step, r.n_docs, p.policy, p.map, time);
        }
    }
    if let Some(dir) = &config.out {
        println!("wrote {}", dir.join("results.csv").display());
    }
    Ok(())
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
