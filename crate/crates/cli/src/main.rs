use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use chi0_emos::dataset::ForecastDataset;
use chi0_emos::synthetic::{generate_station, SyntheticConfig};
use chi0_emos_cli::config::{parse_families, parse_thresholds, RunConfig};
use chi0_emos_cli::{ingest_csv, run_pipeline, Stage};
use clap::{Args, Parser, Subcommand};
use log::info;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Parser)]
#[command(name = "chi0-emos", version, about = "Rolling EMOS postprocessing of precipitation ensembles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit rolling-window coefficients for every station and family.
    Fit(RunArgs),
    /// Fit and write per-day predictive distributions with their scores.
    Predict(RunArgs),
    /// Predict and write CRPS / Brier summary tables including the raw ensemble.
    Compare(RunArgs),
    /// Compare and add PIT / rank histograms and reliability diagrams (needs --seed).
    Verify(RunArgs),
    /// Write a synthetic dataset with a known Chi0 link.
    Simulate(SimulateArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Flat `key = value` config file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Input CSV with columns station,date,obs,m1..mK.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Rolling training window in days.
    #[arg(long)]
    window: Option<usize>,
    /// Comma-separated families (chi0, csg0, gev0).
    #[arg(long)]
    families: Option<String>,
    /// Comma-separated precipitation thresholds in mm.
    #[arg(long)]
    thresholds: Option<String>,
    /// Master seed for randomized PIT values and rank ties.
    #[arg(long)]
    seed: Option<u64>,
    /// Start each window from the previous window's optimum.
    #[arg(long)]
    warm_start: bool,
}

#[derive(Args)]
struct SimulateArgs {
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 1)]
    stations: usize,
    #[arg(long, default_value_t = 200)]
    days: usize,
    #[arg(long, default_value_t = 50)]
    members: usize,
    #[arg(long)]
    seed: u64,
}

fn build_config(args: &RunArgs) -> Result<RunConfig> {
    let mut config = RunConfig::default();
    if let Some(path) = &args.config {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        config
            .apply_file_text(&text)
            .with_context(|| format!("in {}", path.display()))?;
    }
    if let Some(v) = &args.data {
        config.data = Some(v.clone());
    }
    if let Some(v) = &args.out {
        config.out = v.clone();
    }
    if let Some(v) = args.window {
        config.window = v;
    }
    if let Some(v) = &args.families {
        config.families = parse_families(v)?;
    }
    if let Some(v) = &args.thresholds {
        config.thresholds = parse_thresholds(v)?;
    }
    if let Some(v) = args.seed {
        config.seed = Some(v);
    }
    if args.warm_start {
        config.warm_start = true;
    }
    config.validate()?;
    Ok(config)
}

fn run(stage: Stage, args: &RunArgs) -> Result<bool> {
    let config = build_config(args)?;
    if stage == Stage::Verify && config.seed.is_none() {
        bail!("verify needs --seed (or `seed = ...` in the config file)");
    }
    let Some(data) = &config.data else {
        bail!("no input data: pass --data or set `data` in the config file");
    };
    let ingested = ingest_csv(data)?;
    info!(
        "{} station(s), {} member(s), {} row(s) dropped",
        ingested.dataset.stations.len(),
        ingested.dataset.member_count,
        ingested.dropped_rows
    );
    let report = run_pipeline(&config, &ingested.dataset, stage)?;
    for f in &report.failures {
        eprintln!("failed: {} / {}: {}", f.station, f.forecaster, f.error);
    }
    println!(
        "{} cell(s), {} failed; output in {}",
        report.cells,
        report.failures.len(),
        config.out.display()
    );
    Ok(report.succeeded())
}

fn simulate(args: &SimulateArgs) -> Result<()> {
    let config = SyntheticConfig {
        days: args.days,
        member_count: args.members,
        ..SyntheticConfig::default()
    };
    if args.members == 0 || args.stations == 0 {
        bail!("need at least one station and one member");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let stations = (1..=args.stations)
        .map(|k| generate_station(&format!("S{k:02}"), &config, &mut rng).series)
        .collect();
    let dataset = ForecastDataset::new(args.members, stations)?;
    let file = fs::File::create(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    dataset.write_csv(std::io::BufWriter::new(file))?;
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Fit(a) => run(Stage::Fit, a),
        Command::Predict(a) => run(Stage::Predict, a),
        Command::Compare(a) => run(Stage::Compare, a),
        Command::Verify(a) => run(Stage::Verify, a),
        Command::Simulate(a) => simulate(a).map(|()| true),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
