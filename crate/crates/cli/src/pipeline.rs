//! Station × forecaster pipeline: rolling fits, per-case scores, summary
//! tables, calibration plots and the failure manifest.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use chi0_emos::dataset::{DailyRecord, StationSeries};
use chi0_emos::emos::{rolling_forecast_records, verification_days, RollingPrediction};
use chi0_emos::scoring::{brier_decomposition, crps_distribution, crps_ensemble, ensemble_event_frequency, event_probability};
use chi0_emos::verification::{histogram, pit, reliability_diagram, verification_rank};
use chi0_emos::{Dataset, Family, Predictive, PredictiveDistribution, RollingConfig, ScoreReport, TieBreak, TrainConfig};
use chrono::NaiveDate;
use log::{info, warn};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::config::{ConfigError, RunConfig};
use crate::svg::{BarChart, ReliabilityPlot};

/// Environment variable capping the worker pool size.
pub const THREADS_ENV: &str = "CHI0_EMOS_THREADS";

/// Label of the raw-ensemble forecaster in tables and file names.
pub const ENSEMBLE: &str = "ens";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    /// Rolling coefficient fits only.
    Fit,
    /// Fits plus per-case predictive distributions and scores.
    Predict,
    /// Adds the raw ensemble and the CRPS / Brier summary tables.
    Compare,
    /// Adds PIT values, verification ranks and plots; needs a seed.
    Verify,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Fit => "fit",
            Stage::Predict => "predict",
            Stage::Compare => "compare",
            Stage::Verify => "verify",
        }
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("verify runs produce randomized PIT values and need an explicit seed")]
    MissingSeed,
    #[error("invalid {THREADS_ENV} value {0:?}")]
    Threads(String),
    #[error("cannot build worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

/// A station/forecaster cell that could not be completed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellFailure {
    pub station: String,
    pub forecaster: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineReport {
    pub cells: usize,
    pub failures: Vec<CellFailure>,
    pub non_converged_windows: usize,
}

impl PipelineReport {
    pub fn succeeded(&self) -> bool {
        self.failures.is_empty()
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Worker count from [`THREADS_ENV`]; `None` leaves the choice to rayon.
pub fn thread_cap() -> Result<Option<usize>, PipelineError> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(PipelineError::Threads(v)),
        },
        Err(_) => Ok(None),
    }
}

/// File-name-safe form of a station id.
pub fn file_stem(id: &str) -> String {
    id.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

// FNV-1a, stable across platforms and releases
fn stream_seed(seed: u64, station: &str, forecaster: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let bytes = seed
        .to_le_bytes()
        .into_iter()
        .chain(station.bytes())
        .chain([0u8])
        .chain(forecaster.bytes());
    for b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

#[derive(Debug, Clone, PartialEq)]
struct CaseRow {
    date: NaiveDate,
    observation: f64,
    crps: f64,
    event_probs: Vec<f64>,
    pit: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
struct FamilyCell {
    predictions: Vec<RollingPrediction<f64>>,
    rows: Vec<CaseRow>,
}

#[derive(Debug, Clone, PartialEq)]
struct EnsembleRow {
    date: NaiveDate,
    observation: f64,
    mean: f64,
    sd: f64,
    crps: f64,
    event_freqs: Vec<f64>,
    rank: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
enum CellData {
    Family(Family, FamilyCell),
    Ensemble(Vec<EnsembleRow>),
}

#[derive(Debug, Clone, Copy)]
enum Job<'a> {
    Family(&'a StationSeries<f64>, Family),
    Ensemble(&'a StationSeries<f64>),
}

impl Job<'_> {
    fn station(&self) -> &str {
        match self {
            Job::Family(s, _) | Job::Ensemble(s) => &s.id,
        }
    }

    fn label(&self) -> &'static str {
        match self {
            Job::Family(_, f) => f.name(),
            Job::Ensemble(_) => ENSEMBLE,
        }
    }
}

struct Context<'a> {
    config: &'a RunConfig,
    stage: Stage,
    seed: u64,
    member_count: usize,
    out: &'a Path,
}

fn rolling_config(config: &RunConfig) -> RollingConfig<f64> {
    RollingConfig {
        window_size: config.window,
        warm_start: config.warm_start,
        train: TrainConfig {
            simplex: config.simplex(),
            quadrature: config.quadrature(),
            climatology: false,
        },
    }
}

fn run_family(ctx: &Context, series: &StationSeries<f64>, family: Family) -> Result<FamilyCell, String> {
    let predictions =
        rolling_forecast_records(&series.records, &series.id, family, &rolling_config(ctx.config)).map_err(|e| e.to_string())?;
    let mut rows = Vec::new();
    if ctx.stage >= Stage::Predict {
        let spec = ctx.config.quadrature();
        let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(ctx.seed, &series.id, family.name()));
        for p in &predictions {
            let dist = &p.distribution;
            let crps = crps_distribution(dist, p.observation, &spec).map_err(|e| format!("{}: CRPS: {e}", p.date))?;
            let event_probs = ctx
                .config
                .thresholds
                .iter()
                .map(|&t| event_probability(dist, t))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| format!("{}: {e}", p.date))?;
            let pit = if ctx.stage >= Stage::Verify {
                Some(pit(dist, p.observation, &mut rng).map_err(|e| format!("{}: PIT: {e}", p.date))?.value)
            } else {
                None
            };
            rows.push(CaseRow {
                date: p.date,
                observation: p.observation,
                crps,
                event_probs,
                pit,
            });
        }
    }
    Ok(FamilyCell { predictions, rows })
}

fn run_ensemble(ctx: &Context, series: &StationSeries<f64>) -> Result<Vec<EnsembleRow>, String> {
    let days = verification_days(&series.records, ctx.config.window);
    if days.is_empty() {
        return Err(format!("station {} has no run of {} consecutive days", series.id, ctx.config.window + 1));
    }
    let tie_break: TieBreak = ctx.config.tie_break.into();
    let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(ctx.seed, &series.id, ENSEMBLE));
    days.iter()
        .map(|&t| {
            let r: &DailyRecord<f64> = &series.records[t];
            let m = r.members.len() as f64;
            let mean = r.members.iter().sum::<f64>() / m;
            let sd = if r.members.len() > 1 {
                (r.members.iter().map(|f| (f - mean).powi(2)).sum::<f64>() / (m - 1.0)).sqrt()
            } else {
                0.0
            };
            let crps = crps_ensemble(&r.members, r.observation).map_err(|e| format!("{}: {e}", r.date))?;
            let event_freqs = ctx
                .config
                .thresholds
                .iter()
                .map(|&t| ensemble_event_frequency(&r.members, t))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| format!("{}: {e}", r.date))?;
            let rank = if ctx.stage >= Stage::Verify {
                Some(verification_rank(&r.members, r.observation, tie_break, &mut rng).map_err(|e| e.to_string())?)
            } else {
                None
            };
            Ok(EnsembleRow {
                date: r.date,
                observation: r.observation,
                mean,
                sd,
                crps,
                event_freqs,
                rank,
            })
        })
        .collect()
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>, String> {
    csv::Writer::from_path(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn write_family_files(ctx: &Context, station: &str, family: Family, cell: &FamilyCell) -> Result<(), String> {
    let stem = format!("{}_{}", file_stem(station), family.name());
    let fail = |e: csv::Error| e.to_string();

    let path = ctx.out.join(format!("coefficients_{stem}.csv"));
    let mut w = csv_writer(&path)?;
    w.write_record(["date", "a", "b", "c", "d", "extra", "converged", "evals", "start_objective", "final_objective"])
        .map_err(fail)?;
    for p in &cell.predictions {
        let c = &p.coefficients;
        let d = &p.diagnostics;
        w.write_record([
            p.date.to_string(),
            c.a.to_string(),
            c.b.to_string(),
            c.c.to_string(),
            c.d.to_string(),
            c.extra.to_string(),
            d.converged.to_string(),
            d.evals.to_string(),
            d.start_objective.to_string(),
            d.final_objective.to_string(),
        ])
        .map_err(fail)?;
    }
    w.flush().map_err(|e| e.to_string())?;

    if ctx.stage < Stage::Predict {
        return Ok(());
    }
    let path = ctx.out.join(format!("cases_{stem}.csv"));
    let mut w = csv_writer(&path)?;
    let mut header: Vec<String> = vec!["date".into(), "obs".into()];
    header.extend(PredictiveDistribution::<f64>::parameter_names(family).iter().map(|s| s.to_string()));
    header.push("p_zero".into());
    header.push("crps".into());
    header.extend(ctx.config.thresholds.iter().map(|t| format!("p_gt_{t}")));
    if ctx.stage >= Stage::Verify {
        header.push("pit".into());
    }
    w.write_record(&header).map_err(fail)?;
    for (p, row) in cell.predictions.iter().zip(&cell.rows) {
        let mut rec = vec![row.date.to_string(), row.observation.to_string()];
        rec.extend(p.distribution.parameters().iter().map(f64::to_string));
        rec.push(p.distribution.point_mass_at_zero().to_string());
        rec.push(row.crps.to_string());
        rec.extend(row.event_probs.iter().map(f64::to_string));
        if let Some(v) = row.pit {
            rec.push(v.to_string());
        }
        w.write_record(&rec).map_err(fail)?;
    }
    w.flush().map_err(|e| e.to_string())
}

fn write_ensemble_file(ctx: &Context, station: &str, rows: &[EnsembleRow]) -> Result<(), String> {
    let path = ctx.out.join(format!("cases_{}_{ENSEMBLE}.csv", file_stem(station)));
    let mut w = csv_writer(&path)?;
    let fail = |e: csv::Error| e.to_string();
    let mut header: Vec<String> = vec!["date".into(), "obs".into(), "mean".into(), "sd".into(), "crps".into()];
    header.extend(ctx.config.thresholds.iter().map(|t| format!("p_gt_{t}")));
    if ctx.stage >= Stage::Verify {
        header.push("rank".into());
    }
    w.write_record(&header).map_err(fail)?;
    for r in rows {
        let mut rec = vec![
            r.date.to_string(),
            r.observation.to_string(),
            r.mean.to_string(),
            r.sd.to_string(),
            r.crps.to_string(),
        ];
        rec.extend(r.event_freqs.iter().map(f64::to_string));
        if let Some(k) = r.rank {
            rec.push(k.to_string());
        }
        w.write_record(&rec).map_err(fail)?;
    }
    w.flush().map_err(|e| e.to_string())
}

fn write_text(path: &Path, text: &str) -> Result<(), String> {
    fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()))
}

fn write_cell_plots(ctx: &Context, station: &str, cell: &CellData) -> Result<(), String> {
    let plots = ctx.out.join("plots");
    let stem = file_stem(station);
    match cell {
        CellData::Family(family, data) => {
            let values: Vec<f64> = data.rows.iter().filter_map(|r| r.pit).collect();
            let bins = ctx.config.pit_bins;
            let counts = histogram(&values, bins).map_err(|e| e.to_string())?;
            let labels = (0..bins).map(|k| format!("{:.2}", (k + 1) as f64 / bins as f64)).collect();
            let chart = BarChart::counts(&format!("PIT histogram, {station}, {family}"), "PIT", labels, &counts);
            let svg = chart.to_svg().map_err(|e| e.to_string())?;
            write_text(&plots.join(format!("pit_{stem}_{}.svg", family.name())), &svg)
        }
        CellData::Ensemble(rows) => {
            let m = ctx.member_count;
            let ranks: Vec<usize> = rows.iter().filter_map(|r| r.rank).collect();
            let hist = chi0_emos::RankHistogram::from_ranks(&ranks, m).map_err(|e| e.to_string())?;
            let labels = (1..=m + 1).map(|k| k.to_string()).collect();
            let chart = BarChart::counts(&format!("Verification rank histogram, {station}"), "rank", labels, &hist.counts);
            let svg = chart.to_svg().map_err(|e| e.to_string())?;
            write_text(&plots.join(format!("rank_{stem}.svg")), &svg)
        }
    }
}

fn run_job(ctx: &Context, job: Job) -> Result<CellData, String> {
    let data = match job {
        Job::Family(series, family) => {
            let cell = run_family(ctx, series, family)?;
            write_family_files(ctx, &series.id, family, &cell)?;
            CellData::Family(family, cell)
        }
        Job::Ensemble(series) => {
            let rows = run_ensemble(ctx, series)?;
            write_ensemble_file(ctx, &series.id, &rows)?;
            CellData::Ensemble(rows)
        }
    };
    if ctx.stage >= Stage::Verify {
        write_cell_plots(ctx, job.station(), &data)?;
    }
    Ok(data)
}

/// Runs every station × forecaster cell and writes all artifacts under `config.out`.
pub fn run_pipeline(config: &RunConfig, dataset: &Dataset, stage: Stage) -> Result<PipelineReport, PipelineError> {
    config.validate()?;
    let seed = match (stage, config.seed) {
        (_, Some(s)) => s,
        (Stage::Verify, None) => return Err(PipelineError::MissingSeed),
        (_, None) => 0,
    };
    let out = config.out.as_path();
    fs::create_dir_all(out).map_err(io_err(out))?;
    if stage >= Stage::Verify {
        let plots = out.join("plots");
        fs::create_dir_all(&plots).map_err(io_err(&plots))?;
    }

    let mut jobs = Vec::new();
    for series in &dataset.stations {
        for &family in &config.families {
            jobs.push(Job::Family(series, family));
        }
        if stage >= Stage::Compare {
            jobs.push(Job::Ensemble(series));
        }
    }
    let ctx = Context {
        config,
        stage,
        seed,
        member_count: dataset.member_count,
        out,
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    let threads = thread_cap()?;
    if let Some(n) = threads {
        pool = pool.num_threads(n);
    }
    let pool = pool.build()?;
    info!("running {} cells on {} worker(s)", jobs.len(), pool.current_num_threads());
    let results: Vec<Result<CellData, String>> = pool.install(|| jobs.par_iter().map(|job| run_job(&ctx, *job)).collect());

    let mut failures = Vec::new();
    let mut non_converged = 0;
    let mut cells: Vec<(&str, Option<CellData>)> = Vec::new();
    for (job, result) in jobs.iter().zip(results) {
        match result {
            Ok(data) => {
                if let CellData::Family(_, cell) = &data {
                    non_converged += cell.predictions.iter().filter(|p| !p.diagnostics.converged).count();
                }
                cells.push((job.label(), Some(data)));
            }
            Err(error) => {
                warn!("{} / {}: {error}", job.station(), job.label());
                failures.push(CellFailure {
                    station: job.station().to_string(),
                    forecaster: job.label().to_string(),
                    error,
                });
                cells.push((job.label(), None));
            }
        }
    }

    if stage >= Stage::Compare {
        let mut per_station = Vec::new();
        let mut rest = cells.as_slice();
        for series in &dataset.stations {
            let n = config.families.len() + 1;
            let (mine, tail) = rest.split_at(n);
            rest = tail;
            per_station.push((series, mine));
        }
        write_summaries(config, out, stage, &per_station, &mut failures)?;
    }

    let report = PipelineReport {
        cells: jobs.len(),
        failures,
        non_converged_windows: non_converged,
    };
    write_manifest(out, &report)?;
    write_metadata(config, out, stage, threads, &report)?;
    Ok(report)
}

fn write_manifest(out: &Path, report: &PipelineReport) -> Result<(), PipelineError> {
    let path = out.join("failures.json");
    let text = serde_json::to_string_pretty(&report.failures).expect("failures serialize");
    fs::write(&path, text + "\n").map_err(io_err(&path))
}

fn write_metadata(
    config: &RunConfig,
    out: &Path,
    stage: Stage,
    threads: Option<usize>,
    report: &PipelineReport,
) -> Result<(), PipelineError> {
    let path = out.join("metadata.json");
    let meta = json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "stage": stage.name(),
        "window": config.window,
        "families": config.families.iter().map(|f| f.name()).collect::<Vec<_>>(),
        "thresholds": config.thresholds,
        "seed": config.seed,
        "warm_start": config.warm_start,
        "tie_break": config.tie_break.name(),
        "pit_bins": config.pit_bins,
        "quadrature": {
            "abs_tol": config.abs_tol,
            "rel_tol": config.rel_tol,
            "max_subdivisions": config.max_subdivisions,
        },
        "optimizer": {
            "method": "nelder-mead",
            "max_evals": config.max_evals,
        },
        "benchmark_extra_parameters": "re-fitted in every window (csg0 shift, gev0 shape)",
        "benchmark_optimizer_note": "benchmarks use the same Nelder-Mead engine as chi0",
        "thread_cap": threads,
        "cells": report.cells,
        "failed_cells": report.failures.len(),
        "non_converged_windows": report.non_converged_windows,
    });
    let text = serde_json::to_string_pretty(&meta).expect("metadata serialize");
    fs::write(&path, text + "\n").map_err(io_err(&path))
}

type StationCells<'a> = (&'a StationSeries<f64>, &'a [(&'a str, Option<CellData>)]);

const CRPS_ORDER: [&str; 4] = ["gev0", "csg0", "chi0", ENSEMBLE];

fn crps_values(cell: &CellData) -> Vec<(String, f64)> {
    match cell {
        CellData::Family(_, c) => c.rows.iter().map(|r| (r.date.to_string(), r.crps)).collect(),
        CellData::Ensemble(rows) => rows.iter().map(|r| (r.date.to_string(), r.crps)).collect(),
    }
}

fn event_forecasts(cell: &CellData, k: usize) -> (Vec<f64>, Vec<f64>) {
    match cell {
        CellData::Family(_, c) => c.rows.iter().map(|r| (r.event_probs[k], r.observation)).unzip(),
        CellData::Ensemble(rows) => rows.iter().map(|r| (r.event_freqs[k], r.observation)).unzip(),
    }
}

fn find<'a>(cells: &'a [(&str, Option<CellData>)], label: &str) -> Option<&'a CellData> {
    cells.iter().find(|(l, _)| *l == label).and_then(|(_, d)| d.as_ref())
}

fn write_summaries(
    config: &RunConfig,
    out: &Path,
    stage: Stage,
    stations: &[StationCells],
    failures: &mut Vec<CellFailure>,
) -> Result<(), PipelineError> {
    let crps_path = out.join("summary_crps.csv");
    let brier_path = out.join("summary_brier.csv");
    let csv_io = |path: &Path| {
        let path = path.to_path_buf();
        move |e: csv::Error| PipelineError::Io {
            path,
            source: io::Error::other(e),
        }
    };

    let mut crps_csv = csv::Writer::from_path(&crps_path).map_err(csv_io(&crps_path))?;
    let mut header = vec!["station".to_string(), "n_days".to_string()];
    for label in CRPS_ORDER {
        header.push(format!("{label}_mean"));
        header.push(format!("{label}_max"));
    }
    crps_csv.write_record(&header).map_err(csv_io(&crps_path))?;
    let mut crps_table = vec![header.clone()];

    let mut brier_csv = csv::Writer::from_path(&brier_path).map_err(csv_io(&brier_path))?;
    let brier_header = ["station", "threshold", "forecaster", "mean_bs", "mcb", "dsc", "unc"];
    brier_csv.write_record(brier_header).map_err(csv_io(&brier_path))?;
    let mut brier_table = vec![brier_header.iter().map(|s| s.to_string()).collect::<Vec<_>>()];

    for (series, cells) in stations {
        let n_days = verification_days(&series.records, config.window).len();
        let mut row = vec![series.id.clone(), n_days.to_string()];
        let mut table_row = row.clone();
        for label in CRPS_ORDER {
            let report = find(cells, label).map(|c| ScoreReport::new(crps_values(c)));
            match report {
                Some(Ok(r)) => {
                    row.extend([r.mean.to_string(), r.max.to_string()]);
                    table_row.extend([format!("{:.4}", r.mean), format!("{:.4}", r.max)]);
                }
                other => {
                    if let Some(Err(e)) = other {
                        failures.push(CellFailure {
                            station: series.id.clone(),
                            forecaster: label.to_string(),
                            error: format!("CRPS summary: {e}"),
                        });
                    }
                    row.extend([String::new(), String::new()]);
                    table_row.extend(["-".to_string(), "-".to_string()]);
                }
            }
        }
        crps_csv.write_record(&row).map_err(csv_io(&crps_path))?;
        crps_table.push(table_row);

        for (k, &tau) in config.thresholds.iter().enumerate() {
            for label in CRPS_ORDER {
                if !cells.iter().any(|(l, _)| *l == label) {
                    continue;
                }
                let mut row = vec![series.id.clone(), tau.to_string(), label.to_string()];
                let mut table_row = row.clone();
                let decomposition = find(cells, label).map(|c| {
                    let (probs, obs) = event_forecasts(c, k);
                    let outcomes: Vec<f64> = obs.iter().map(|&y| if y > tau { 1.0 } else { 0.0 }).collect();
                    brier_decomposition(&probs, &outcomes).map(|d| (d, probs, outcomes))
                });
                match decomposition {
                    Some(Ok((d, probs, outcomes))) => {
                        let values = [d.mean_brier, d.mcb, d.dsc, d.unc];
                        row.extend(values.iter().map(f64::to_string));
                        table_row.extend(values.iter().map(|v| format!("{v:.4}")));
                        if stage >= Stage::Verify {
                            if let Err(e) = write_reliability(out, &series.id, label, tau, &probs, &outcomes) {
                                failures.push(CellFailure {
                                    station: series.id.clone(),
                                    forecaster: label.to_string(),
                                    error: format!("reliability diagram at {tau}: {e}"),
                                });
                            }
                        }
                    }
                    other => {
                        if let Some(Err(e)) = other {
                            failures.push(CellFailure {
                                station: series.id.clone(),
                                forecaster: label.to_string(),
                                error: format!("Brier decomposition at {tau}: {e}"),
                            });
                        }
                        row.extend(std::iter::repeat_n(String::new(), 4));
                        table_row.extend(std::iter::repeat_n("-".to_string(), 4));
                    }
                }
                brier_csv.write_record(&row).map_err(csv_io(&brier_path))?;
                brier_table.push(table_row);
            }
        }
    }
    crps_csv.flush().map_err(io_err(&crps_path))?;
    brier_csv.flush().map_err(io_err(&brier_path))?;

    let path = out.join("table_crps.txt");
    fs::write(&path, align(&crps_table)).map_err(io_err(&path))?;
    let path = out.join("table_brier.txt");
    fs::write(&path, align(&brier_table)).map_err(io_err(&path))?;
    Ok(())
}

fn write_reliability(out: &Path, station: &str, label: &str, tau: f64, probs: &[f64], outcomes: &[f64]) -> Result<(), String> {
    let data = reliability_diagram(probs, outcomes).map_err(|e| e.to_string())?;
    let plot = ReliabilityPlot {
        title: format!("Reliability, {station}, {label}, > {tau} mm"),
        segments: data
            .bins
            .iter()
            .map(|b| (b.forecast_range.0, b.forecast_range.1, b.fitted_cep))
            .collect(),
        points: data.pairs,
    };
    let svg = plot.to_svg().map_err(|e| e.to_string())?;
    let path = out
        .join("plots")
        .join(format!("reliability_{}_{label}_{tau}.svg", file_stem(station)));
    write_text(&path, &svg)
}

/// Right-aligned fixed-width text table.
fn align(rows: &[Vec<String>]) -> String {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| rows.iter().filter_map(|r| r.get(c)).map(String::len).max().unwrap_or(0))
        .collect();
    let mut text = String::new();
    for row in rows {
        let cells: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(c, v)| if c == 0 { format!("{v:<w$}", w = widths[c]) } else { format!("{v:>w$}", w = widths[c]) })
            .collect();
        text.push_str(cells.join("  ").trim_end());
        text.push('\n');
    }
    text
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stream_seeds_differ_by_cell() {
        let a = stream_seed(1, "A", "chi0");
        assert_eq!(a, stream_seed(1, "A", "chi0"));
        assert_ne!(a, stream_seed(2, "A", "chi0"));
        assert_ne!(a, stream_seed(1, "B", "chi0"));
        assert_ne!(a, stream_seed(1, "A", "gev0"));
        assert_ne!(stream_seed(1, "Ac", "hi0"), a);
    }

    #[test]
    fn file_stems_are_safe() {
        assert_eq!(file_stem("Hannover/Flughafen 1"), "Hannover_Flughafen_1");
        assert_eq!(file_stem("a-b_c"), "a-b_c");
    }

    #[test]
    fn table_alignment() {
        let t = align(&[vec!["s".into(), "x".into()], vec!["long".into(), "1.2345".into()]]);
        assert_eq!(t, "s          x\nlong  1.2345\n");
    }
}
