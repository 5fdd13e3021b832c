use std::fs;
use std::path::Path;
use std::process::Command;

use chi0_emos::dataset::ForecastDataset;
use chi0_emos::synthetic::{generate_station, SyntheticConfig};
use chi0_emos::Family;
use chi0_emos_cli::pipeline::run_pipeline;
use chi0_emos_cli::{RunConfig, Stage};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn dataset(days: &[usize], members: usize, seed: u64) -> ForecastDataset<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let stations = days
        .iter()
        .enumerate()
        .map(|(i, &d)| {
            let cfg = SyntheticConfig { days: d, member_count: members, ..SyntheticConfig::default() };
            generate_station(&format!("S{}", i + 1), &cfg, &mut rng).series
        })
        .collect();
    ForecastDataset::new(members, stations).unwrap()
}

fn config(out: &Path, families: &[Family]) -> RunConfig {
    RunConfig {
        out: out.to_path_buf(),
        families: families.to_vec(),
        seed: Some(42),
        max_evals: 300,
        ..RunConfig::default()
    }
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

fn column(header: &[String], rows: &[Vec<String>], name: &str) -> Vec<f64> {
    let k = header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"));
    rows.iter().map(|r| r[k].parse().unwrap()).collect()
}

#[test]
fn minimal_run_gives_one_row_table() {
    let dir = tempfile::tempdir().unwrap();
    let data = dataset(&[31], 10, 1);
    let report = run_pipeline(&config(dir.path(), &[Family::Chi0]), &data, Stage::Compare).unwrap();
    assert!(report.succeeded(), "{:?}", report.failures);

    let (header, rows) = read_csv(&dir.path().join("summary_crps.csv"));
    assert_eq!(
        header,
        ["station", "n_days", "gev0_mean", "gev0_max", "csg0_mean", "csg0_max", "chi0_mean", "chi0_max", "ens_mean", "ens_max"]
    );
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][1], "1");
    // families not run are left empty
    assert_eq!(rows[0][2], "");

    let (bh, brows) = read_csv(&dir.path().join("summary_brier.csv"));
    assert_eq!(bh, ["station", "threshold", "forecaster", "mean_bs", "mcb", "dsc", "unc"]);
    assert_eq!(brows.len(), 4 * 2);
    for r in &brows {
        let v: Vec<f64> = r[3..].iter().map(|s| s.parse().unwrap()).collect();
        assert!((v[0] - (v[1] - v[2] + v[3])).abs() < 1e-12);
    }
}

#[test]
fn summary_means_match_case_files() {
    let dir = tempfile::tempdir().unwrap();
    let data = dataset(&[36, 34], 8, 2);
    let cfg = config(dir.path(), &[Family::Chi0, Family::Csg0]);
    let report = run_pipeline(&cfg, &data, Stage::Compare).unwrap();
    assert!(report.succeeded(), "{:?}", report.failures);
    let (header, rows) = read_csv(&dir.path().join("summary_crps.csv"));
    for row in &rows {
        for label in ["chi0", "csg0", "ens"] {
            let (ch, crows) = read_csv(&dir.path().join(format!("cases_{}_{label}.csv", row[0])));
            let crps = column(&ch, &crows, "crps");
            assert_eq!(crps.len().to_string(), row[1]);
            let mean = crps.iter().sum::<f64>() / crps.len() as f64;
            let max = crps.iter().copied().fold(f64::MIN, f64::max);
            let k = header.iter().position(|h| *h == format!("{label}_mean")).unwrap();
            assert!((row[k].parse::<f64>().unwrap() - mean).abs() < 1e-9);
            assert_eq!(row[k + 1].parse::<f64>().unwrap(), max);
        }
    }
    let table = fs::read_to_string(dir.path().join("table_crps.txt")).unwrap();
    let first = table.lines().nth(1).unwrap();
    assert!(first.split_whitespace().skip(2).filter(|v| *v != "-").all(|v| v.split('.').nth(1).unwrap().len() == 4));
}

#[test]
fn short_station_is_a_recorded_failure() {
    let dir = tempfile::tempdir().unwrap();
    let data = dataset(&[31, 12], 5, 3);
    let report = run_pipeline(&config(dir.path(), &[Family::Chi0]), &data, Stage::Compare).unwrap();
    assert!(!report.succeeded());
    let failed: Vec<(&str, &str)> = report
        .failures
        .iter()
        .map(|f| (f.station.as_str(), f.forecaster.as_str()))
        .collect();
    assert_eq!(failed, [("S2", "chi0"), ("S2", "ens")]);
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("failures.json")).unwrap()).unwrap();
    assert_eq!(manifest.as_array().unwrap().len(), 2);
    assert_eq!(manifest[0]["station"], "S2");
    // the healthy station still gets its row
    let (_, rows) = read_csv(&dir.path().join("summary_crps.csv"));
    assert_eq!(rows.len(), 2);
    assert_ne!(rows[0][6], "");
}

#[test]
fn reruns_are_byte_identical() {
    let data = dataset(&[33, 32], 6, 4);
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let families = [Family::Chi0, Family::Gev0];
    run_pipeline(&config(a.path(), &families), &data, Stage::Verify).unwrap();
    run_pipeline(&config(b.path(), &families), &data, Stage::Verify).unwrap();
    for name in ["summary_crps.csv", "summary_brier.csv", "cases_S1_chi0.csv", "cases_S2_ens.csv", "plots/pit_S1_gev0.svg"] {
        assert_eq!(fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap(), "{name}");
    }
}

#[test]
fn plots_are_well_formed_xml() {
    let dir = tempfile::tempdir().unwrap();
    let data = dataset(&[40], 9, 5);
    let report = run_pipeline(&config(dir.path(), &[Family::Chi0]), &data, Stage::Verify).unwrap();
    assert!(report.succeeded(), "{:?}", report.failures);
    let plots: Vec<_> = fs::read_dir(dir.path().join("plots")).unwrap().map(|e| e.unwrap().path()).collect();
    // pit + rank + 2 forecasters x 4 thresholds
    assert_eq!(plots.len(), 1 + 1 + 8);
    for p in plots {
        let text = fs::read_to_string(&p).unwrap();
        let doc = roxmltree::Document::parse(&text).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        assert_eq!(doc.root_element().tag_name().name(), "svg");
    }
    let rank = fs::read_to_string(dir.path().join("plots/rank_S1.svg")).unwrap();
    assert_eq!(rank.matches(r#"class="bar""#).count(), 10);
}

#[test]
fn verify_requires_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let data = dataset(&[31], 3, 6);
    let mut cfg = config(dir.path(), &[Family::Chi0]);
    cfg.seed = None;
    assert!(run_pipeline(&cfg, &data, Stage::Verify).is_err());
    assert!(run_pipeline(&cfg, &data, Stage::Fit).is_ok());
    assert!(dir.path().join("coefficients_S1_chi0.csv").exists());
    assert!(!dir.path().join("cases_S1_chi0.csv").exists());
}

#[test]
fn binary_exit_status_reflects_failures() {
    let dir = tempfile::tempdir().unwrap();
    let exe = env!("CARGO_BIN_EXE_chi0-emos");
    let good = dir.path().join("good.csv");
    let bad = dir.path().join("bad.csv");
    dataset(&[31], 4, 7).write_csv(fs::File::create(&good).unwrap()).unwrap();
    dataset(&[31, 5], 4, 7).write_csv(fs::File::create(&bad).unwrap()).unwrap();
    let config_file = dir.path().join("run.conf");
    fs::write(&config_file, "families = chi0\nmax_evals = 200\n").unwrap();

    let run = |data: &Path, out: &str| {
        Command::new(exe)
            .args(["compare", "--config"])
            .arg(&config_file)
            .arg("--data")
            .arg(data)
            .arg("--out")
            .arg(dir.path().join(out))
            .output()
            .unwrap()
    };
    let ok = run(&good, "ok");
    assert!(ok.status.success(), "{}", String::from_utf8_lossy(&ok.stderr));
    let failed = run(&bad, "failed");
    assert_eq!(failed.status.code(), Some(1));
    assert!(dir.path().join("failed/failures.json").exists());

    let no_seed = Command::new(exe)
        .args(["verify", "--data"])
        .arg(&good)
        .arg("--out")
        .arg(dir.path().join("v"))
        .output()
        .unwrap();
    assert_eq!(no_seed.status.code(), Some(2));
}
