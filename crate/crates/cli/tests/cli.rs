//! End-to-end checks of the `comdml` binary: golden CSVs, exit codes and the
//! documented command-line examples. Set `COMDML_BLESS=1` to rewrite goldens.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use comdml_cli::ExperimentConfig;

const BIN: &str = env!("CARGO_BIN_EXE_comdml");

fn manifest(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join(rel)
}

fn comdml(args: &[&str], out: &Path) -> Output {
    Command::new(BIN)
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("COMDML_SIM_THREADS")
        .output()
        .expect("binary runs")
}

fn assert_golden(produced: &Path, name: &str) {
    let golden = manifest("tests/golden").join(name);
    let got = std::fs::read_to_string(produced.join(name)).unwrap();
    if std::env::var_os("COMDML_BLESS").is_some() {
        std::fs::write(&golden, &got).unwrap();
    }
    let want = std::fs::read_to_string(&golden).unwrap();
    assert_eq!(got, want, "{name} differs from its golden file");
}

fn config_arg(rel: &str) -> String {
    manifest(rel).to_string_lossy().into_owned()
}

#[test]
fn run_matches_golden_files() {
    let dir = tempfile::tempdir().unwrap();
    let small = config_arg("tests/fixtures/small.toml");
    let out = comdml(&["run", "--config", &small], dir.path());
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    for name in ["timing.csv", "pairs.csv", "learning.csv"] {
        assert_golden(dir.path(), name);
    }
}

#[test]
fn oracle_matches_golden_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = comdml(
        &[
            "oracle",
            "--agents",
            "4",
            "--instances",
            "6",
            "--splits",
            "5",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    assert_golden(dir.path(), "oracle.csv");
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(
        stdout.contains("max ratio") && stdout.contains("mean ratio"),
        "{stdout}"
    );
}

#[test]
fn profile_matches_golden_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = comdml(&["profile"], dir.path());
    assert!(out.status.success());
    assert_golden(dir.path(), "profile.csv");
}

#[test]
fn single_agent_single_round() {
    let dir = tempfile::tempdir().unwrap();
    let out = comdml(
        &["run", "--mode", "timing", "--rounds", "1", "--agents", "1"],
        dir.path(),
    );
    assert!(out.status.success());
    let timing = std::fs::read_to_string(dir.path().join("timing.csv")).unwrap();
    assert_eq!(timing.lines().count(), 2);
    let pairs = std::fs::read_to_string(dir.path().join("pairs.csv")).unwrap();
    assert_eq!(pairs, "round,slow_id,fast_id,split_m,est_s,sim_s\n");
}

#[test]
fn preset_compare_favours_offloading() {
    let dir = tempfile::tempdir().unwrap();
    let preset = config_arg("presets/ten_agents.toml");
    let out = comdml(
        &[
            "run",
            "--config",
            &preset,
            "--compare",
            "comdml,allreduce_no_offload",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    let mut rdr = csv::Reader::from_path(dir.path().join("timing.csv")).unwrap();
    let mut last = std::collections::BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec.unwrap();
        last.insert(rec[0].to_string(), rec[4].parse::<f64>().unwrap());
    }
    assert_eq!(last.len(), 2);
    assert!(last["comdml"] < last["allreduce_no_offload"], "{last:?}");
}

#[test]
fn preset_has_two_agents_per_tier() {
    let cfg = ExperimentConfig::load(&manifest("presets/ten_agents.toml")).unwrap();
    assert_eq!(cfg.agents.count, 10);
    let speeds = cfg.relative_speeds();
    for tier in [4.0, 2.0, 1.0, 0.5, 0.2] {
        assert_eq!(
            speeds.iter().filter(|&&s| s == tier).count(),
            2,
            "tier {tier}"
        );
    }
    assert_eq!(cfg.rounds, 200);
    let churn = cfg.churn.unwrap();
    assert_eq!((churn.fraction, churn.period_rounds), (0.2, 100));
}

#[test]
fn two_agent_oracle_ratio_is_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = comdml(
        &["oracle", "--agents", "2", "--instances", "50"],
        dir.path(),
    );
    assert!(out.status.success());
    let mut rdr = csv::Reader::from_path(dir.path().join("oracle.csv")).unwrap();
    let ratios: Vec<String> = rdr.records().map(|r| r.unwrap()[3].to_string()).collect();
    assert_eq!(ratios.len(), 50);
    assert!(ratios.iter().all(|r| r == "1"), "{ratios:?}");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let code = |args: &[&str]| comdml(args, dir.path()).status.code();

    let bad_churn = config_arg("tests/fixtures/bad_churn.toml");
    let out = comdml(&["run", "--config", &bad_churn], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("churn.fraction"));

    let typo = config_arg("tests/fixtures/typo.toml");
    let out = comdml(&["run", "--config", &typo], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("round"));

    assert_eq!(
        code(&["run", "--config", "/nonexistent/config.toml"]),
        Some(2)
    );
    assert_eq!(code(&["run", "--compare", "comdml,fedsgd"]), Some(2));
    assert_eq!(code(&["run", "--seed", "minus-one"]), Some(2));
    assert_eq!(code(&["launch"]), Some(2));
    assert_eq!(code(&["run", "--rounds", "0"]), Some(2));

    let eleven = config_arg("tests/fixtures/eleven.toml");
    let out = comdml(
        &["oracle", "--config", &eleven, "--instances", "1"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("at most 10"));

    let out = Command::new(BIN)
        .args(["run", "--rounds", "1"])
        .arg("--out")
        .arg(dir.path())
        .env("COMDML_SIM_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn seed_flag_changes_results() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let small = config_arg("tests/fixtures/small.toml");
    assert!(
        comdml(&["run", "--config", &small, "--mode", "learning"], a.path())
            .status
            .success()
    );
    assert!(comdml(
        &["run", "--config", &small, "--mode", "learning", "--seed", "8"],
        b.path()
    )
    .status
    .success());
    let read = |d: &Path| std::fs::read(d.join("learning.csv")).unwrap();
    assert_ne!(read(a.path()), read(b.path()));
}
