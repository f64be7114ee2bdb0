use std::path::{Path, PathBuf};
use std::process::Command;

use evidence_harness::{emit, run, CheckReport, ExperimentConfig, Format};

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn config(name: &str) -> ExperimentConfig {
    ExperimentConfig::load(&configs_dir().join(name)).unwrap()
}

fn duality(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_duality")).args(args).output().unwrap()
}

#[test]
fn every_shipped_config_parses() {
    for entry in std::fs::read_dir(configs_dir()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "json") {
            ExperimentConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        }
    }
}

#[test]
fn exit_codes_follow_outcome() {
    let dir = configs_dir();
    let pass = duality(&["verify-markov", "--config", dir.join("c01_duality_demo.json").to_str().unwrap()]);
    assert_eq!(pass.status.code(), Some(0));
    let report: CheckReport = serde_json::from_slice(&pass.stdout).unwrap();
    assert_eq!(report.sections.len(), 4);

    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.json");
    std::fs::write(
        &bad,
        r#"{"check": "optimal_threshold", "null": {"family": "bernoulli", "theta": [0.5]},
            "alt": {"family": "bernoulli", "theta": [0.7]}, "n": 10,
            "risk": {"pi0": 0.5, "pi1": 0.6, "c1": 1, "c2": 1}}"#,
    )
    .unwrap();
    let out = duality(&["bayes-risk", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("RiskSpec"));

    let wrong = duality(&["sequential", "--config", dir.join("c01_duality_demo.json").to_str().unwrap()]);
    assert_eq!(wrong.status.code(), Some(2));

    let missing = duality(&["verify-markov", "--config", "/nonexistent/config.json"]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn failing_check_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("tight.json");
    // A frozen median that the collapse cannot reach.
    std::fs::write(
        &path,
        r#"{"check": "dawid", "null": {"family": "bernoulli", "theta": [0.5]},
            "mixture": {"family": "bernoulli", "prior": {"kind": "beta", "a": 1, "b": 1}},
            "truth": {"family": "bernoulli", "theta": [0.7]}, "t_max": 50,
            "method": {"kind": "monte_carlo", "reps": 100}, "criteria": {"median_below": -1000}}"#,
    )
    .unwrap();
    let out = duality(&["sequential", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn emitted_files_have_documented_schemas() {
    let tmp = tempfile::tempdir().unwrap();
    let sweep = run(&config("x_threshold_sweep.json")).unwrap();
    let written = emit(&sweep, tmp.path(), &[Format::Json, Format::Csv], false).unwrap();
    let csv = written.iter().find(|p| p.extension().unwrap() == "csv").unwrap();
    let text = std::fs::read_to_string(csv).unwrap();
    assert_eq!(text.lines().next(), Some("t,alpha,beta,risk"));

    let growth = run(&config("c06_redundancy_growth.json")).unwrap();
    let written = emit(&growth, tmp.path(), &[Format::Csv], false).unwrap();
    let text = std::fs::read_to_string(&written[0]).unwrap();
    assert_eq!(text.lines().next(), Some("n,empirical,se,predicted,gap"));

    let trace = run(&config("x_run_eprocess.json")).unwrap();
    let written = emit(&trace, tmp.path(), &[Format::Csv], false).unwrap();
    let text = std::fs::read_to_string(&written[0]).unwrap();
    assert_eq!(text.lines().next(), Some("t,log_b"));
    assert_eq!(text.lines().nth(1), Some("0,0"));
}

#[test]
fn bits_rescale_only_csv_log_columns() {
    let tmp = tempfile::tempdir().unwrap();
    let report = run(&config("c06_redundancy_growth.json")).unwrap();
    let nats = emit(&report, &tmp.path().join("nats"), &[Format::Json, Format::Csv], false).unwrap();
    let bits = emit(&report, &tmp.path().join("bits"), &[Format::Json, Format::Csv], true).unwrap();
    assert_eq!(std::fs::read(&nats[0]).unwrap(), std::fs::read(&bits[0]).unwrap());
    let row = |p: &Path| -> Vec<f64> {
        let text = std::fs::read_to_string(p).unwrap();
        text.lines().nth(1).unwrap().split(',').map(|c| c.parse().unwrap()).collect()
    };
    let (a, b) = (row(&nats[1]), row(&bits[1]));
    assert_eq!(a[0], b[0]);
    for i in 1..5 {
        assert!((a[i] / std::f64::consts::LN_2 - b[i]).abs() <= 1e-12 * a[i].abs().max(1.0));
    }
}

#[test]
fn json_reports_round_trip() {
    for name in ["c01_duality_demo.json", "c09_dawid.json", "x_three_level.json", "x_pointwise_caveat.json"] {
        let report = run(&config(name)).unwrap();
        let text = serde_json::to_string(&report).unwrap();
        let back: CheckReport = serde_json::from_str(&text).unwrap();
        assert_eq!(serde_json::to_string(&back).unwrap(), text);
        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(value, serde_json::to_value(&report).unwrap());
    }
}

#[test]
fn three_level_report_has_three_sections() {
    let report = run(&config("x_three_level.json")).unwrap();
    assert_eq!(report.sections.len(), 3);
    assert!(report.sections[..2].iter().all(|s| s.passed()));
}

#[test]
fn seed_flag_overrides_config_seed() {
    let path = configs_dir().join("x_run_eprocess.json");
    let a = duality(&["sequential", "--config", path.to_str().unwrap(), "--seed", "1"]);
    let b = duality(&["sequential", "--config", path.to_str().unwrap(), "--seed", "2"]);
    let ra: CheckReport = serde_json::from_slice(&a.stdout).unwrap();
    let rb: CheckReport = serde_json::from_slice(&b.stdout).unwrap();
    assert_eq!((ra.seed, rb.seed), (1, 2));
    assert_ne!(ra.sections[0].result, rb.sections[0].result);
}

#[test]
fn suite_reports_worst_exit_code() {
    let tmp = tempfile::tempdir().unwrap();
    for name in ["c01_duality_demo.json", "c03_mixture_certification.json"] {
        std::fs::copy(configs_dir().join(name), tmp.path().join(name)).unwrap();
    }
    let out = duality(&["suite", tmp.path().to_str().unwrap(), "--out", tmp.path().join("out").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(tmp.path().join("out/c01_duality_demo.json").exists());
    std::fs::write(tmp.path().join("broken.json"), "{").unwrap();
    let out = duality(&["suite", tmp.path().to_str().unwrap(), "--out", tmp.path().join("out").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}
