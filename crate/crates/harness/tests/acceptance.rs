//! Acceptance criteria, one test each. Every test prints a single
//! `criterion N ... PASS|FAIL` line before asserting.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use evidence_harness::{run, CheckReport, ExperimentConfig, Status};
use serde_json::Value;

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run_config(name: &str) -> CheckReport {
    let config = ExperimentConfig::load(&configs_dir().join(name)).unwrap();
    run(&config).unwrap()
}

fn verdict(id: &str, title: &str, pass: bool, elapsed: Duration, detail: String) {
    let word = if pass { "PASS" } else { "FAIL" };
    // Written past the test harness capture so every line shows.
    let mut out = std::io::stdout().lock();
    writeln!(out, "criterion {id} {title}: {word} [{:.2}s] {detail}", elapsed.as_secs_f64()).unwrap();
    out.flush().unwrap();
    assert!(pass, "criterion {id} failed: {detail}");
}

fn section<'a>(report: &'a CheckReport, title_prefix: &str) -> &'a Value {
    &report
        .sections
        .iter()
        .find(|s| s.title.starts_with(title_prefix))
        .unwrap_or_else(|| panic!("no section {title_prefix}"))
        .result
}

fn f(v: &Value, key: &str) -> f64 {
    v[key].as_f64().unwrap_or_else(|| panic!("{key} missing in {v}"))
}

#[test]
fn criterion_01_dual_markov_bounds() {
    let start = Instant::now();
    let report = run_config("c01_duality_demo.json");
    let elapsed = start.elapsed();
    let levels = [0.01, 0.05, 0.1, 0.25, 0.5];
    // Exact binomial tail sums of the likelihood-ratio atoms.
    let oracle_h0 = [0.0, 0.0009765625, 0.0107421875, 0.0546875, 0.171875];
    let oracle_h1 = [5.9049e-6, 0.0015903864, 0.0105920784, 0.0473489874, 0.1502683326];
    let mut pass = elapsed < Duration::from_secs(1);
    let mut worst = 0.0f64;
    for (prefix, oracle) in [("Type I", oracle_h0), ("Type II", oracle_h1)] {
        let rows = section(&report, prefix)["levels"].as_array().unwrap();
        for ((row, level), want) in rows.iter().zip(levels).zip(oracle) {
            let p = f(row, "exceed_prob");
            assert_eq!(f(row, "level"), level);
            worst = worst.max((p - want).abs());
            pass &= p <= level + 1e-10 && row["exact"] == Value::Bool(true);
        }
    }
    pass &= worst <= 1e-10;
    verdict(
        "1",
        "dual Markov bounds",
        pass,
        elapsed,
        format!("exact exceedances <= level in both directions; max deviation from oracle {worst:.1e}"),
    );
}

#[test]
fn criterion_02_unit_moments() {
    let start = Instant::now();
    let exact = run_config("c02_unit_moment_exact.json");
    let mc = run_config("c02_unit_moment_mc.json");
    let elapsed = start.elapsed();
    let mut pass = elapsed < Duration::from_secs(10);
    let mut detail = Vec::new();
    for prefix in ["E[B10]", "E[B01]"] {
        let e = section(&exact, prefix);
        let m = section(&mc, prefix);
        let (em, mm, se) = (f(e, "mean"), f(m, "mean"), f(m, "std_error"));
        pass &= (em - 1.0).abs() <= 1e-10;
        pass &= (mm - 1.0).abs() <= 4.0 * se && m["samples"] == 100_000;
        detail.push(format!("{prefix}: exact {em:.12}, mc {mm:.4} ± {se:.4}"));
    }
    verdict("2", "unit-moment identities", pass, elapsed, detail.join("; "));
}

#[test]
fn criterion_03_mixture_certification() {
    let start = Instant::now();
    let cert = run_config("c03_mixture_certification.json");
    let bound = run_config("c03_composite_type2.json");
    let elapsed = start.elapsed();
    let mean = f(section(&cert, "E[B01]"), "mean");
    let rows = section(&bound, "Type II")["levels"].as_array().unwrap().clone();
    let all = rows.iter().all(|r| f(r, "exceed_prob") <= f(r, "level") + 1e-10);
    let pass = (mean - 1.0).abs() <= 1e-10 && all && rows.len() == 5 && elapsed < Duration::from_secs(5);
    verdict(
        "3",
        "mixture certification",
        pass,
        elapsed,
        format!("E_pi1[B01] = {mean:.12}; composite Type II bound holds at {} levels", rows.len()),
    );
}

#[test]
fn criterion_04_bayes_risk_optimality() {
    let start = Instant::now();
    let mut pass = true;
    let mut detail = Vec::new();
    for (suffix, t_star) in [("a", 1.0), ("b", 9.0), ("c", 0.25)] {
        let report = run_config(&format!("c04_optimal_threshold_{suffix}.json"));
        let opt = section(&report, "optimal threshold");
        let got = f(opt, "t_star");
        let in_argmin = report.status == Status::Pass && !opt["argmin_interval"].is_null();
        pass &= in_argmin && (got - t_star).abs() <= 1e-12;
        detail.push(format!("t* = {got} in argmin: {in_argmin}"));
    }
    let elapsed = start.elapsed();
    pass &= elapsed < Duration::from_secs(5);
    verdict("4", "Bayes-risk optimality", pass, elapsed, detail.join("; "));
}

#[test]
fn criterion_05a_expansion_gap_shrinks() {
    let start = Instant::now();
    let report = run_config("c05_bc_convergence.json");
    let elapsed = start.elapsed();
    let rows = section(&report, "empirical against predicted")["rows"].as_array().unwrap().clone();
    let (first, last) = (&rows[0], &rows[rows.len() - 1]);
    let combined = (f(first, "se").powi(2) + f(last, "se").powi(2)).sqrt();
    let shrink = f(first, "gap").abs() - f(last, "gap").abs();
    let pass = shrink > 2.0 * combined && elapsed < Duration::from_secs(120);
    assert_eq!(report.sections.iter().find(|s| s.title == "gap shrinks").unwrap().passed(), pass);
    verdict(
        "5a",
        "expansion gap shrinks with n",
        pass,
        elapsed,
        format!(
            "|gap| n=10: {:.4}, n=1000: {:.4}, reduction {shrink:.4} vs 2 SE {:.4} \
             (the limit of the gap is -ln(2 pi e)/2, not 0)",
            f(first, "gap").abs(),
            f(last, "gap").abs(),
            2.0 * combined
        ),
    );
}

#[test]
fn criterion_05b_expectation_matches_closed_form() {
    let start = Instant::now();
    let report = run_config("c05_bc_convergence.json");
    let elapsed = start.elapsed();
    let rows = section(&report, "empirical against predicted")["rows"].as_array().unwrap().clone();
    let mut pass = elapsed < Duration::from_secs(120);
    let mut detail = Vec::new();
    for row in &rows {
        let n = f(row, "n");
        // E_{θ1}[ln p(X^n|θ0) − ln m1(X^n)] for θ1 = 1, θ0 = 0, σ² = τ² = 1.
        let closed = -n / 2.0 + 0.5 * (1.0 + n).ln();
        let (emp, se) = (f(row, "empirical"), f(row, "se"));
        pass &= (emp - closed).abs() <= 4.0 * se;
        detail.push(format!("n={n}: {emp:.3} ± {se:.3} vs {closed:.3}"));
    }
    verdict("5b", "expectation matches closed form", pass, elapsed, detail.join("; "));
}

#[test]
fn criterion_06_redundancy_growth() {
    let start = Instant::now();
    let report = run_config("c06_redundancy_growth.json");
    let elapsed = start.elapsed();
    let rows = section(&report, "redundancy growth").as_array().unwrap().clone();
    // Band frozen from R(n) = ln(1+n)/2: excess over ln(n)/2 is 0.048 at n = 10.
    let (lo, hi) = (0.0, 0.05);
    let mut pass = rows.len() == 4 && elapsed < Duration::from_secs(1);
    let mut excess = Vec::new();
    for row in &rows {
        let n = f(row, "n");
        let r = f(&row["redundancy"], "value");
        pass &= (r - 0.5 * (1.0 + n).ln()).abs() <= 1e-9;
        let e = f(row, "excess");
        pass &= (lo..=hi).contains(&e);
        excess.push(format!("{e:.6}"));
    }
    verdict(
        "6",
        "redundancy growth",
        pass,
        elapsed,
        format!("R(n) - ln(n)/2 over n = 10..1e4: [{}] within [{lo}, {hi}]", excess.join(", ")),
    );
}

#[test]
fn criterion_07_sequential_validity() {
    let start = Instant::now();
    let report = run_config("c07_optional_stopping.json");
    let elapsed = start.elapsed();
    let row = &section(&report, "running-supremum")["levels"][0];
    let upper = f(row, "ci_upper");
    let pass = f(row, "level") == 0.05
        && row["trials"] == 20_000
        && upper <= 0.05
        && report.config.t_max == Some(1000)
        && elapsed < Duration::from_secs(120);
    verdict(
        "7",
        "sequential validity",
        pass,
        elapsed,
        format!("sup-crossing frequency {:.4}, 99% upper limit {upper:.4} <= 0.05", f(row, "exceed_prob")),
    );
}

#[test]
fn criterion_08_kl_rate() {
    let start = Instant::now();
    let mut pass = true;
    let mut detail = Vec::new();
    for (name, kl) in [("c08_kl_rate_bernoulli.json", 0.082282), ("c08_kl_rate_gaussian.json", 0.5)] {
        let report = run_config(name);
        let result = section(&report, "mean rate");
        let last = result["checkpoints"].as_array().unwrap().last().unwrap().clone();
        let mean = f(&last, "mean_rate");
        pass &= last["t"] == 2000 && result["reps"] == 200;
        pass &= (f(result, "target_kl") - kl).abs() <= 1e-6;
        pass &= (mean - kl).abs() <= 0.1 * kl;
        detail.push(format!("mean rate {mean:.5} vs {kl}"));
    }
    let elapsed = start.elapsed();
    pass &= elapsed < Duration::from_secs(60);
    verdict("8", "KL rate", pass, elapsed, detail.join("; "));
}

#[test]
fn criterion_09_mixture_collapse() {
    let start = Instant::now();
    let report = run_config("c09_dawid.json");
    let elapsed = start.elapsed();
    let result = section(&report, "log Q/R increments");
    let terminal: Vec<f64> = result["terminal_log_b01"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    // -0.5 · 500 · KL(0.7‖0.5) · 0.9
    let threshold = -18.5136;
    let median = f(result, "median_terminal");
    let pass = terminal.len() == 200
        && terminal.iter().all(|&v| v < 0.0)
        && median < threshold
        && elapsed < Duration::from_secs(60);
    verdict(
        "9",
        "mixture collapse",
        pass,
        elapsed,
        format!(
            "max terminal ln B01 {:.2}, median {median:.2} < {threshold}",
            terminal.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        ),
    );
}

#[test]
fn criterion_10_determinism() {
    let start = Instant::now();
    let mut names: Vec<String> = std::fs::read_dir(configs_dir())
        .unwrap()
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .filter(|n| n.starts_with('c') && n.ends_with(".json"))
        .collect();
    names.sort();
    let mut identical = 0;
    for name in &names {
        if run_config(name).canonical_json() == run_config(name).canonical_json() {
            identical += 1;
        }
    }
    let elapsed = start.elapsed();
    verdict(
        "10",
        "determinism",
        identical == names.len() && !names.is_empty(),
        elapsed,
        format!("{identical}/{} criterion configs gave byte-identical JSON on rerun", names.len()),
    );
}
