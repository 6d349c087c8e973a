use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use hybrid_delay::cli;

fn write_scenario(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path
}

const BASE: &str = "lambda = 0.5\nmu = 90\nb1 = 50\nb2 = 100\nn = 1\n";

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("hybrid-delay").chain(args.iter().copied());
    let code = cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn field(text: &str, key: &str) -> f64 {
    let line = text
        .lines()
        .find(|l| l.starts_with(key))
        .unwrap_or_else(|| panic!("no `{key}` in\n{text}"));
    line[key.len()..]
        .trim_start_matches(':')
        .split_whitespace()
        .next()
        .unwrap()
        .parse()
        .unwrap()
}

#[test]
fn analyze_base_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let s = write_scenario(dir.path(), "base.toml", BASE);
    let (code, out, _) = run(&["analyze", s.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(out.contains("alpha_approx: 0.333333"), "{out}");
    assert!(out.contains("branch: interior"));
    assert!(out.contains("beta: 0.500000"));
    assert!(out.contains("feasible alpha interval: (0.000000, 1.000000)"));
    assert!((field(&out, "alpha_opt") - 0.144613).abs() < 1e-6);
    assert!((field(&out, "min delay") - 1.550883).abs() < 1e-6);
}

#[test]
fn analyze_boundary_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let s = write_scenario(
        dir.path(),
        "light.toml",
        "lambda = 0.05\nmu = 90\nb1 = 50\nb2 = 100\nn = 1\n",
    );
    let (code, out, _) = run(&["analyze", s.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(out.contains("alpha_opt: 0.000000"), "{out}");
    assert!(out.contains("branch: boundary (all VLC)"));
}

#[test]
fn analyze_infeasible_scenario_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let s = write_scenario(
        dir.path(),
        "bad.toml",
        "lambda = 2.0\nmu = 90\nb1 = 50\nb2 = 100\nn = 1\n",
    );
    let (code, _, err) = run(&["analyze", s.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("InfeasibleLoad"), "{err}");

    let s = write_scenario(
        dir.path(),
        "order.toml",
        "lambda = 0.5\nmu = 90\nb1 = 100\nb2 = 50\nn = 1\n",
    );
    let (code, _, err) = run(&["analyze", s.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("CapacityOrderViolation"), "{err}");
}

#[test]
fn unknown_scenario_key_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let s = write_scenario(dir.path(), "typo.toml", &format!("{BASE}lamda = 0.4\n"));
    let (code, _, err) = run(&["analyze", s.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("lamda"), "{err}");
    let (code, _, _) = run(&["analyze", "/nonexistent/scenario.toml"]);
    assert_eq!(code, 2);
}

#[test]
fn bad_flags_exit_2() {
    assert_eq!(run(&["simulate"]).0, 2);
    assert_eq!(run(&["frobnicate"]).0, 2);
    assert_eq!(run(&["--help"]).0, 0);
}

#[test]
fn simulate_nonaggregated_all_vlc() {
    let dir = tempfile::tempdir().unwrap();
    let s = write_scenario(dir.path(), "base.toml", BASE);
    let args = [
        "simulate",
        s.to_str().unwrap(),
        "--system",
        "nonagg",
        "--alpha",
        "0",
        "--requests",
        "100000",
        "--replications",
        "10",
    ];
    let (code, out, _) = run(&args);
    assert_eq!(code, 0, "{out}");
    let mean = field(&out, "mean delay");
    let hw = field(&out, "95% CI half-width");
    assert!((mean - 90.0 / 55.0).abs() <= 3.0 * hw, "mean {mean} +/- {hw}");
    assert!(out.contains("requests measured: 900000"));
}

#[test]
fn simulate_aggregated_respects_lower_bound() {
    let dir = tempfile::tempdir().unwrap();
    let s = write_scenario(
        dir.path(),
        "base.toml",
        &format!("{BASE}alpha = 0.3333333333333333\nrequests = 50000\nreplications = 8\n"),
    );
    let (code, out, _) = run(&["simulate", s.to_str().unwrap(), "--system", "agg"]);
    assert_eq!(code, 0);
    let mean = field(&out, "mean delay");
    let hw = field(&out, "95% CI half-width");
    assert!(mean + hw >= 30.0 / 35.0, "{out}");
}

#[test]
fn simulate_unstable_alpha_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let s = write_scenario(
        dir.path(),
        "heavy.toml",
        "lambda = 1.2\nmu = 90\nb1 = 50\nb2 = 100\nn = 1\n",
    );
    let (code, _, err) = run(&["simulate", s.to_str().unwrap(), "--system", "agg", "--alpha", "0.9"]);
    assert_eq!(code, 3);
    assert!(err.contains("UnstableQueue"), "{err}");
    let (code, _, _) = run(&["simulate", s.to_str().unwrap(), "--system", "agg", "--alpha", "1.5"]);
    assert_eq!(code, 2);
}

#[test]
fn simulate_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let s = write_scenario(dir.path(), "base.toml", BASE);
    let csv = dir.path().join("stats.csv");
    let args = [
        "simulate",
        s.to_str().unwrap(),
        "--system",
        "agg",
        "--requests",
        "5000",
        "--replications",
        "2",
        "--out",
        csv.to_str().unwrap(),
    ];
    assert_eq!(run(&args).0, 0);
    let text = fs::read_to_string(&csv).unwrap();
    assert!(
        text.starts_with("system,alpha,mean,variance,count,ci_halfwidth\nagg,0.333333333,"),
        "{text}"
    );

    let missing = dir.path().join("nope").join("stats.csv");
    let mut bad = args;
    bad[9] = missing.to_str().unwrap();
    assert_eq!(run(&bad).0, 2);
}

#[test]
fn optimize_reports_penalty() {
    let dir = tempfile::tempdir().unwrap();
    let s = write_scenario(
        dir.path(),
        "base.toml",
        &format!("{BASE}requests = 20000\nreplications = 4\n"),
    );
    let (code, out, _) = run(&["optimize", s.to_str().unwrap(), "--tolerance", "0.01"]);
    assert_eq!(code, 0);
    assert!(out.contains("alpha_approx: 0.333333"));
    // One AP: the two pieces are fully correlated and the split is optimal.
    assert!(field(&out, "approximation penalty").abs() < 0.5, "{out}");
}

#[test]
fn sweep_writes_one_csv_per_parameter() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_scenario(
        dir.path(),
        "spec.toml",
        "metric = \"agg-ratio\"\nn_values = [1, 2]\nrequests = 2000\nreplications = 2\n[grids]\nlambda = [0.2, 0.4]\nmu = [60.0]\nb1 = [30.0]\nb2 = [150.0]\n",
    );
    let out_dir = dir.path().join("out");
    fs::create_dir(&out_dir).unwrap();
    let (code, out, err) = run(&["sweep", spec.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(out.lines().count(), 4);
    for p in ["lambda", "mu", "b1", "b2"] {
        let text = fs::read_to_string(out_dir.join(format!("agg_over_nonagg_ratio_{p}.csv"))).unwrap();
        let rows: Vec<&str> = text.lines().skip(1).collect();
        assert_eq!(rows.len(), if p == "lambda" { 4 } else { 2 });
        for row in rows {
            let cols: Vec<&str> = row.split(',').collect();
            assert_eq!(cols[6], "ok");
            assert!(cols[4].parse::<f64>().unwrap() < 1.0);
        }
    }
}

#[test]
fn sweep_missing_output_dir_exits_2() {
    let (code, _, err) = run(&["sweep", "--metric", "agg-ratio", "--out", "/nonexistent/dir"]);
    assert_eq!(code, 2);
    assert!(err.contains("does not exist"));
    let (code, _, _) = run(&["sweep", "--out", "/tmp"]);
    assert_eq!(code, 2, "a metric is required");
}

#[test]
fn binary_output_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let s = write_scenario(dir.path(), "base.toml", BASE);
    let exe = env!("CARGO_BIN_EXE_hybrid-delay");
    let invoke = |threads: &str| {
        Command::new(exe)
            .env("RAYON_NUM_THREADS", threads)
            .args(["simulate", s.to_str().unwrap(), "--system", "agg", "--seed", "42"])
            .args(["--requests", "20000", "--replications", "6"])
            .output()
            .unwrap()
    };
    let a = invoke("1");
    let b = invoke("4");
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);

    let bad = Command::new(exe)
        .args(["analyze", "/nonexistent.toml"])
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}
