//! End-to-end runs of the binary: exit codes, produced files, determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_mixlab")
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .args(["--out-dir", dir.to_str().unwrap()])
        .output()
        .expect("binary runs")
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("mixlab-cli-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn counterexample_default_passes() {
    let dir = temp_dir("cx");
    let out = run_in(&dir, &["counterexample"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report = read_json(&dir.join("counterexample.json"));
    assert_eq!(report["ratio"]["num"], 3);
    assert_eq!(report["ratio"]["den"], 2);
    assert_eq!(report["conditional_is_uniform"], false);
    let text = std::fs::read_to_string(dir.join("counterexample.txt")).unwrap();
    assert!(text.contains("3/2"));
    // Manifest lists the outputs and the outcome.
    let manifest = read_json(&dir.join("manifest.json"));
    assert_eq!(manifest["pass"], true);
    assert_eq!(manifest["subcommand"], "counterexample");
    assert_eq!(manifest["outputs"].as_array().unwrap().len(), 2);
}

#[test]
fn counterexample_explicit_flags_match_default() {
    let dir_a = temp_dir("cx-default");
    let dir_b = temp_dir("cx-flags");
    run_in(&dir_a, &["counterexample"]);
    run_in(
        &dir_b,
        &["counterexample", "--initial", "001", "--steps", "2"],
    );
    let a = std::fs::read_to_string(dir_a.join("counterexample.json")).unwrap();
    let b = std::fs::read_to_string(dir_b.join("counterexample.json")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn counterexample_zero_steps_is_usage_error() {
    let dir = temp_dir("cx-zero");
    let out = run_in(&dir, &["counterexample", "--steps", "0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("probability zero"));
    // Manifest is still written, recording the failure.
    let manifest = read_json(&dir.join("manifest.json"));
    assert_eq!(manifest["pass"], false);
    assert!(manifest["error"]
        .as_str()
        .unwrap()
        .contains("probability zero"));
}

#[test]
fn export_small_support_chain_is_golden() {
    let dir = temp_dir("export");
    let out = run_in(&dir, &["export", "Q", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(dir.join("Q_2.triplets")).unwrap();
    assert!(text.starts_with("Q 2 4\n0 0 1 1\n"));
    assert_eq!(text.lines().count(), 11);
}

#[test]
fn export_oversized_chain_is_refused_with_limits() {
    let dir = temp_dir("export-big");
    let out = run_in(&dir, &["export", "P", "7"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("2..=6"), "stderr: {err}");
}

#[test]
fn verify_checks_pass() {
    let dir = temp_dir("verify");
    let out = run_in(&dir, &["verify", "1", "--n", "3", "--eps", "0.1"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );

    let out = run_in(
        &dir,
        &["verify", "2", "--n", "6", "--samples", "100", "--seed", "7"],
    );
    assert_eq!(out.status.code(), Some(0));
    let report = read_json(&dir.join("verify_2.json"));
    assert!(report["max_discrepancy"].as_f64().unwrap() < 1e-12);

    let out = run_in(&dir, &["verify", "3", "--n", "3", "--eps", "0.25"]);
    assert_eq!(out.status.code(), Some(0));

    let out = run_in(&dir, &["verify", "4", "--n", "4", "--eps", "0.25"]);
    assert_eq!(out.status.code(), Some(0));
    let report = read_json(&dir.join("verify_4.json"));
    let empirical = report["empirical_max"].as_u64().unwrap() as f64;
    assert!(empirical < report["certified_bound"].as_f64().unwrap());
}

#[test]
fn verify_rejects_out_of_range_arguments() {
    let dir = temp_dir("verify-bad");
    let out = run_in(&dir, &["verify", "1", "--n", "9"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run_in(&dir, &["verify", "5", "--n", "3"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_writes_csv_and_fit() {
    let dir = temp_dir("sweep");
    let out = run_in(&dir, &["sweep", "Z", "10", "80", "0.25"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = std::fs::read_to_string(dir.join("sweep_Z.csv")).unwrap();
    assert!(csv.starts_with("n,eps,t_mix,gap,fit_a,fit_b,r2\n"));
    assert!(csv.lines().count() > 5);
    let fit = read_json(&dir.join("sweep_Z_fit.json"));
    assert!(fit["a"].as_f64().unwrap() > 0.0);

    // Transposition walk mixing times increase with n.
    let out = run_in(&dir, &["sweep", "RT", "3", "6", "0.25"]);
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.join("sweep_RT.csv")).unwrap();
    let times: Vec<u64> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
        .collect();
    assert_eq!(times.len(), 4);
    assert!(times.windows(2).all(|w| w[0] <= w[1]), "times {times:?}");
}

#[test]
fn sweep_rejects_unknown_kind_and_bad_range() {
    let dir = temp_dir("sweep-bad");
    assert_eq!(
        run_in(&dir, &["sweep", "X", "3", "5", "0.25"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run_in(&dir, &["sweep", "P", "3", "9", "0.25"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn montecarlo_is_deterministic_per_seed() {
    let dir_a = temp_dir("mc-a");
    let dir_b = temp_dir("mc-b");
    let args = [
        "montecarlo",
        "--n",
        "6",
        "--steps",
        "40",
        "--trajectories",
        "5000",
        "--seed",
        "11",
    ];
    assert_eq!(run_in(&dir_a, &args).status.code(), Some(0));
    assert_eq!(run_in(&dir_b, &args).status.code(), Some(0));
    let a = std::fs::read_to_string(dir_a.join("montecarlo_hist.csv")).unwrap();
    let b = std::fs::read_to_string(dir_b.join("montecarlo_hist.csv")).unwrap();
    assert_eq!(a, b);
    assert!(a.starts_with("n,t,H,count,frequency\n"));
    // A different seed produces a different histogram.
    let dir_c = temp_dir("mc-c");
    let args_c = [
        "montecarlo",
        "--n",
        "6",
        "--steps",
        "40",
        "--trajectories",
        "5000",
        "--seed",
        "12",
    ];
    assert_eq!(run_in(&dir_c, &args_c).status.code(), Some(0));
    let c = std::fs::read_to_string(dir_c.join("montecarlo_hist.csv")).unwrap();
    assert_ne!(a, c);
    // Config echo sits alongside the data.
    let config = read_json(&dir_a.join("montecarlo_config.json"));
    assert_eq!(config["seed"], 11);
    assert_eq!(config["trajectories"], 5000);
}

#[test]
fn csv_format_renders_flat_table() {
    let dir = temp_dir("fmt");
    let out = Command::new(bin())
        .args([
            "counterexample",
            "--format",
            "csv",
            "--out-dir",
            dir.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.starts_with("key,value\n"));
    assert!(stdout.contains("ratio.num,3"));
}
