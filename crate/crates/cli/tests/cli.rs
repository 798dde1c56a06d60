use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/data").join(name)
}

fn dignet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dignet")).args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json output")
}

fn shift_net() -> String {
    data("shiftnet.txt").display().to_string()
}

#[test]
fn analyze_shift_net() {
    let v = stdout_json(&dignet(&["analyze", "--json", &shift_net()]));
    assert_eq!(v["t"], 1);
    assert_eq!(v["t_star_full"], 0);
    assert_eq!(v["gamma_log2"], 3);
    assert_eq!(v["bound_log2"], 4);
}

#[test]
fn analyze_identity_and_repeated_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let single = dir.path().join("identity.txt");
    fs::write(&single, "1 3\n100\n010\n001\n").unwrap();
    let v = stdout_json(&dignet(&["analyze", "--json", single.to_str().unwrap()]));
    assert_eq!((v["t"].as_u64(), v["gamma_log2"].as_u64()), (Some(0), Some(0)));

    let twice = dir.path().join("twice.txt");
    fs::write(&twice, "2 3\n100\n010\n001\n\n100\n010\n001\n").unwrap();
    let v = stdout_json(&dignet(&["analyze", "--json", twice.to_str().unwrap()]));
    assert_eq!(v["gamma_log2"], 3);
    assert_eq!(v["first_rows_dependent"], true);
}

#[test]
fn gen_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("points.csv");
    let status = dignet(&["gen", "--raw", &shift_net(), "--out", out.to_str().unwrap()]);
    assert!(status.status.success());
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 16);
    assert!(text.lines().all(|l| l.split(',').count() == 4));
}

#[test]
fn gen_van_der_corput_from_direction_numbers() {
    let out = dignet(&[
        "gen",
        "--dirnum",
        data("joe-kuo-excerpt.txt").to_str().unwrap(),
        "--dims",
        "1",
        "--m",
        "3",
        "--format",
        "numerators",
    ]);
    assert!(out.status.success());
    let nums: Vec<&str> = std::str::from_utf8(&out.stdout).unwrap().lines().collect();
    assert_eq!(nums, ["0", "4", "2", "6", "1", "5", "3", "7"]);
}

#[test]
fn missing_file_is_an_io_error_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("never.csv");
    let res = dignet(&["gen", "--raw", "/no/such/file.txt", "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(1));
    assert!(res.stdout.is_empty());
    assert!(!out.exists());
}

#[test]
fn malformed_matrices_are_validation_errors() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.txt");
    fs::write(&bad, "1 2\n10\n0a\n").unwrap();
    let res = dignet(&["analyze", bad.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("line 3"));
}

#[test]
fn gains_report_reaches_the_maximum() {
    let v = stdout_json(&dignet(&["gains", "--json", "--depth", "8", &shift_net()]));
    assert_eq!(v["gamma_max_log2"], 3);
    assert_eq!(v["max_gain_attained"], true);
    assert_eq!(v["bound_violations"].as_array().unwrap().len(), 0);
}

#[test]
fn gains_csv_and_subset_filter() {
    let out = dignet(&["gains", "--depth", "5", "--u", "1,2", &shift_net()]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("u,k,log2_gain"));
    assert!(text.lines().skip(1).all(|l| l.starts_with("1;2,")));
    let bad = dignet(&["gains", "--depth", "5", "--u", "1,9", &shift_net()]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn verify_power_of_two_suite_passes() {
    let out = dignet(&[
        "verify", "--suite", "power-of-two", "--max-m", "5", "--max-s", "3", "--trials", "200", "--seed", "11",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn verify_json_manifest() {
    let v = stdout_json(&dignet(&[
        "verify", "--json", "--suite", "t-counting", "--suite", "max-gain", "--trials", "20", "--seed", "3",
    ]));
    assert_eq!(v["pass"], true);
    assert_eq!(v["suites"].as_array().unwrap().len(), 2);
    assert_eq!(v["suites"][0]["suite"], "t-counting");
}

#[test]
fn scramble_is_deterministic() {
    let args = ["scramble", "--kind", "rls", "--seed", "7", "--reps", "2", "--fixture", "shift-net"];
    let a = dignet(&args);
    let b = dignet(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(String::from_utf8(a.stdout).unwrap().lines().count(), 32);
}

#[test]
fn unseeded_runs_report_their_seed() {
    let out = dignet(&["scramble", "--fixture", "shift-net", "--kind", "nus"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("seed: "));
}

#[test]
fn integrate_is_thread_count_independent() {
    let base = ["integrate", "--json", "--fixture", "sobol", "--dims", "3", "--m", "8", "--seed", "5", "--reps", "16"];
    let one = dignet(&[&base[..], &["--threads", "1"]].concat());
    let four = dignet(&[&base[..], &["--threads", "4"]].concat());
    assert_eq!(one.stdout, four.stdout);
    let v = stdout_json(&one);
    assert!((v["mean"].as_f64().unwrap() - 0.125).abs() < 1e-3);
    assert_eq!(v["seed"], 5);
}

#[test]
fn integrate_haar_zero_region_is_exact() {
    let v = stdout_json(&dignet(&[
        "integrate", "--json", "--fixture", "shift-net", "--integrand", "haar", "--u", "1", "--k", "1", "--seed", "2",
    ]));
    assert_eq!(v["variance_of_mean"], 0.0);
    assert_eq!(v["mean"], 0.0);
}
