use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

const LN_2: f64 = std::f64::consts::LN_2;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dirinfo"))
        .args(args)
        .env_remove("DIRINFO_CELL_CAP")
        .output()
        .expect("binary runs")
}

fn run_ok(args: &[&str]) -> Value {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("json report")
}

fn code(args: &[&str]) -> i32 {
    run(args).status.code().expect("exit code")
}

fn f(v: &Value) -> f64 {
    v.as_f64().expect("number")
}

fn h2(t: f64) -> f64 {
    -t * t.log2() - (1.0 - t) * (1.0 - t).log2()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn identity_channel_carries_one_bit() {
    let r = run_ok(&["compute", "-i", path(&data("identity.json"))]);
    assert_eq!(r["units"], "nats");
    assert!((f(&r["sum_form"]) - LN_2).abs() < 1e-15);
    let r = run_ok(&["compute", "-i", path(&data("identity.json")), "--units", "bits"]);
    assert!((f(&r["sum_form"]) - 1.0).abs() < 1e-15);
}

#[test]
fn input_blind_channel_is_zero() {
    let r = run_ok(&["compute", "-i", path(&data("blind.json"))]);
    assert!(f(&r["sum_form"]).abs() < 1e-15);
    assert!(f(&r["divergence_form"]).abs() < 1e-15);
}

#[test]
fn binary_symmetric_channel_in_bits() {
    let r = run_ok(&["compute", "-i", path(&data("bsc01.json"))]);
    assert_eq!(r["units"], "bits");
    let closed = 1.0 - h2(0.1);
    assert!((f(&r["sum_form"]) - closed).abs() < 1e-12);
    assert!((f(&r["sum_form"]) - 0.531004).abs() < 5e-7);
    assert!(f(&r["formula_gap"]) <= 1e-9);
}

#[test]
fn bits_are_nats_over_ln2() {
    let nats = run_ok(&["compute", "-i", path(&data("bsc01.json")), "--units", "nats"]);
    let bits = run_ok(&["compute", "-i", path(&data("bsc01.json"))]);
    assert_eq!(f(&bits["sum_form"]), f(&nats["sum_form"]) / LN_2);
}

#[test]
fn capacity_of_bsc_matches_closed_form_and_grid() {
    let r = run_ok(&["capacity", "-i", path(&data("bsc01_capacity.json")), "--units", "bits", "--grid", "200"]);
    let closed = 1.0 - h2(0.1);
    assert!((f(&r["value"]) - closed).abs() < 1e-3);
    assert!((f(&r["grid"]["value"]) - closed).abs() < 1e-3);
    assert_eq!(r["converged"], true);
    assert_eq!(r["argmax"].as_array().unwrap().len(), 1);
}

#[test]
fn power_constrained_capacity() {
    let r = run_ok(&["capacity", "-i", path(&data("bsc01_power.json")), "--units", "bits"]);
    // the cheap letter gets 0.7 at the optimum: output law (0.66, 0.34)
    let closed = h2(0.34) - h2(0.1);
    assert!((f(&r["value"]) - closed).abs() < 1e-6);
    assert_eq!(f(&r["budget"]), 0.3);
    assert!(f(&r["constraint_slack"]) >= -1e-9);
}

#[test]
fn zero_distortion_costs_one_bit() {
    let r = run_ok(&["nrdf", "-i", path(&data("hamming_d0.json"))]);
    assert!((f(&r["value"]) - 1.0).abs() < 1e-9);
}

#[test]
fn distortion_sweep_csv_is_nonincreasing() {
    let out = run(&["nrdf", "-i", path(&data("hamming_sweep.json"))]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "budget,value,normalized,iterations,converged,distortion_slack,multiplier"
    );
    let rows: Vec<(f64, f64)> = lines
        .map(|l| {
            let cols: Vec<&str> = l.split(',').collect();
            (cols[0].parse().unwrap(), cols[1].parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 9);
    for w in rows.windows(2) {
        assert!(w[1].1 <= w[0].1 + 1e-12);
    }
    for &(d, v) in &rows {
        assert!((v - LN_2 * (1.0 - h2(d))).abs() < 1e-6);
    }
}

#[test]
fn exit_codes() {
    assert_eq!(code(&["compute", "-i", path(&data("malformed_row.json"))]), 2);
    assert_eq!(code(&["compute", "-i", path(&data("wrong_version.json"))]), 2);
    assert_eq!(code(&["compute", "-i", path(&data("bsc01_capacity.json"))]), 2);
    assert_eq!(code(&["compute", "-i", "/nonexistent/problem.json"]), 1);
    assert_eq!(code(&["capacity", "-i", path(&data("infeasible_power.json"))]), 4);
    assert_eq!(code(&["capacity", "-i", path(&data("bsc01_capacity.json")), "--tol", "0"]), 2);
    assert_eq!(code(&["verify", "nonsense"]), 2);
    assert_eq!(code(&["frobnicate"]), 2);
}

#[test]
fn unknown_fields_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("extra.json");
    let mut doc: Value = serde_json::from_str(&std::fs::read_to_string(data("identity.json")).unwrap()).unwrap();
    doc["colour"] = json!("blue");
    std::fs::write(&file, doc.to_string()).unwrap();
    assert_eq!(code(&["compute", "-i", path(&file)]), 2);
}

#[test]
fn rows_within_load_tolerance_are_renormalized() {
    let r = run_ok(&["compute", "-i", path(&data("slightly_off.json"))]);
    let exact = run_ok(&["compute", "-i", path(&data("bsc01.json")), "--units", "nats"]);
    assert!((f(&r["sum_form"]) - f(&exact["sum_form"])).abs() < 1e-9);
}

#[test]
fn cell_cap_comes_from_the_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_dirinfo"))
        .args(["compute", "-i", path(&data("identity.json"))])
        .env("DIRINFO_CELL_CAP", "3")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cap"));
    let out = Command::new(env!("CARGO_BIN_EXE_dirinfo"))
        .args(["compute", "-i", path(&data("identity.json"))])
        .env("DIRINFO_CELL_CAP", "4")
        .output()
        .unwrap();
    assert!(out.status.success());
}

#[test]
fn iteration_budget_exhaustion_is_flagged_not_fatal() {
    let r = run_ok(&["capacity", "-i", path(&data("state_channel.json")), "--max-iters", "1"]);
    assert_eq!(r["converged"], false);
    assert_eq!(r["iterations"], 1);
}

#[test]
fn verify_suites() {
    let r = run_ok(&["verify", "dual-formula", "--seed", "7"]);
    assert_eq!(r["passed"], true);
    assert!(f(&r["properties"][0]["worst"]) < 1e-9);

    // identical endpoints: the supplied instance has zero slack
    let r = run_ok(&["verify", "convexity", "-i", path(&data("bsc01.json"))]);
    assert_eq!(r["passed"], true);
    assert_eq!(r["properties"][0]["instances"], 51);

    let r = run_ok(&["verify", "all"]);
    assert_eq!(r["properties"].as_array().unwrap().len(), 5);
    assert_eq!(r["passed"], true);
}

#[test]
fn violations_exit_five_with_a_replayable_instance() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let out = run(&["verify", "dual-formula", "--threshold", "-1", "-o", path(&report)]);
    assert_eq!(out.status.code(), Some(5));
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(r["passed"], false);
    let files = r["properties"][0]["counterexample"]["files"].as_array().unwrap();
    assert_eq!(files.len(), 1);
    let replay = dir.path().join("replay.json");
    std::fs::write(&replay, files[0].to_string()).unwrap();
    let c = run_ok(&["compute", "-i", path(&replay)]);
    assert!((f(&c["formula_gap"]) - f(&r["properties"][0]["worst"])).abs() < 1e-15);
}

#[test]
fn repeated_runs_are_byte_identical() {
    for args in [
        vec!["capacity", "-i", path(&data("state_channel.json")).to_string().leak()],
        vec!["nrdf", "-i", path(&data("hamming_sweep.json")).to_string().leak(), "--format", "json"],
        vec!["verify", "all", "--seed", "3"],
    ] {
        let a = run(&args);
        let b = run(&args);
        assert!(a.status.success());
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn output_flag_writes_the_same_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("out.csv");
    let stdout = run(&["compute", "-i", path(&data("bsc01.json")), "--format", "csv"]).stdout;
    assert!(run(&["compute", "-i", path(&data("bsc01.json")), "--format", "csv", "-o", path(&target)])
        .status
        .success());
    assert_eq!(std::fs::read(&target).unwrap(), stdout);
}

fn replay_capacity(problem: &str) {
    let dir = tempfile::tempdir().unwrap();
    let r = run_ok(&["capacity", "-i", path(&data(problem))]);
    let mut doc: Value = serde_json::from_str(&std::fs::read_to_string(data(problem)).unwrap()).unwrap();
    doc["kernels"]["backward"] = r["argmax"].clone();
    doc.as_object_mut().unwrap().remove("constraint");
    doc.as_object_mut().unwrap().remove("kernel_class");
    let file = dir.path().join("replay.json");
    std::fs::write(&file, doc.to_string()).unwrap();
    let c = run_ok(&["compute", "-i", path(&file)]);
    assert!((f(&c["sum_form"]) - f(&r["value"])).abs() < 1e-9, "{problem}");
}

#[test]
fn capacity_argmax_round_trips() {
    replay_capacity("bsc01_capacity.json");
    replay_capacity("bsc01_power.json");
    replay_capacity("state_channel.json");
    replay_capacity("state_channel_open_loop.json");
}

#[test]
fn nrdf_argmin_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let mut doc: Value = serde_json::from_str(&std::fs::read_to_string(data("hamming_sweep.json")).unwrap()).unwrap();
    doc["constraint"].as_object_mut().unwrap().remove("budgets");
    doc["constraint"]["budget"] = json!(0.2);
    doc["output"] = json!({"format": "json"});
    let problem = dir.path().join("single.json");
    std::fs::write(&problem, doc.to_string()).unwrap();
    let r = run_ok(&["nrdf", "-i", path(&problem)]);
    let replay = json!({
        "format_version": "1",
        "spec": doc["spec"],
        "kernels": {"backward": doc["source"]["steps"], "forward": r["argmin"]},
    });
    let file = dir.path().join("replay.json");
    std::fs::write(&file, replay.to_string()).unwrap();
    let c = run_ok(&["compute", "-i", path(&file)]);
    assert!((f(&c["sum_form"]) - f(&r["value"])).abs() < 1e-9);
}
