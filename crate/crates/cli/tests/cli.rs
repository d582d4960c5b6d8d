//! Black-box behavior of the binary: exit-code partitioning, report shapes,
//! seeding, and byte-level determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_conedyn"))
}

fn fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/paper_example.mm")
}

fn scratch(name: &str, content: &str) -> PathBuf {
    let path = std::env::temp_dir().join(format!("conedyn-cli-{}-{name}", std::process::id()));
    std::fs::write(&path, content).unwrap();
    path
}

fn stdout_json(out: &Output) -> Value {
    assert!(
        !out.stdout.is_empty(),
        "no stdout; stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn orbit_reports_the_bundled_example() {
    let out = bin()
        .args(["orbit", "--map"])
        .arg(fixture())
        .args(["--start", "1,2,0", "--cone", "standard:3", "--no-timestamp"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let report = stdout_json(&out);
    assert_eq!(report["schema"], "orbit-report/1");
    assert_eq!(report["outcome"], "converged");
    assert_eq!(report["period"], 6);
    assert_eq!(report["transient"], 0);
    assert_eq!(report["seed"], 0);
    assert_eq!(report["mode"], "exact");
    assert_eq!(report["cycle"][0], serde_json::json!(["1", "2", "0"]));
    assert_eq!(report["part_period"], 3);
}

#[test]
fn orbit_float_mode_reports_numbers() {
    let out = bin()
        .args(["orbit", "--map"])
        .arg(fixture())
        .args(["--start", "1,2,0", "--mode", "float", "--no-timestamp"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let report = stdout_json(&out);
    assert_eq!(report["period"], 6);
    assert_eq!(report["cycle"][0][0], 1.0);
}

#[test]
fn unbounded_orbit_exits_2() {
    let map = scratch("doubling.mm", "f1 = 2*x1\nf2 = 2*x2\n");
    let out = bin()
        .args(["orbit", "--map"])
        .arg(&map)
        .args(["--start", "1,1", "--no-timestamp"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let report = stdout_json(&out);
    assert_eq!(report["outcome"], "unbounded");
}

#[test]
fn budget_exhaustion_exits_3() {
    let map = scratch("drift.mm", "f1 = x1 + 1\n");
    let out = bin()
        .args(["orbit", "--map"])
        .arg(&map)
        .args(["--start", "1", "--max-iters", "40", "--no-timestamp"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    let report = stdout_json(&out);
    assert_eq!(report["outcome"], "inconclusive");
    assert_eq!(report["iters"], 40);
}

#[test]
fn parse_errors_exit_1_with_diagnostics() {
    let map = scratch("bad.mm", "f1 = x1 +\n");
    let out = bin()
        .args(["orbit", "--map"])
        .arg(&map)
        .args(["--start", "1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 1"), "stderr: {err}");
}

#[test]
fn start_dimension_mismatch_exits_1() {
    let out = bin()
        .args(["orbit", "--map"])
        .arg(fixture())
        .args(["--start", "1,2"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn construct_reproduces_the_example_map() {
    let out = bin()
        .args(["construct", "--n", "3", "--m", "2", "--p", "2", "--q", "3", "--no-timestamp"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let report = stdout_json(&out);
    assert_eq!(report["period"], 6);
    assert_eq!(report["confirmed"], true);
    assert_eq!(report["start"], serde_json::json!(["1", "2", "0"]));
    let map = report["map"].as_str().unwrap();
    assert_eq!(
        map,
        "f1 = (3*x1 /\\ x2) \\/ (3*x2 /\\ x3)\n\
         f2 = (3*x1 /\\ x3) \\/ (x2 /\\ 3*x3)\n\
         f3 = (x1 /\\ 3*x2) \\/ (x1 /\\ 3*x3)"
    );
}

#[test]
fn infeasible_construction_exits_1() {
    let out = bin()
        .args(["construct", "--n", "3", "--m", "3", "--p", "2", "--q", "2"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("infeasible"), "stderr: {err}");
}

#[test]
fn check_corpus_passes_and_respects_the_bound() {
    let out = bin()
        .args(["check", "--corpus", "seed=7,count=100,dim=4", "--no-timestamp"])
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report = stdout_json(&out);
    assert_eq!(report["schema"], "check-report/1");
    assert_eq!(report["maps"], 100);
    assert_eq!(report["period_bound"], "12");
    let max_period = report["max_period"].as_u64().unwrap();
    assert!(max_period <= 12);
    assert_eq!(report["violations"], serde_json::json!([]));
}

#[test]
fn empty_corpus_is_a_vacuous_pass() {
    let out = bin()
        .args(["check", "--corpus", "count=0", "--no-timestamp"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let report = stdout_json(&out);
    assert_eq!(report["maps"], 0);
}

#[test]
fn check_single_map_lists_cycle_properties() {
    let out = bin()
        .args(["check", "--map"])
        .arg(fixture())
        .args(["--start", "1,2,0", "--no-timestamp"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let report = stdout_json(&out);
    for prop in ["antichain", "m_invariance", "factorization", "period_bound"] {
        assert_eq!(report["properties"][prop], "pass", "property {prop}");
    }
}

#[test]
fn table1_matches_bounds_15() {
    let alias = bin().arg("table1").output().unwrap();
    let full = bin().args(["bounds", "--n-max", "15"]).output().unwrap();
    assert_eq!(alias.status.code(), Some(0));
    assert_eq!(alias.stdout, full.stdout);
}

#[test]
fn stirling_column_appears_on_request() {
    let out = bin()
        .args(["bounds", "--n-max", "15", "--stirling"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("N,alpha,beta,stirling_ratio\n"));
    let last = text.lines().last().unwrap();
    assert!(last.starts_with("15,756252,756756,0.956"), "row: {last}");
}

#[test]
fn identical_runs_are_byte_identical() {
    let run = || {
        bin()
            .args(["check", "--corpus", "seed=3,count=10,dim=3", "--no-timestamp"])
            .output()
            .unwrap()
            .stdout
    };
    assert_eq!(run(), run());
}

#[test]
fn seed_resolution_order() {
    let from_env = bin()
        .args(["construct", "--n", "2", "--m", "1", "--p", "1", "--q", "2", "--no-timestamp"])
        .env("CONEDYN_SEED", "42")
        .output()
        .unwrap();
    assert_eq!(stdout_json(&from_env)["seed"], 42);

    let flag_wins = bin()
        .args(["construct", "--n", "2", "--m", "1", "--p", "1", "--q", "2", "--no-timestamp"])
        .args(["--seed", "9"])
        .env("CONEDYN_SEED", "42")
        .output()
        .unwrap();
    assert_eq!(stdout_json(&flag_wins)["seed"], 9);
}

#[test]
fn out_flag_writes_the_file() {
    let path = std::env::temp_dir().join(format!("conedyn-out-{}.json", std::process::id()));
    let out = bin()
        .args(["orbit", "--map"])
        .arg(fixture())
        .args(["--start", "1,2,0", "--no-timestamp", "--out"])
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let report: Value = serde_json::from_slice(&std::fs::read(&path).unwrap()).unwrap();
    assert_eq!(report["period"], 6);
    std::fs::remove_file(&path).ok();
}
