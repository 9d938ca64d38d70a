mod common;

use std::process::{Command, Output};

use serde_json::Value;

use common::workspace_root;

fn sentinel(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sentinel"))
        .args(args)
        .current_dir(workspace_root())
        .env_remove("SENTINEL_THREADS")
        .output()
        .expect("run sentinel")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is a JSON report")
}

#[test]
fn run_prints_only_the_report() {
    let out = sentinel(&["run", "--scenario", "scenarios/pedestrian_ahead_left.json", "--rollouts", "300"]);
    assert_eq!(out.status.code(), Some(0));
    let v = report(&out);
    let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
    assert_eq!(keys, ["ambiguous", "clusters", "explanations", "labels", "meta", "mixture"]);
    assert_eq!(v["meta"]["k"], 300);
    assert_eq!(v["meta"]["method"], "ilp");
    assert_eq!(v["meta"]["scenario_path"], "scenarios/pedestrian_ahead_left.json");
}

#[test]
fn nothing_flagged_is_success() {
    let out = sentinel(&["run", "--scenario", "scenarios/empty_road.json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = report(&out);
    assert!(v["clusters"].as_array().unwrap().iter().all(|c| c["flagged"] == false));
    assert_eq!(v["labels"], serde_json::json!({}));
}

#[test]
fn all_ambiguous_exits_three_with_report() {
    let out = sentinel(&["run", "--scenario", "scenarios/cyclist_right.json"]);
    assert_eq!(out.status.code(), Some(3));
    let v = report(&out);
    let ambiguous = v["ambiguous"].as_object().unwrap();
    assert!(!ambiguous.is_empty());
    assert!(ambiguous.values().all(|a| a["label_failed"] == true));
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        vec!["run"],
        vec!["run", "--scenario", "scenarios/empty_road.json", "--modality", "b5"],
        vec!["run", "--scenario", "scenarios/empty_road.json", "--method", "lp"],
        vec!["run", "--scenario", "scenarios/empty_road.json", "--rollouts", "0"],
        vec!["run", "--scenario", "scenarios/empty_road.json", "--p-min", "1.5"],
        vec!["run", "--scenario", "scenarios/does_not_exist.json"],
        vec!["bench", "--predicates", "3", "--targets", "10"],
        vec!["frobnicate"],
    ] {
        let out = sentinel(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(out.stdout.is_empty(), "{args:?}");
    }
}

#[test]
fn invalid_scenario_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    let text = std::fs::read_to_string(workspace_root().join("scenarios/empty_road.json")).unwrap();
    let mut v: Value = serde_json::from_str(&text).unwrap();
    v["horizon"] = Value::from(0);
    std::fs::write(&path, v.to_string()).unwrap();
    let out = sentinel(&["run", "--scenario", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("horizon"));
}

#[test]
fn bad_thread_count_is_rejected() {
    let out = Command::new(env!("CARGO_BIN_EXE_sentinel"))
        .args(["run", "--scenario", "scenarios/empty_road.json"])
        .current_dir(workspace_root())
        .env("SENTINEL_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn out_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let args = ["run", "--scenario", "scenarios/debris_drift.json", "--rollouts", "400", "--seed", "9"];
    let to_file = sentinel(&[&args[..], &["--out", path.to_str().unwrap()]].concat());
    assert_eq!(to_file.status.code(), Some(0));
    assert!(to_file.stdout.is_empty());
    let to_stdout = sentinel(&args);
    assert_eq!(std::fs::read(&path).unwrap(), to_stdout.stdout);
}

#[test]
fn single_modality_and_qm_method() {
    let base = ["run", "--scenario", "scenarios/pedestrian_ahead_left.json", "--rollouts", "500"];
    let ilp = report(&sentinel(&[&base[..], &["--modality", "b3"]].concat()));
    let qm = report(&sentinel(&[&base[..], &["--modality", "b3", "--method", "qm"]].concat()));
    assert_eq!(ilp["meta"]["modalities"], serde_json::json!(["b3"]));
    for per_cluster in ilp["explanations"].as_object().unwrap().values() {
        let codes: Vec<&String> = per_cluster.as_object().unwrap().keys().collect();
        assert_eq!(codes, ["b3"]);
    }
    assert_eq!(qm["meta"]["method"], "qm");
    assert_eq!(ilp["labels"], qm["labels"]);
}

#[test]
fn seeds_change_the_sample() {
    let a = sentinel(&["run", "--scenario", "scenarios/noisy_horizon5.json", "--seed", "1"]);
    let b = sentinel(&["run", "--scenario", "scenarios/noisy_horizon5.json", "--seed", "2"]);
    assert_ne!(a.stdout, b.stdout);
}

#[test]
fn bench_with_no_trials_prints_header_only() {
    let out = sentinel(&["bench", "--trials", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[1].starts_with("method"));
}

#[test]
fn small_bench_reports_equal_costs() {
    let out = sentinel(&["bench", "--predicates", "8", "--targets", "12", "--trials", "4", "--seed", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l.starts_with("petrick")));
    assert!(text.lines().any(|l| l.starts_with("ilp")));
    assert!(text.contains("costs equal: true"));
}
