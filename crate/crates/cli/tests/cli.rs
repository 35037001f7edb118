use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rfexplain"))
        .args(args)
        .env_remove("LF_SEED")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn train_banknote(dir: &Path) -> PathBuf {
    let model = dir.join("banknote.json");
    let out = run(&[
        "train",
        "--data",
        data("banknote_sample.csv").to_str().unwrap(),
        "--meta",
        data("banknote.meta.json").to_str().unwrap(),
        "--model",
        model.to_str().unwrap(),
        "--n-estimators",
        "25",
        "--max-depth",
        "6",
        "--seed",
        "5",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).contains("holdout F1"));
    model
}

const INSTANCE: &str = "variance=2.5,skew=-3,curtosis=2,entropy=0.1";

#[test]
fn explain_prints_rule_then_json() {
    let dir = tempfile::tempdir().unwrap();
    let model = train_banknote(dir.path());
    let out = run(&["explain", "--model", model.to_str().unwrap(), "--instance", INSTANCE]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    let (rule, json) = text.split_once('\n').unwrap();
    assert!(rule.starts_with("if ") && rule.contains(" then "), "{rule}");
    let v: Value = serde_json::from_str(json).unwrap();
    assert_eq!(v["rule"], rule);
    assert!(v["clauses"].is_array());
    assert!(v["class"].is_string());
}

#[test]
fn same_seed_same_output_and_env_fallback() {
    let dir = tempfile::tempdir().unwrap();
    let model = train_banknote(dir.path());
    let m = model.to_str().unwrap();
    let a = run(&["explain", "--model", m, "--instance", INSTANCE, "--json", "--seed", "9"]);
    let b = run(&["explain", "--model", m, "--instance", INSTANCE, "--json", "--seed", "9"]);
    assert_eq!(a.stdout, b.stdout);
    let c = Command::new(env!("CARGO_BIN_EXE_rfexplain"))
        .args(["explain", "--model", m, "--instance", INSTANCE, "--json"])
        .env("LF_SEED", "9")
        .output()
        .unwrap();
    assert_eq!(a.stdout, c.stdout);
}

#[test]
fn identity_pipeline_keeps_every_path() {
    let dir = tempfile::tempdir().unwrap();
    let model = train_banknote(dir.path());
    let out = run(&[
        "explain",
        "--model",
        model.to_str().unwrap(),
        "--data",
        data("banknote_sample.csv").to_str().unwrap(),
        "--row",
        "4",
        "--no-ar",
        "--no-cluster",
        "--no-random",
        "--json",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["report"]["path_reduction"], 0.0);
    assert_eq!(v["report"]["techniques_fired"], Value::Array(vec![]));
    assert_eq!(v["report"]["reduced_path_count"], v["votes"]);
}

#[test]
fn out_of_range_values_are_clamped_with_warning() {
    let dir = tempfile::tempdir().unwrap();
    let model = train_banknote(dir.path());
    let out = run(&[
        "explain",
        "--model",
        model.to_str().unwrap(),
        "--instance",
        "variance=1000,skew=-3,curtosis=2,entropy=0.1",
        "--json",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stderr(&out).contains("variance"));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["clamped"], serde_json::json!(["variance"]));
}

#[test]
fn empty_csv_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.csv");
    std::fs::write(&empty, "").unwrap();
    let out = run(&[
        "train",
        "--data",
        empty.to_str().unwrap(),
        "--model",
        dir.path().join("m.json").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("empty dataset"), "{}", stderr(&out));
}

#[test]
fn bad_instances_are_data_errors() {
    let dir = tempfile::tempdir().unwrap();
    let model = train_banknote(dir.path());
    for bad in ["variance=2.5,skew=-3", "variance=x,skew=-3,curtosis=2,entropy=0.1", "1,2"] {
        let out = run(&["explain", "--model", model.to_str().unwrap(), "--instance", bad]);
        assert_eq!(code(&out), 3, "{bad}: {}", stderr(&out));
    }
}

#[test]
fn model_errors_exit_4() {
    let dir = tempfile::tempdir().unwrap();
    let missing = run(&["explain", "--model", "/nonexistent/model.json", "--instance", INSTANCE]);
    assert_eq!(code(&missing), 4);
    let garbage = dir.path().join("garbage.json");
    std::fs::write(&garbage, r#"{"n_estimators": 1, "features": [], "trees": [{"feature": 0}]}"#).unwrap();
    let out = run(&["explain", "--model", garbage.to_str().unwrap(), "--instance", "1"]);
    assert_eq!(code(&out), 4);
    assert!(stderr(&out).contains("parse"), "{}", stderr(&out));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(code(&run(&["explain", "--bogus"])), 2);
    assert_eq!(code(&run(&[])), 2);
    let dir = tempfile::tempdir().unwrap();
    let model = train_banknote(dir.path());
    let m = model.to_str().unwrap();
    assert_eq!(code(&run(&["explain", "--model", m, "--instance", INSTANCE, "--min-support", "2"])), 2);
    assert_eq!(code(&run(&["explain", "--model", m])), 2);
    let bad_seed = Command::new(env!("CARGO_BIN_EXE_rfexplain"))
        .args(["explain", "--model", m, "--instance", INSTANCE])
        .env("LF_SEED", "not-a-number")
        .output()
        .unwrap();
    assert_eq!(code(&bad_seed), 2);
}

#[test]
fn benchmark_is_worker_invariant() {
    let dir = tempfile::tempdir().unwrap();
    let model = train_banknote(dir.path());
    let csv1 = dir.path().join("w1.csv");
    let csv2 = dir.path().join("w2.csv");
    let sample = data("banknote_sample.csv");
    for (workers, csv) in [("1", &csv1), ("3", &csv2)] {
        let out = run(&[
            "benchmark",
            "--model",
            model.to_str().unwrap(),
            "--data",
            sample.to_str().unwrap(),
            "--limit",
            "8",
            "--workers",
            workers,
            "--seed",
            "2",
            "--csv",
            csv.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        assert_eq!(stdout(&out).lines().count(), 8, "{}", stdout(&out));
    }
    let a = std::fs::read_to_string(&csv1).unwrap();
    assert_eq!(a, std::fs::read_to_string(&csv2).unwrap());
    assert_eq!(a.lines().count(), 8);
    assert!(a.lines().nth(1).unwrap().starts_with("1,1,1,"));
}

#[test]
fn categorical_data_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("heart.json");
    let out = run(&[
        "train",
        "--data",
        data("heart.csv").to_str().unwrap(),
        "--meta",
        data("heart.meta.json").to_str().unwrap(),
        "--model",
        model.to_str().unwrap(),
        "--n-estimators",
        "30",
        "--max-depth",
        "5",
        "--holdout",
        "0",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stderr(&out).contains("dropped 6 row"), "{}", stderr(&out));
    assert!(!stdout(&out).contains("holdout"));
    let out = run(&[
        "explain",
        "--model",
        model.to_str().unwrap(),
        "--instance",
        "63,male,typical ang,145,233,1,left vent hypertrophy,150,0,2.3,downsloping,0,fixed defect",
        "--json",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(["absence", "presence"].contains(&v["class"].as_str().unwrap()));
    let unknown = run(&[
        "explain",
        "--model",
        model.to_str().unwrap(),
        "--instance",
        "63,robot,typical ang,145,233,1,left vent hypertrophy,150,0,2.3,downsloping,0,fixed defect",
    ]);
    assert_eq!(code(&unknown), 3);
    assert!(stderr(&unknown).contains("robot"));
}
