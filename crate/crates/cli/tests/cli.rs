use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn xmod(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_xmod")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn scratch(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("xmod-cli-{}-{name}", std::process::id()))
}

#[test]
fn build_reports_order_and_lengths() {
    let out = xmod(&["build", r#"{"p":3,"n":2,"m":1,"a":[0],"d":1}"#]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["order"], "3^2");
    assert_eq!(v["cyclic"], true);
    assert_eq!(v["length_y"], 2);
}

#[test]
fn build_with_all_null_a_has_order_p_to_the_m() {
    let v = json(&xmod(&["build", r#"{"p":3,"n":1,"m":2,"a":[null,null],"d":1}"#]));
    assert_eq!(v["log_order"], 2);
}

#[test]
fn malformed_input_exits_2() {
    assert_eq!(xmod(&["build", r#"{"p":3,"n":2,"m":2,"a":[0],"d":1}"#]).status.code(), Some(2));
    assert_eq!(xmod(&["build", "{not json"]).status.code(), Some(2));
    assert_eq!(xmod(&["build", "/no/such/file.json"]).status.code(), Some(2));
}

#[test]
fn check_exit_codes_and_clause_tags() {
    assert_eq!(xmod(&["check", r#"{"p":3,"n":2,"m":2,"a":[0,2],"d":4}"#]).status.code(), Some(0));
    let out = xmod(&["check", r#"{"p":2,"n":1,"m":1,"a":[0],"d":1}"#]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["failed"], serde_json::json!(["IV"]));
    assert_eq!(xmod(&["check", r#"{"p":4,"n":1,"m":1,"a":[0],"d":1}"#]).status.code(), Some(2));
}

#[test]
fn indecomposable_exit_codes() {
    assert_eq!(xmod(&["indecomposable", r#"{"p":3,"n":2,"m":2,"a":[0,2],"d":4}"#]).status.code(), Some(0));
    let out = xmod(&["indecomposable", r#"{"p":2,"n":2,"m":2,"a":[0,1],"d":1}"#]);
    assert_eq!(out.status.code(), Some(1));
    assert!(json(&out)["certificate"]["idempotent"].is_array());
    let zero = xmod(&["indecomposable", r#"{"p":2,"n":1,"m":1,"a":[null],"d":0}"#]);
    assert_eq!(zero.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&zero.stderr).contains("zero module"));
}

#[test]
fn decompose_with_witness_and_degenerate_split() {
    let out = xmod(&["decompose", r#"{"p":2,"n":2,"m":2,"a":[0,1],"d":1}"#, "--witness", "0"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["hat_params"]["a"], serde_json::json!([0, null]));
    let out = xmod(&["decompose", r#"{"p":2,"n":1,"m":2,"a":[0,1],"d":3}"#, "--degenerate"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn recover_a_round_trip() {
    let out = xmod(&["recover-a", r#"{"p":3,"n":2,"m":2,"a":[0,2],"d":4}"#]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["recovered"], serde_json::json!([0, 2]));
}

#[test]
fn verify_kerbasic_passes_and_unknown_suite_is_an_error() {
    let out = xmod(&["verify", "kerbasic", "--range-p", "2,3", "--range-m", "1..3", "--range-n", "0..2"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["failed"], 0);
    assert!(v["passed"].as_u64().unwrap() > 0);
    assert_eq!(xmod(&["verify", "nope"]).status.code(), Some(2));
}

#[test]
fn reports_do_not_depend_on_worker_count() {
    let strip = |args: &[&str]| {
        let mut v = json(&xmod(args));
        v["elapsed_ms"] = Value::Null;
        v["config"]["jobs"] = Value::Null;
        v.to_string()
    };
    let a = strip(&["verify", "cycprop", "--samples", "30", "--seed", "7"]);
    let b = strip(&["verify", "cycprop", "--samples", "30", "--seed", "7", "--jobs", "4"]);
    assert_eq!(a, b);
}

#[test]
fn failing_cases_replay() {
    let path = scratch("section7.json");
    let p = path.to_str().unwrap();
    let out = xmod(&["verify", "section7", "--range-p", "2", "--range-n", "1", "--range-m", "3", "--d-policy", "3", "--out", p]);
    assert_eq!(out.status.code(), Some(1));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let failing: Vec<&Value> = report["cases"].as_array().unwrap().iter().filter(|c| c["verdict"] == "fail").collect();
    assert!(!failing.is_empty());

    let replay = xmod(&["verify", "--replay", p]);
    assert_eq!(replay.status.code(), Some(1));
    let replayed = json(&replay)["replayed"].as_array().unwrap().clone();
    assert_eq!(replayed.len(), failing.len());
    assert!(replayed.iter().all(|c| c["verdict"] == "fail"));

    // a split-off payload goes straight back through the single-case command
    let split = failing.iter().find(|c| c["check"] == "split-off").expect("split-off failure");
    let single = xmod(&["decompose", &split["payload"].to_string()]);
    assert_eq!(single.status.code(), Some(1));
    std::fs::remove_file(&path).ok();
}
