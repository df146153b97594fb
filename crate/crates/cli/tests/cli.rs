use std::fs;
use std::path::PathBuf;

use ldpfair::scenarios::{builtin_scenario, SCENARIO_NAMES};
use ldpfair_cli::run_cli;
use serde_json::Value;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("ldpfair").chain(args.iter().copied());
    let code = run_cli(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json(args: &[&str]) -> Value {
    let (code, out, err) = run(args);
    assert_eq!(code, 0, "{err}");
    serde_json::from_str(&out).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ldpfair-cli-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn scenarios_list_names_every_builtin() {
    let doc = json(&["scenarios", "list"]);
    let names: Vec<&str> = doc["scenarios"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s["name"].as_str().unwrap())
        .collect();
    assert_eq!(names, SCENARIO_NAMES);
}

#[test]
fn analyze_aligns_arrays_with_epsilon() {
    let doc = json(&["analyze", "--scenario", "S1", "--eps", "0.5,2"]);
    assert_eq!(doc["epsilon"], serde_json::json!([0.5, 2.0]));
    assert_eq!(doc["verdict"].as_array().unwrap().len(), 2);
    assert_eq!(doc["verdict"][0]["regime"], "eliminated");
    assert_eq!(doc["verdict"][1]["regime"], "unchanged");
}

#[test]
fn output_is_byte_identical_across_invocations() {
    for args in [
        &["analyze", "--scenario", "S3", "--eps-min", "0.1", "--eps-max", "4", "--points", "7"][..],
        &["simulate", "--scenario", "S2", "--eps", "0.5,8", "--n", "2000", "--runs", "3", "--seed", "9"],
        &["thresholds", "--scenario", "german", "--format", "csv"],
    ] {
        assert_eq!(run(args), run(args));
    }
}

#[test]
fn simulate_does_not_depend_on_worker_count() {
    let base = ["simulate", "--scenario", "S1", "--eps", "0.5,2", "--n", "3000", "--runs", "4", "--seed", "3"];
    let one = run(&[&base[..], &["--workers", "1"]].concat());
    let four = run(&[&base[..], &["--workers", "4"]].concat());
    assert_eq!(one.0, 0, "{}", one.2);
    let strip = |s: &str| {
        let mut v: Value = serde_json::from_str(s).unwrap();
        v["config"].as_object_mut().unwrap().remove("workers");
        v
    };
    assert_eq!(strip(&one.1), strip(&four.1));
}

#[test]
fn csv_headers() {
    let (_, out, _) = run(&["analyze", "--scenario", "S1", "--eps", "0.5", "--format", "csv"]);
    assert_eq!(
        out.lines().next().unwrap(),
        "scenario,epsilon,run,metric,group_or_x,baseline,ldp,analytic_baseline,analytic_ldp"
    );
    let (_, out, _) = run(&["thresholds", "--scenario", "S1", "--format", "csv"]);
    assert_eq!(out.lines().next().unwrap(), "scenario,x,case,group,ratio,epsilon_star,below,above");
    let (_, out, _) = run(&["assumptions", "--scenario", "S1", "--format", "csv"]);
    assert_eq!(out.lines().next().unwrap(), "scenario,check,status,detail");
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["analyze", "--scenario", "S99"]).0, 2);
    assert_eq!(run(&["analyze", "--scenario", "german", "--require-assumptions"]).0, 3);
    assert_eq!(run(&["analyze", "--scenario", "S1", "--eps", "-1"]).0, 1);
    assert_eq!(run(&["frobnicate"]).0, 1);
    assert_eq!(run(&["--help"]).0, 0);
    let (code, out, err) = run(&["analyze", "--scenario", "S99"]);
    assert!(out.is_empty());
    assert!(!err.is_empty());
    assert_eq!(code, 2);
}

#[test]
fn dist_file_matches_builtin() {
    let path = scratch("s3.json");
    fs::write(&path, builtin_scenario("S3").unwrap().dist.to_json()).unwrap();
    let from_file = json(&["thresholds", "--dist", path.to_str().unwrap()]);
    let builtin = json(&["thresholds", "--scenario", "S3"]);
    assert_eq!(from_file["rows"], builtin["rows"]);
}

#[test]
fn malformed_dist_is_an_input_error() {
    let path = scratch("bad.json");
    fs::write(&path, r#"{"x_domain": ["0"], "cells": []}"#).unwrap();
    let (code, out, _) = run(&["analyze", "--dist", path.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(out.is_empty());
}

#[test]
fn out_flag_writes_file_and_leaves_stdout_empty() {
    let path = scratch("assumptions.json");
    let (code, out, err) = run(&["assumptions", "--scenario", "german", "--out", path.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    assert!(out.is_empty());
    let doc: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(doc, json(&["assumptions", "--scenario", "german"]));
}

#[test]
fn simulate_config_and_flag_override() {
    let path = scratch("config.json");
    fs::write(&path, r#"{"scenario": "S1", "eps_grid": [0.5], "n": 2000, "runs": 2, "seed": 5}"#).unwrap();
    let p = path.to_str().unwrap();
    let from_config = json(&["simulate", "--config", p]);
    let from_flags = json(&["simulate", "--scenario", "S1", "--eps", "0.5", "--n", "2000", "--runs", "2", "--seed", "5"]);
    assert_eq!(from_config["summary"], from_flags["summary"]);
    let overridden = json(&["simulate", "--config", p, "--runs", "3"]);
    assert_eq!(overridden["runs"].as_array().unwrap().len(), 3);
}

#[test]
fn unknown_config_field_is_rejected() {
    let path = scratch("typo.json");
    fs::write(&path, r#"{"scenario": "S1", "rnus": 3}"#).unwrap();
    assert_eq!(run(&["simulate", "--config", path.to_str().unwrap()]).0, 1);
}

#[test]
fn verify_small_run_passes() {
    let doc = json(&["verify", "--n", "20", "--seed", "1"]);
    let suites = doc["random"].as_array().unwrap();
    assert!(!suites.is_empty());
    assert!(suites.iter().all(|s| s["violations"] == 0));
}
