use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_prefix-sign"))
}

fn run(args: &[&str]) -> (i32, Value) {
    let out: Output = bin().args(args).output().unwrap();
    let code = out.status.code().unwrap();
    let stdout = String::from_utf8(out.stdout).unwrap();
    let value = if stdout.trim().is_empty() {
        Value::Null
    } else {
        assert_eq!(
            stdout.trim().lines().count(),
            1,
            "single-line JSON: {stdout}"
        );
        serde_json::from_str(stdout.trim()).unwrap()
    };
    (code, value)
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn strip_elapsed(mut v: Value) -> Value {
    if let Some(o) = v.as_object_mut() {
        o.remove("elapsed_ms");
    }
    v
}

#[test]
fn gen_weight_format_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let args = |p: &Path| {
        vec![
            "gen-weight",
            "--n",
            "3",
            "--seed",
            "7",
            "--mode",
            "pm-one",
            "--out",
        ]
        .into_iter()
        .map(String::from)
        .chain([p.to_str().unwrap().to_string()])
        .collect::<Vec<_>>()
    };
    let (code, ra) = run(&args(&a).iter().map(String::as_str).collect::<Vec<_>>());
    assert_eq!(code, 0);
    let (_, rb) = run(&args(&b).iter().map(String::as_str).collect::<Vec<_>>());
    let (ta, tb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(ta, tb);
    assert_eq!(ra["sha256"], rb["sha256"]);

    let table: Value = serde_json::from_slice(&ta).unwrap();
    assert_eq!(table["n"], 3);
    let values = table["values"].as_array().unwrap();
    assert_eq!(values.len(), 8);
    assert_eq!(values[0].as_f64(), Some(0.0));
    assert!(values[1..].iter().all(|v| v.as_f64().unwrap().abs() == 1.0));

    let c = dir.path().join("c.json");
    let (code, _) = run(&[
        "gen-weight",
        "--n",
        "31",
        "--mode",
        "pm-one",
        "--out",
        c.to_str().unwrap(),
    ]);
    assert_eq!(code, 2);
}

#[test]
fn eval_fermion_all_methods_agree() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(
        dir.path(),
        "f.json",
        r#"{"x": ["1", "-1"], "y": ["0", "-1"]}"#,
    );
    let (code, r) = run(&["eval", "--fermion", &f, "--method", "all"]);
    assert_eq!(code, 0);
    assert_eq!(r["g"], 1);
    assert_eq!(r["results"]["brute"], 1);
    assert_eq!(r["results"]["dp"], 1);
    assert!((r["results"]["operator"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert!(r["elapsed_ms"].is_number());
}

#[test]
fn eval_constant_and_size_errors() {
    let (code, r) = run(&["eval", "--n", "6", "--method", "dp"]);
    assert_eq!(code, 0);
    assert_eq!(r["g"], 0);
    assert_eq!(r["method"], "dp");
    assert_eq!(r["n"], 6);

    assert_eq!(run(&["eval", "--method", "brute", "--n", "12"]).0, 2);
    assert_eq!(run(&["eval", "--method", "operator", "--n", "21"]).0, 2);
    assert_eq!(run(&["eval", "--method", "dp", "--n", "31"]).0, 2);
    assert_eq!(run(&["eval", "--method", "dp"]).0, 2);
    assert_eq!(run(&["eval", "--method", "bogus", "--n", "2"]).0, 2);
}

#[test]
fn eval_weight_file_all_methods() {
    let dir = tempfile::tempdir().unwrap();
    let w = dir.path().join("w.json");
    let w = w.to_str().unwrap();
    run(&[
        "gen-weight",
        "--n",
        "7",
        "--seed",
        "3",
        "--mode",
        "uniform",
        "--out",
        w,
    ]);
    let (code, r) = run(&["eval", "--weight", w, "--method", "all"]);
    assert_eq!(code, 0, "{r}");
    for d in r["diffs"].as_object().unwrap().values() {
        assert!(d.as_f64().unwrap() <= 1e-9);
    }
}

#[test]
fn parse_errors_exit_four() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(
        dir.path(),
        "bad.json",
        "{\"n\": 2,\n \"values\": [0, 1, 2, 1]}",
    );
    let out = bin().args(["eval", "--weight", &bad]).output().unwrap();
    assert_eq!(out.status.code(), Some(4));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("mask 2"), "{err}");

    let broken = write(dir.path(), "broken.json", "{\"n\": 2,\n \"values\": [0, 1,");
    let out = bin().args(["eval", "--weight", &broken]).output().unwrap();
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8(out.stderr).unwrap().contains("line"));

    let f = write(
        dir.path(),
        "f.json",
        r#"{"x": ["1", "q"], "y": ["0", "0"]}"#,
    );
    let out = bin().args(["eval", "--fermion", &f]).output().unwrap();
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8(out.stderr).unwrap().contains("x[1]"));

    assert_eq!(run(&["eval", "--weight", "/nonexistent/w.json"]).0, 4);
}

#[test]
fn check_bound_reports() {
    let dir = tempfile::tempdir().unwrap();
    let t = write(dir.path(), "t.json", r#"{"n": 2, "values": [0, 1, -1, 1]}"#);
    let (code, r) = run(&["check-bound", "--weight", &t]);
    assert_eq!(code, 0);
    assert_eq!(r["ratio"].as_f64(), Some(1.0));
    assert_eq!(r["bound_exact"]["base"], 2);

    let (code, r) = run(&["check-bound", "--n", "5"]);
    assert_eq!(code, 0);
    assert_eq!(r["ratio"].as_f64(), Some(0.0));

    let w = dir.path().join("w.json");
    let w = w.to_str().unwrap();
    run(&[
        "gen-weight",
        "--n",
        "12",
        "--seed",
        "5",
        "--mode",
        "uniform",
        "--out",
        w,
    ]);
    let (code, r) = run(&["check-bound", "--weight", w]);
    assert_eq!(code, 0);
    assert_eq!(r["ok"], true);

    let f = write(dir.path(), "f.json", r#"{"x": ["1"], "y": ["0"]}"#);
    let (code, r) = run(&["check-bound", "--fermion", &f, "--method", "brute"]);
    assert_eq!(code, 0);
    assert_eq!(r["sum"], 1);
    assert_eq!(r["bound"].as_f64(), Some(1.0));
    assert_eq!(r["two_sided_ok"], true);
}

#[test]
fn cross_validate_runs_clean_and_is_deterministic() {
    let (code, a) = run(&[
        "cross-validate",
        "--n-max",
        "6",
        "--trials",
        "20",
        "--seed",
        "1",
    ]);
    assert_eq!(code, 0);
    assert_eq!(a["ok"], true);
    for stats in a["pairs"].as_object().unwrap().values() {
        assert_eq!(stats["exact_max_diff"].as_f64(), Some(0.0));
        assert!(stats["real_max_diff"].as_f64().unwrap() < 1e-9);
    }
    let groups = a["groups"].as_array().unwrap();
    assert_eq!(groups.len(), 18);
    assert_eq!(groups[0]["n"], 1);
    assert_eq!(groups[0]["mode"], "uniform");
    let (_, b) = run(&[
        "cross-validate",
        "--n-max",
        "6",
        "--trials",
        "20",
        "--seed",
        "1",
    ]);
    assert_eq!(a, b);

    let (code, r) = run(&["cross-validate", "--n-max", "1", "--trials", "3"]);
    assert_eq!(code, 0);
    assert_eq!(r["ok"], true);
    assert_eq!(run(&["cross-validate", "--n-max", "21"]).0, 2);
}

#[test]
fn search_commands() {
    let (code, r) = run(&["search", "--n", "2", "--exhaustive"]);
    assert_eq!(code, 0);
    assert_eq!(r["max_abs_g"], 2);
    assert_eq!(r["ratio"].as_f64(), Some(1.0));
    assert_eq!(r["table"].as_array().unwrap().len(), 3);

    let (_, r) = run(&["search", "--n", "1"]);
    assert_eq!(r["max_abs_g"], 1);

    let (_, local) = run(&["search", "--n", "3", "--restarts", "16", "--seed", "9"]);
    let (_, exhaustive) = run(&["search", "--n", "3", "--exhaustive"]);
    assert_eq!(local["max_abs_g"], exhaustive["max_abs_g"]);
    for key in [
        "n",
        "max_abs_g",
        "bound",
        "ratio",
        "table",
        "restarts_used",
        "sweeps_total",
    ] {
        assert!(local.get(key).is_some(), "missing {key}");
    }
    assert_eq!(run(&["search", "--n", "5", "--exhaustive"]).0, 2);
    assert_eq!(run(&["search", "--n", "15"]).0, 2);
}

#[test]
fn repeated_runs_are_identical() {
    let (_, a) = run(&["eval", "--n", "9", "--constant", "-1", "--method", "all"]);
    let (_, b) = run(&["eval", "--n", "9", "--constant", "-1", "--method", "all"]);
    assert_eq!(strip_elapsed(a), strip_elapsed(b));
    let (_, a) = run(&["search", "--n", "5", "--seed", "4", "--restarts", "8"]);
    let (_, b) = run(&["search", "--n", "5", "--seed", "4", "--restarts", "8"]);
    assert_eq!(a, b);
}

#[test]
fn thread_count_from_environment() {
    let out = bin()
        .env("PREFIX_SIGN_THREADS", "2")
        .args(["eval", "--n", "8"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let out = bin()
        .env("PREFIX_SIGN_THREADS", "lots")
        .args(["eval", "--n", "8"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
