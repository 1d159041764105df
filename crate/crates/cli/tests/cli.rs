use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn mthin(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mthin"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, body: &str) {
    std::fs::write(dir.join(name), body).unwrap();
}

const HARD_CORE: &str = r#"{"variant":"MatI","lambda":100.0,"p0":1.0,"f":{"id":"hardcore","R":0.05},"dim":2}"#;
const WINDOW: &str = r#"{"dim":2,"lower":[0,0],"upper":[1,1]}"#;

#[test]
fn divergent_intensity_exits_3_with_json() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "m.json",
        r#"{"variant":"MatI","lambda":1.0,"p0":1.0,"f":{"id":"constant","c":0.5},"dim":2}"#,
    );
    let out = mthin(
        &["--json-errors", "analytic", "--model", "m.json", "--stat", "intensity", "--out", "i.json"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(3));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "divergent");
    let res: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("i.json")).unwrap()).unwrap();
    assert_eq!(res["value"], 0.0);
    assert_eq!(res["diagnostic"]["code"], "divergent");
}

#[test]
fn validation_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "bad.json",
        r#"{"variant":"MatI","lambda":1.0,"p0":1.0,"f":{"id":"example1","a":1.5,"R":1},"dim":2}"#,
    );
    let out = mthin(&["--json-errors", "validate", "--model", "bad.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["issues"][0]["path"], "f.a");
}

#[test]
fn missing_file_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let out = mthin(&["validate", "--model", "nope.json"], dir.path());
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn pipeline_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write(d, "m.json", HARD_CORE);
    write(d, "w.json", WINDOW);
    write(
        d,
        "family.json",
        &format!(r#"{{"model":{HARD_CORE},"free":[{{"path":"f.R","lower":0.01,"upper":0.1}}]}}"#),
    );
    let steps: Vec<Vec<&str>> = vec![
        vec!["--seed", "11", "simulate", "--model", "m.json", "--window", "w.json", "--out", "p.csv"],
        vec!["estimate", "--pattern", "p.csv", "--stat", "L", "--r-max", "0.2", "--out", "l.csv"],
        vec!["--seed", "3", "fit", "--pattern", "p.csv", "--family", "family.json", "--rmax", "0.15", "--grid", "64", "--out", "fit.json"],
        vec!["--seed", "4", "devtest", "--pattern", "p.csv", "--model", "fit.json", "--stat", "L", "--k", "19", "--r-max", "0.2", "--out", "t.json"],
    ];
    let files = ["p.csv", "l.csv", "fit.json", "t.json"];
    let mut first = Vec::new();
    for round in 0..2 {
        for s in &steps {
            let out = mthin(s, d);
            assert!(out.status.success(), "{s:?}: {}", String::from_utf8_lossy(&out.stderr));
        }
        let digests: Vec<Vec<u8>> = files.iter().map(|f| std::fs::read(d.join(f)).unwrap()).collect();
        if round == 0 {
            first = digests;
        } else {
            assert_eq!(first, digests);
        }
    }
    let manifest: Value =
        serde_json::from_str(&std::fs::read_to_string(d.join("t.json.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 4);
    assert_eq!(manifest["subcommand"], "devtest");
    assert_eq!(manifest["outputs"]["t.json"].as_str().unwrap().len(), 64);
    let report: Value = serde_json::from_str(&std::fs::read_to_string(d.join("t.json")).unwrap()).unwrap();
    let p = report["p_value"].as_f64().unwrap();
    assert!((0.05..=1.0).contains(&p));
}
