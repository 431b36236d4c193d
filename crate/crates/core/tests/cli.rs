mod common;

use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(common::bin())
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn fixture(dir: &tempfile::TempDir, name: &str, body: &str) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn measure_phi_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let f = fixture(&dir, "f.txt", "# all-ones and alternating\n++++\n+-+-\n");
    let v = json(&run(&[
        "measure",
        "--input",
        &f,
        "--k",
        "2",
        "--measure",
        "phi",
    ]));
    assert_eq!(v["value"], 3);
    assert_eq!(v["evaluated"], 28);
    let v = json(&run(&[
        "measure",
        "--input",
        &f,
        "--k",
        "2",
        "--measure",
        "ctilde",
    ]));
    assert_eq!(v["value"], 1);
}

#[test]
fn measure_c_and_phitilde() {
    let dir = tempfile::tempdir().unwrap();
    let f = fixture(&dir, "c.txt", "++-+--\n");
    let v = json(&run(&[
        "measure",
        "--input",
        &f,
        "--k",
        "2",
        "--measure",
        "c",
    ]));
    assert_eq!(v["value"], 3);
    let g = fixture(&dir, "g.txt", "++-+\n-+--\n++-+\n");
    let v = json(&run(&[
        "measure",
        "--input",
        &g,
        "--k",
        "2",
        "--measure",
        "phitilde",
    ]));
    assert_eq!(v["value"], 4);
    assert_eq!(v["witness"]["members"], serde_json::json!([0, 2]));
    // the same file is not a family
    let out = run(&["measure", "--input", &g, "--k", "2", "--measure", "phi"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(out.stdout.is_empty());
}

#[test]
fn bounds_fixture() {
    let v = json(&run(&[
        "bounds",
        "--length",
        "100",
        "--k",
        "2",
        "--cardinality",
        "4",
        "--which",
        "family",
    ]));
    assert!((v["lower"].as_f64().unwrap() - 13.434).abs() < 1e-3);
    assert!((v["upper"].as_f64().unwrap() - 83.96).abs() < 1e-2);
}

#[test]
fn tails_fixture() {
    let v = json(&run(&["tails", "--n", "4", "--t", "3", "--exact"]));
    assert_eq!(v["tail"], 0.3125);
    let v = json(&run(&[
        "tails",
        "--n",
        "4",
        "--t",
        "3",
        "--exact",
        "--rational",
    ]));
    assert_eq!(v["tail"], 0.3125);
    let out = run(&[
        "tails", "--n", "4", "--t", "3", "--exact", "--format", "csv",
    ]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text, "n,t,mode,tail\n4,3.0,exact-float,0.3125\n");
}

#[test]
fn rk_and_collide() {
    let v = json(&run(&["rk", "--length", "24", "--k", "2", "--seeds", "2"]));
    assert_eq!(v["r"], 2);
    let d = json(&run(&[
        "rk",
        "--length",
        "24",
        "--k",
        "2",
        "--seeds",
        "2",
        "--descending",
    ]));
    assert_eq!(d["r"], 2);
    let v = json(&run(&[
        "collide", "--length", "1", "--seeds", "1", "--trials", "50",
    ]));
    assert_eq!(v["empirical"], 1.0);
}

#[test]
fn oracle_small() {
    let v = json(&run(&[
        "oracle", "--length", "2", "--size", "1", "--k", "2",
    ]));
    assert_eq!(v["pmf"], serde_json::json!({"1": 1.0}));
    let out = run(&["oracle", "--length", "13", "--size", "1", "--k", "2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    let out = run(&["bounds", "--length", "10", "--k", "2", "--bogus"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(out.stdout.is_empty());
    let out = run(&[
        "mc", "--length", "40", "--size", "4", "--k", "2", "--budget", "10",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    let out = run(&["measure", "--input", "/nonexistent/x", "--k", "2"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn mc_approx_fallback() {
    let v = json(&run(&[
        "mc",
        "--length",
        "40",
        "--size",
        "4",
        "--k",
        "2",
        "--trials",
        "3",
        "--budget",
        "10",
        "--approx",
        "--estimator-trials",
        "300",
    ]));
    assert_eq!(v["summary"][0]["approximate"], 3);
}

#[test]
fn mc_records_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.jsonl");
    let p = path.to_str().unwrap();
    let args = [
        "mc", "--length", "16", "--size", "2", "--k", "2", "--trials", "10", "--seed", "3",
        "--out", p,
    ];
    let v = json(&run(&args));
    assert_eq!(v["summary"][0]["records"], 10);
    let records = crosscorr::experiments::read_jsonl(&path).unwrap();
    assert_eq!(records.len(), 10);
    assert!(records.iter().all(|r| (1..=16).contains(&r.value)));
    // an existing record file is never overwritten
    let again = run(&args);
    assert_eq!(again.status.code(), Some(1));
    assert_eq!(crosscorr::experiments::read_jsonl(&path).unwrap(), records);

    let out = run(&[
        "mc", "--length", "16", "--size", "2", "--k", "2", "--trials", "10", "--seed", "3",
        "--format", "csv",
    ]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 11);
    assert!(text.starts_with(crosscorr::experiments::CSV_HEADER));
}

#[test]
fn sample_writes_input_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fam.txt");
    let p = path.to_str().unwrap();
    let v = json(&run(&[
        "sample", "--length", "8", "--size", "3", "--seed", "5", "--out", p,
    ]));
    assert_eq!(v["sequences"].as_array().unwrap().len(), 3);
    let m = json(&run(&["measure", "--input", p, "--k", "2"]));
    assert!(m["value"].as_u64().unwrap() >= 1);
    let same = json(&run(&[
        "sample", "--length", "8", "--size", "3", "--seed", "5",
    ]));
    assert_eq!(same["sequences"], v["sequences"]);
}

#[test]
fn seeded_runs_are_reproducible() {
    let args = [
        "mc", "--length", "20", "--seeds", "3", "--k-min", "2", "--k-max", "3", "--trials", "8",
        "--seed", "9",
    ];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let mut t1 = vec!["--threads", "1"];
    t1.extend(args);
    let mut t8 = vec!["--threads", "8"];
    t8.extend(args);
    assert_eq!(run(&t1).stdout, run(&t8).stdout);
}
