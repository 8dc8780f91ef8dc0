//! Golden tests for the command-line surface: output shapes, the
//! exit-code contract, and batch determinism.

use serde_json::Value;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qilab"))
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn tempdir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("qilab-cli-test-{}-{}", tag, std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn ajf_scalar_and_rotation() {
    let dir = tempdir("ajf");
    let m2 = write(&dir, "m2.json", r#"{ "rows": [[2]] }"#);
    let out = run(&["ajf", m2.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v[0]["size"], 1);
    assert_eq!(v[0]["modulus"]["minpoly"], serde_json::json!([-2, 1]));

    let rot = write(&dir, "rot.json", r#"{ "rows": [[0, -2], [1, 0]] }"#);
    let out = run(&["ajf", rot.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    let blocks = v.as_array().unwrap();
    assert_eq!(blocks.len(), 2);
    for b in blocks {
        assert_eq!(b["size"], 1);
        assert_eq!(b["modulus"]["minpoly"], serde_json::json!([-2, 0, 1]));
    }
}

#[test]
fn ajf_error_exit_codes() {
    let dir = tempdir("ajf-err");
    let bad = write(&dir, "bad.json", "not json at all");
    let out = run(&["ajf", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());

    let sing = write(&dir, "sing.json", r#"{ "rows": [[1, 2], [2, 4]] }"#);
    let out = run(&["ajf", sing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn classify_exit_codes_and_shape() {
    let dir = tempdir("classify");
    let m2 = write(&dir, "m2.json", r#"{ "rows": [[2]] }"#);
    let m3 = write(&dir, "m3.json", r#"{ "rows": [[3]] }"#);
    let m8 = write(&dir, "m8.json", r#"{ "rows": [[8]] }"#);
    let uni = write(&dir, "uni.json", r#"{ "rows": [[1, 1], [0, 1]] }"#);

    let out = run(&["classify", m2.to_str().unwrap(), m8.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["equivalent"], true);
    assert_eq!(v["witness"], serde_json::json!([3, 1]));
    assert_eq!(v["certificate"], "MATCHED");

    let out = run(&["classify", m2.to_str().unwrap(), m3.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let v = stdout_json(&out);
    assert_eq!(v["certificate"], "DET_INDEPENDENT");

    let out = run(&["classify", uni.to_str().unwrap(), m2.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("POLYCYCLIC_OUT_OF_SCOPE"), "stderr: {}", msg);

    let out = run(&["classify", m2.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn batch_partition_and_determinism() {
    let dir = tempdir("batch");
    let corpus = write(
        &dir,
        "corpus.json",
        r#"{ "entries": [
            { "id": "two", "matrix": { "rows": [[2]] } },
            { "id": "four", "matrix": { "rows": [[4]] } },
            { "id": "eight", "matrix": { "rows": [[8]] } },
            { "id": "three", "matrix": { "rows": [[3]] } },
            { "id": "broken", "matrix": { "rows": [[1, 2], [2, 4]] } }
        ] }"#,
    );
    let out1 = dir.join("out1.json");
    let out2 = dir.join("out2.json");
    let st = bin()
        .args([
            "classify",
            "--batch",
            corpus.to_str().unwrap(),
            "--output",
            out1.to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(0));
    let st = bin()
        .args([
            "classify",
            "--batch",
            corpus.to_str().unwrap(),
            "--output",
            out2.to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(0));
    let b1 = std::fs::read(&out1).unwrap();
    let b2 = std::fs::read(&out2).unwrap();
    assert_eq!(b1, b2, "batch output must be byte-identical");

    let doc: Value = serde_json::from_slice(&b1).unwrap();
    let classes = doc["classes"].as_array().unwrap();
    assert_eq!(classes.len(), 2);
    assert_eq!(classes[0], serde_json::json!(["eight", "four", "two"]));
    assert_eq!(classes[1], serde_json::json!(["three"]));
    // singular entry recorded but excluded from pairs
    let entries = doc["entries"].as_array().unwrap();
    let broken = entries.iter().find(|e| e["id"] == "broken").unwrap();
    assert_eq!(broken["status"], "SINGULAR");
    assert_eq!(doc["config"]["precision"], 60);
    assert_eq!(doc["config"]["t_max"], 40.0);
    assert_eq!(doc["config"]["degree_threshold"], 0.2);
    assert_eq!(doc["config"]["max_multiple"], 8);
}

#[test]
fn batch_empty_corpus() {
    let dir = tempdir("batch-empty");
    let corpus = write(&dir, "corpus.json", r#"{ "entries": [] }"#);
    let out = run(&["classify", "--batch", corpus.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let doc = stdout_json(&out);
    assert_eq!(doc["entries"], serde_json::json!([]));
    assert_eq!(doc["pairs"], serde_json::json!([]));
    assert_eq!(doc["classes"], serde_json::json!([]));
}

#[test]
fn growth_command_csv() {
    let dir = tempdir("growth");
    let j = write(&dir, "j.json", r#"{ "rows": [[2, 1], [0, 2]] }"#);
    let csv = dir.join("samples.csv");
    let out = run(&[
        "growth",
        j.to_str().unwrap(),
        "--vector",
        "0,1",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["degree"], 1);
    let rate = v["rate"].as_f64().unwrap();
    assert!((rate - 2f64.ln()).abs() < 1e-3);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("t,log_norm\n"));
    assert!(text.lines().count() > 10);
}

#[test]
fn qm_dist_examples() {
    let out = run(&["qm-dist", "2", "0:0000", "0:0001"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["distance"], "1/8");
    assert_eq!(v["divergence_height"], 3);

    // equal addresses: distance zero, no divergence height
    let out = run(&["qm-dist", "2", "0:01(1)", "0:0(1)"]);
    let v = stdout_json(&out);
    assert_eq!(v["distance"], "0");
    assert_eq!(v["divergence_height"], Value::Null);

    // negative divergence height gives an integer distance
    let out = run(&["qm-dist", "2", "-1:1", "0:"]);
    let v = stdout_json(&out);
    assert_eq!(v["distance"], "2");
}

#[test]
fn verify_command_jordan_block_passes() {
    let dir = tempdir("verify-jb");
    let j = write(&dir, "j.json", r#"{ "rows": [[2, 1], [0, 2]] }"#);
    let out = run(&["verify", j.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["pass"], true);
    let rec = &v["properties"]["reconstruction"];
    assert_eq!(rec["pass"], true);
    // one size-2 block at modulus ~2
    assert_eq!(rec["blocks"][0]["size"], 2);
    let modulus = rec["blocks"][0]["modulus"].as_f64().unwrap();
    assert!((modulus - 2.0).abs() < 1e-4);
}

#[test]
fn verify_command_hyperbolic_passes() {
    let dir = tempdir("verify-hyp");
    let h = write(&dir, "hyp.json", r#"{ "rows": [[2, 1], [1, 1]] }"#);
    let out = run(&["verify", h.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["pass"], true);
    // expanding and contracting moduli recovered: ~2.618 and ~0.382
    let blocks = v["properties"]["reconstruction"]["blocks"].as_array().unwrap();
    let mut moduli: Vec<f64> = blocks.iter().map(|b| b["modulus"].as_f64().unwrap()).collect();
    moduli.sort_by(f64::total_cmp);
    assert!((moduli[0] - 0.3819660112501051).abs() < 1e-4);
    assert!((moduli[1] - 2.618033988749895).abs() < 1e-4);
}

#[test]
fn verify_command_unipotent_skips_reconstruction() {
    let dir = tempdir("verify");
    let uni = write(&dir, "uni.json", r#"{ "rows": [[1, 1], [0, 1]] }"#);
    let out = run(&["verify", uni.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    assert_eq!(v["pass"], true);
    assert_eq!(v["properties"]["reconstruction"]["skipped"], "CENTER_PRESENT");
    assert_eq!(v["properties"]["growth_envelopes"]["pass"], true);
    assert_eq!(v["properties"]["cocycle"]["pass"], true);
}

#[test]
fn precision_env_var_is_honored() {
    let dir = tempdir("env");
    let m2 = write(&dir, "m2.json", r#"{ "rows": [[2]] }"#);
    let out = bin()
        .env("QILAB_PRECISION", "30")
        .args(["growth", m2.to_str().unwrap(), "--vector", "1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["config"]["precision"], 30);
}
