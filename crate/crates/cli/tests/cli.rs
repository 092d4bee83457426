mod common;

use common::{disbench, ok, read_json, write_table};
use ndarray::Array2;

#[test]
fn unknown_subcommand_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = disbench(dir.path(), &["frobnicate"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("Usage"), "{err}");
}

#[test]
fn missing_input_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = disbench(dir.path(), &["metrics", "--manifest", "absent.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn out_of_range_threshold_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    write_table(&dir.path().join("e.bin"), common::ids("r", 3), &Array2::eye(3));
    let out = disbench(dir.path(), &["softrank", "--embeddings", "e.bin", "--threshold", "1.5"]);
    assert_eq!(out.status.code(), Some(1));
    let out = disbench(dir.path(), &["--threads", "0", "softrank", "--embeddings", "e.bin"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn softrank_of_scaled_identity_is_full() {
    let dir = tempfile::tempdir().unwrap();
    let x = Array2::from_shape_fn((6, 6), |(i, j)| if i == j { 1.0 + i as f64 } else { 0.0 });
    write_table(&dir.path().join("e.bin"), common::ids("r", 6), &x);
    let out = ok(dir.path(), &["softrank", "--embeddings", "e.bin", "--threshold", "0.1"]);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["soft_rank"], 6);
    assert_eq!(report["relative"], 1.0);
}

#[test]
fn metrics_on_factorized_oracle() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["synth", "--out-dir", "fac"]);
    ok(dir.path(), &["metrics", "--manifest", "fac/manifest.json", "--out", "r.json"]);
    let r = read_json(&dir.path().join("r.json"));
    assert!(r["dci.overall_D"].as_f64().unwrap() >= 0.95, "{}", r["dci.overall_D"]);
    for key in ["dci.per_dim_D", "dci.per_factor_C", "dci.informativeness", "zdiff.raw", "zdiff.scaled"] {
        assert!(!r[key].is_null(), "missing {key}");
    }
    assert_eq!(r["seed"], 0);
    assert_eq!(r["config"]["zdiff_points"], 2000);
}

#[test]
fn run_record_hashes_inputs() {
    let dir = tempfile::tempdir().unwrap();
    write_table(&dir.path().join("e.bin"), common::ids("r", 3), &Array2::eye(3));
    ok(dir.path(), &["--seed", "5", "softrank", "--embeddings", "e.bin", "--out", "out/s.json"]);
    let record = read_json(&dir.path().join("out/run.json"));
    assert_eq!(record["command"], "softrank");
    assert_eq!(record["seed"], 5);
    assert_eq!(record["config"]["threshold"], 0.1);
    assert_eq!(record["version"], env!("CARGO_PKG_VERSION"));
    let bytes = std::fs::read(dir.path().join("e.bin")).unwrap();
    assert_eq!(record["inputs"][0]["path"], "e.bin");
    assert_eq!(
        record["inputs"][0]["fnv1a64"],
        format!("{:016x}", disbench_core::fnv1a64(&bytes))
    );
    let text = std::fs::read_to_string(dir.path().join("out/run.json")).unwrap();
    let stamp_lines: Vec<&str> = text.lines().filter(|l| l.contains("timestamp")).collect();
    assert_eq!(stamp_lines.len(), 1);
    assert!(stamp_lines[0].trim_start().starts_with("\"timestamp\": \""));
}

#[test]
fn config_file_sits_under_flags() {
    let dir = tempfile::tempdir().unwrap();
    let x = Array2::from_shape_fn((4, 4), |(i, j)| if i == j { [1.0, 0.6, 0.3, 0.05][i] } else { 0.0 });
    write_table(&dir.path().join("e.bin"), common::ids("r", 4), &x);
    std::fs::write(
        dir.path().join("cfg.json"),
        r#"{"seed": 9, "softrank": {"embeddings": "e.bin", "threshold": 0.5}}"#,
    )
    .unwrap();
    let base = ["--config", "cfg.json", "--run-json", "run.json", "softrank"];
    let out = ok(dir.path(), &base);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["soft_rank"], 2);
    assert_eq!(read_json(&dir.path().join("run.json"))["seed"], 9);

    let mut args = base.to_vec();
    args.extend(["--threshold", "0.1", "--seed", "1"]);
    let out = ok(dir.path(), &args);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["soft_rank"], 3);
    assert_eq!(read_json(&dir.path().join("run.json"))["seed"], 1);
}

#[test]
fn thread_count_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["synth", "--samples", "300", "--attributes", "4", "--objects", "5", "--out-dir", "d"]);
    let metrics = |threads: &str, out: &str| {
        ok(
            dir.path(),
            &["--threads", threads, "metrics", "--manifest", "d/manifest.json", "--zdiff-points", "300", "--out", out],
        );
        std::fs::read(dir.path().join(out)).unwrap()
    };
    assert_eq!(metrics("1", "a.json"), metrics("4", "b.json"));
}
