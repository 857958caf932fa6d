use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_intrinsic-sections");

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/configs").join(name)
}

fn run(args: &[&str], out_dir: Option<&Path>) -> Output {
    let mut cmd = Command::new(BIN);
    cmd.args(args).env_remove("ILS_OUTPUT_DIR");
    if let Some(d) = out_dir {
        cmd.env("ILS_OUTPUT_DIR", d);
    }
    cmd.output().unwrap()
}

fn body(v: &Value) -> Value {
    let mut v = v.clone();
    v.as_object_mut().unwrap().remove("wall_time_ms");
    v
}

#[test]
fn passing_configs_exit_zero() {
    for name in ["heisenberg_flat.json", "linear_sums.json", "reciprocal.json", "step2_sum.json"] {
        let out = run(&["run", config(name).to_str().unwrap()], None);
        assert_eq!(out.status.code(), Some(0), "{name}: {}", String::from_utf8_lossy(&out.stderr));
        let v: Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(v["passed"], true);
    }
}

#[test]
fn failing_task_exits_one() {
    let out = run(&["run", config("incompatible_sum.json").to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["passed"], false);
    assert!(String::from_utf8_lossy(&out.stderr).contains("[FAIL]"));
}

#[test]
fn usage_and_schema_errors_exit_two() {
    assert_eq!(run(&["run", config("malformed.json").to_str().unwrap()], None).status.code(), Some(2));
    assert_eq!(run(&["run", "/nonexistent/config.json"], None).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"], None).status.code(), Some(2));
    assert_eq!(run(&[], None).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"space": {"kind": "heisenberg", "n": 1}, "tasks": [], "bogus": 1}"#).unwrap();
    assert_eq!(run(&["run", bad.to_str().unwrap()], None).status.code(), Some(2));
}

#[test]
fn output_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["run", config("reciprocal.json").to_str().unwrap()], Some(dir.path()));
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(v["passed"], true);
}

#[test]
fn reports_are_reproducible_and_seed_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("heisenberg_flat.json");
    let mut bodies = Vec::new();
    for (i, seed) in ["7", "7", "99"].iter().enumerate() {
        let path = dir.path().join(format!("r{i}.json"));
        let out = run(&["run", cfg.to_str().unwrap(), "--seed", seed, "--out", path.to_str().unwrap()], None);
        assert_eq!(out.status.code(), Some(0));
        let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        bodies.push(body(&v));
    }
    assert_eq!(serde_json::to_string(&bodies[0]).unwrap(), serde_json::to_string(&bodies[1]).unwrap());
    assert_eq!(bodies[2]["seed"], 99);
    assert_ne!(bodies[0]["tasks"], bodies[2]["tasks"]);
}

#[test]
fn csv_tables_written() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("csv");
    let out = run(
        &["run", config("reciprocal.json").to_str().unwrap(), "--out", dir.path().join("r.json").to_str().unwrap(),
          "--csv", csv.to_str().unwrap()],
        None,
    );
    assert_eq!(out.status.code(), Some(0));
    let files: Vec<_> = std::fs::read_dir(&csv).unwrap().map(|e| e.unwrap().path()).collect();
    assert!(!files.is_empty());
    for f in files {
        let text = std::fs::read_to_string(&f).unwrap();
        assert!(text.starts_with("key,value"), "{}", f.display());
    }
}

#[test]
fn list_builtins_catalog() {
    let out = run(&["list-builtins"], None);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("reciprocal"));
    assert!(text.contains("heisenberg"));
}
