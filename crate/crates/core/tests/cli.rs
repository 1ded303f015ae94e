mod common;

use std::fs;
use std::process::Command;

fn hepaflow() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hepaflow"))
}

#[test]
fn version_flag() {
    let out = hepaflow().arg("--version").output().unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains(env!("CARGO_PKG_VERSION")));
}

#[test]
fn inspect_reports_missing_ratio() {
    let out = hepaflow().args(["inspect", "--data"]).arg(common::standin()).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("rows: 583"), "{text}");
    assert!(text.contains("A/G: 4"), "{text}");
    assert!(text.contains("disease 416 / no disease 167"), "{text}");

    let out = hepaflow().args(["inspect", "--json", "--data"]).arg(common::standin()).output().unwrap();
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["rows"], 583);
}

#[test]
fn simulate_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    fs::write(&spec, r#"{"n_samples": 40, "seed": 7}"#).unwrap();
    let out = dir.path().join("synthetic.csv");
    let result = hepaflow().args(["simulate", "--spec"]).arg(&spec).arg("--out").arg(&out).output().unwrap();
    assert!(result.status.success());
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 41);
    assert!(text.starts_with("f0,f1,"));
}

#[test]
fn run_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("config.json");
    let json = common::small_config_json(&dir.path().join("ignored"));
    fs::write(&cfg, json.to_string()).unwrap();
    let out = dir.path().join("out");
    let result = hepaflow()
        .args(["run", "--mode", "sound", "--seed", "7", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(result.status.success(), "{}", String::from_utf8_lossy(&result.stderr));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["mode"], "sound");
    assert_eq!(summary["config"]["seed"], 7);
    assert!(!dir.path().join("ignored").exists());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, r#"{"folds": 10}"#).unwrap();
    let out = hepaflow().args(["run", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown field"));

    let data = dir.path().join("broken.csv");
    fs::write(&data, "Age,Gender,TB\n1,Male,x\n").unwrap();
    let out = hepaflow().args(["inspect", "--data"]).arg(&data).output().unwrap();
    assert_eq!(out.status.code(), Some(3));

    let out = hepaflow().args(["run", "--mode", "both", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = hepaflow().arg("frobnicate").output().unwrap();
    assert_ne!(out.status.code(), Some(0));
}
