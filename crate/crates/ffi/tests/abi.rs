use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use hepaflow_ffi::*;

fn repo_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn last_error() -> String {
    let p = hf_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(hf_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn dataset_round_trip() {
    let path = CString::new(repo_root().join("data/ilpd_standin.csv").to_str().unwrap()).unwrap();
    let mut ds = ptr::null_mut();
    unsafe {
        assert_eq!(hf_dataset_load(path.as_ptr(), &mut ds), HfStatus::Ok);
        let (rows, cols) = (hf_dataset_rows(ds), hf_dataset_cols(ds));
        assert_eq!((rows, cols), (583, 9));
        let mut features = vec![0.0; rows * cols];
        let mut labels = vec![9u8; rows];
        assert_eq!(hf_dataset_copy_features(ds, features.as_mut_ptr(), features.len()), HfStatus::Ok);
        assert_eq!(hf_dataset_copy_labels(ds, labels.as_mut_ptr(), labels.len()), HfStatus::Ok);
        assert_eq!(features.iter().filter(|v| v.is_nan()).count(), 4);
        assert_eq!(labels.iter().filter(|&&l| l == 1).count(), 416);
        assert_eq!(
            hf_dataset_copy_labels(ds, labels.as_mut_ptr(), 10),
            HfStatus::BufferTooSmall
        );
        assert!(last_error().contains("need 583"));
        hf_dataset_free(ds);
    }
}

#[test]
fn simulate_defaults() {
    let spec = CString::new(r#"{"n_samples": 50}"#).unwrap();
    let mut ds = ptr::null_mut();
    unsafe {
        assert_eq!(hf_simulate(spec.as_ptr(), &mut ds), HfStatus::Ok);
        assert_eq!((hf_dataset_rows(ds), hf_dataset_cols(ds)), (50, 9));
        hf_dataset_free(ds);
    }
    let bad = CString::new(r#"{"samples": 50}"#).unwrap();
    let mut ds = ptr::null_mut();
    unsafe {
        assert_eq!(hf_simulate(bad.as_ptr(), &mut ds), HfStatus::Config);
        assert!(ds.is_null());
    }
}

#[test]
fn errors_map_to_status() {
    let missing = CString::new("/nonexistent/ilpd.csv").unwrap();
    let mut ds = ptr::null_mut();
    unsafe {
        assert_eq!(hf_dataset_load(missing.as_ptr(), &mut ds), HfStatus::Io);
        assert!(last_error().contains("/nonexistent/ilpd.csv"));
        assert_eq!(hf_dataset_load(ptr::null(), &mut ds), HfStatus::NullPointer);
        assert_eq!(hf_dataset_rows(ptr::null()), 0);
        hf_dataset_free(ptr::null_mut());
        hf_report_free(ptr::null_mut());
    }
    let cfg = CString::new(r#"{"eval": {"folds": 1}}"#).unwrap();
    let mut report = ptr::null_mut();
    unsafe {
        assert_eq!(hf_run(cfg.as_ptr(), &mut report), HfStatus::Config);
    }
}

#[test]
fn metric_helpers() {
    let y = [0u8, 0, 1, 1];
    let s = [0.1, 0.4, 0.35, 0.8];
    let mut out = 0.0;
    unsafe {
        assert_eq!(hf_roc_auc(y.as_ptr(), s.as_ptr(), 4, &mut out), HfStatus::Ok);
        assert!((out - 0.75).abs() < 1e-12);
        assert_eq!(hf_brier(y.as_ptr(), s.as_ptr(), 4, &mut out), HfStatus::Ok);
        let expected = (0.01 + 0.16 + 0.4225 + 0.04) / 4.0;
        assert!((out - expected).abs() < 1e-12);
        assert_eq!(hf_roc_auc(ptr::null(), s.as_ptr(), 4, &mut out), HfStatus::NullPointer);
    }
}

#[test]
fn small_run_returns_summary() {
    let dir = tempfile_dir();
    let cfg = serde_json::json!({
        "data_path": repo_root().join("data/ilpd_standin.csv"),
        "output_dir": dir,
        "paper_total": false,
        "synthetic": {"n_samples": 100},
        "tsne": {"iterations": 60, "perplexity": 10.0},
        "umap": {"epochs": 20},
        "classifiers": [{"kind": "knn"}],
        "eval": {"folds": 3, "learning_fractions": [0.5, 1.0]},
        "output": {"stages": false, "plots": false}
    });
    let cfg = CString::new(cfg.to_string()).unwrap();
    let mut report = ptr::null_mut();
    unsafe {
        assert_eq!(hf_run(cfg.as_ptr(), &mut report), HfStatus::Ok, "{}", last_error());
        let summary = CStr::from_ptr(hf_report_summary_json(report)).to_str().unwrap();
        let v: serde_json::Value = serde_json::from_str(summary).unwrap();
        assert_eq!(v["mode"], "faithful");
        assert_eq!(v["metrics"].as_array().unwrap().len(), 2);
        hf_report_free(report);
    }
    assert!(dir.join("metrics.csv").exists());
    std::fs::remove_dir_all(&dir).unwrap();
}

fn tempfile_dir() -> PathBuf {
    let dir = std::env::temp_dir().join(format!("hepaflow-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

/// The generated header must be valid C on its own.
#[test]
fn header_compiles_as_c() {
    let header = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include/hepaflow.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for name in ["hf_run", "hf_dataset_load", "hf_simulate", "hf_last_error", "HF_STATUS_OK"] {
        assert!(text.contains(name), "header lacks {name}");
    }
    let Ok(status) = Command::new("cc")
        .args(["-fsyntax-only", "-Wall", "-Werror", "-x", "c"])
        .arg(&header)
        .status()
    else {
        eprintln!("no C compiler found; skipped syntax check");
        return;
    };
    assert!(status.success());
}
