#![allow(dead_code)]

use std::path::{Path, PathBuf};

use hepaflow::pipeline::PipelineConfig;

pub fn standin() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/ilpd_standin.csv")
}

/// Full pipeline shape with every expensive knob turned down.
pub fn small_config_json(out: &Path) -> serde_json::Value {
    serde_json::json!({
        "data_path": standin(),
        "output_dir": out,
        "paper_total": false,
        "synthetic": {"n_samples": 200},
        "tsne": {"iterations": 120, "perplexity": 10.0, "exaggeration_iters": 50, "momentum_switch_iter": 50},
        "umap": {"epochs": 40},
        "classifiers": [
            {"kind": "logistic_regression", "epochs": 100},
            {"kind": "knn"},
            {"kind": "random_forest", "n_trees": 15},
            {"kind": "mlp", "epochs": 10, "hidden": 16}
        ],
        "eval": {"folds": 3, "learning_fractions": [0.5, 1.0]}
    })
}

pub fn small_config(out: &Path) -> PipelineConfig {
    PipelineConfig::from_json(&small_config_json(out).to_string()).unwrap()
}
