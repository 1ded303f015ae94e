use serde::{Deserialize, Serialize};

use super::config::{Mode, PipelineConfig};
use crate::dataset::{class_counts, Dataset};
use crate::eval::{ConfusionMatrix, LearningCurve, MetricRow};

/// Shape and class balance after one pipeline step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageLog {
    pub stage: String,
    pub rows: usize,
    pub cols: usize,
    /// `[label 0, label 1]`.
    pub class_counts: [usize; 2],
}

impl StageLog {
    pub fn of(stage: &str, d: &Dataset) -> StageLog {
        let (zeros, ones) = class_counts(d);
        StageLog {
            stage: stage.to_string(),
            rows: d.n_rows(),
            cols: d.n_features(),
            class_counts: [zeros, ones],
        }
    }
}

/// Outlier cells replaced per column, for one fitted partition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IqrLog {
    pub partition: String,
    pub replaced: Vec<(String, usize)>,
}

impl IqrLog {
    pub fn total(&self) -> usize {
        self.replaced.iter().map(|(_, c)| c).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainLog {
    pub partition: String,
    pub train_rows: usize,
    /// Rows placed into the fitted embedding (0 when fitted on everything).
    pub placed_rows: usize,
    pub widths: Vec<(String, usize)>,
    pub kl_initial: f64,
    pub kl_final: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfusionRecord {
    pub model: String,
    /// `split`, or `cv` for counts pooled over validation folds.
    pub protocol: String,
    pub matrix: ConfusionMatrix,
}

/// Brier score on the hold-out scores before and after an isotonic fit on
/// those same scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationLog {
    pub model: String,
    pub brier_raw: f64,
    pub brier_isotonic: f64,
    pub isotonic_levels: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub package_version: String,
    pub os: String,
    pub arch: String,
    pub threads: usize,
}

impl Environment {
    pub fn current() -> Environment {
        Environment {
            package_version: env!("CARGO_PKG_VERSION").to_string(),
            os: std::env::consts::OS.to_string(),
            arch: std::env::consts::ARCH.to_string(),
            threads: rayon::current_num_threads(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub mode: Mode,
    pub config: PipelineConfig,
    pub stages: Vec<StageLog>,
    pub test_rows: usize,
    pub iqr: Vec<IqrLog>,
    pub chains: Vec<ChainLog>,
    pub metrics: Vec<MetricRow>,
    pub confusion: Vec<ConfusionRecord>,
    pub learning_curves: Vec<LearningCurve>,
    pub calibration: Vec<CalibrationLog>,
    /// Paths relative to the output directory, in write order.
    pub manifest: Vec<String>,
    pub environment: Environment,
    /// Conventions and deviations worth reading next to the numbers.
    pub notes: Vec<String>,
}

impl RunReport {
    pub fn metric(&self, model: &str, protocol: &str) -> Option<&MetricRow> {
        self.metrics
            .iter()
            .find(|r| r.model == model && r.protocol == protocol)
    }

    pub fn stage(&self, name: &str) -> Option<&StageLog> {
        self.stages.iter().find(|s| s.stage == name)
    }
}
