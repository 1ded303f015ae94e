use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Counts with class 1 (disease) as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }
}

pub fn confusion(y_true: &[u8], y_pred: &[u8]) -> Result<ConfusionMatrix> {
    if y_true.len() != y_pred.len() {
        return Err(Error::Input(format!(
            "{} labels but {} predictions",
            y_true.len(),
            y_pred.len()
        )));
    }
    let mut cm = ConfusionMatrix::default();
    for (&t, &p) in y_true.iter().zip(y_pred) {
        match (t == 1, p == 1) {
            (true, true) => cm.tp += 1,
            (false, true) => cm.fp += 1,
            (false, false) => cm.tn += 1,
            (true, false) => cm.fn_ += 1,
        }
    }
    Ok(cm)
}

/// `None` marks an undefined ratio (zero denominator).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasicMetrics {
    pub accuracy: f64,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: f64,
}

pub fn basic_metrics(cm: &ConfusionMatrix) -> BasicMetrics {
    let ratio = |num: usize, den: usize| (den > 0).then(|| num as f64 / den as f64);
    let precision = ratio(cm.tp, cm.tp + cm.fp);
    let recall = ratio(cm.tp, cm.tp + cm.fn_);
    let f1 = match (precision, recall) {
        (Some(p), Some(r)) if p + r > 0.0 => 2.0 * p * r / (p + r),
        _ => 0.0,
    };
    BasicMetrics {
        accuracy: ratio(cm.tp + cm.tn, cm.total()).unwrap_or(0.0),
        precision,
        recall,
        f1,
    }
}

pub fn brier(y_true: &[u8], p_positive: &[f64]) -> Result<f64> {
    if y_true.len() != p_positive.len() || y_true.is_empty() {
        return Err(Error::Input("brier needs equal, non-empty inputs".into()));
    }
    if let Some(p) = p_positive.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::Input(format!("probability {p} outside [0, 1]")));
    }
    let sum: f64 = y_true
        .iter()
        .zip(p_positive)
        .map(|(&y, &p)| (p - y as f64).powi(2))
        .sum();
    Ok(sum / y_true.len() as f64)
}

/// Runs `op` and returns its result with the elapsed wall time in seconds.
pub fn timed<T>(op: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let out = op();
    (out, start.elapsed().as_secs_f64())
}
