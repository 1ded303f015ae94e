//! Splitting, cross-validation, metrics and curves.

mod curves;
mod isotonic;
mod metrics;
mod protocol;
mod split;

pub use curves::{auc, calibration_bins, pr_curve, roc_auc, roc_curve, CurveKind, CurveSeries};
pub use isotonic::{isotonic_fit, IsotonicFit};
pub use metrics::{basic_metrics, brier, confusion, timed, BasicMetrics, ConfusionMatrix};
pub use protocol::{
    cross_validate, holdout, learning_curve, CvOutcome, Evaluation, FoldData, LearningCurve, LearningPoint, MetricRow,
};
pub use split::{stratified_kfold, stratified_split, Fold};
