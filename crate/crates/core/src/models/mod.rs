//! The four classifiers behind one train / predict-probability interface.
//!
//! `predict` returns 1 whenever P(positive) ≥ 0.5, so exact ties go to the
//! positive (disease) class.

mod forest;
mod knn;
mod logistic;
mod mlp;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{Matrix, SeededRng};

pub use forest::{gini_impurity, ForestModel, ForestParams, Node, Tree};
pub use knn::{KnnModel, KnnParams};
pub use logistic::{LogisticModel, LogisticParams};
pub use mlp::{loss_and_grad, MlpModel, MlpParams, MlpWeights};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClassifierSpec {
    LogisticRegression(LogisticParams),
    Knn(KnnParams),
    RandomForest(ForestParams),
    Mlp(MlpParams),
}

impl ClassifierSpec {
    /// The paper's four models with default hyperparameters.
    pub fn defaults() -> Vec<ClassifierSpec> {
        vec![
            ClassifierSpec::LogisticRegression(LogisticParams::default()),
            ClassifierSpec::Knn(KnnParams::default()),
            ClassifierSpec::RandomForest(ForestParams::default()),
            ClassifierSpec::Mlp(MlpParams::default()),
        ]
    }

    /// Short label used in reports and file names.
    pub fn label(&self) -> &'static str {
        match self {
            ClassifierSpec::LogisticRegression(_) => "LR",
            ClassifierSpec::Knn(_) => "KNN",
            ClassifierSpec::RandomForest(_) => "RF",
            ClassifierSpec::Mlp(_) => "MLP",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ClassifierSpec::LogisticRegression(p) => p.validate(),
            ClassifierSpec::Knn(p) => p.validate(),
            ClassifierSpec::RandomForest(p) => p.validate(),
            ClassifierSpec::Mlp(p) => p.validate(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TrainedClassifier {
    LogisticRegression(LogisticModel),
    Knn(KnnModel),
    RandomForest(ForestModel),
    Mlp(MlpModel),
}

impl TrainedClassifier {
    pub fn n_features(&self) -> usize {
        match self {
            TrainedClassifier::LogisticRegression(m) => m.weights.len(),
            TrainedClassifier::Knn(m) => m.train_x.cols(),
            TrainedClassifier::RandomForest(m) => m.n_features,
            TrainedClassifier::Mlp(m) => m.weights.w1.rows(),
        }
    }

    /// Per-epoch training loss for the gradient-trained models.
    pub fn loss_trace(&self) -> &[f64] {
        match self {
            TrainedClassifier::LogisticRegression(m) => &m.loss_trace,
            TrainedClassifier::Mlp(m) => &m.loss_trace,
            _ => &[],
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Input(format!("model dump failed: {e}")))
    }
}

pub fn train(spec: &ClassifierSpec, x: &Matrix, y: &[u8], rng: &SeededRng) -> Result<TrainedClassifier> {
    spec.validate()?;
    if x.rows() != y.len() {
        return Err(Error::Input(format!("{} rows but {} labels", x.rows(), y.len())));
    }
    if let Some(bad) = y.iter().find(|&&v| v > 1) {
        return Err(Error::Input(format!("labels must be 0/1, found {bad}")));
    }
    if x.rows() == 0 {
        return Err(Error::Data("cannot train on an empty dataset".into()));
    }
    if !x.all_finite() {
        return Err(Error::Input("training matrix contains non-finite values".into()));
    }
    let both = y.contains(&0) && y.contains(&1);
    if !both && !matches!(spec, ClassifierSpec::Knn(_)) {
        return Err(Error::Data(format!(
            "{} needs both classes in the training labels",
            spec.label()
        )));
    }
    Ok(match spec {
        ClassifierSpec::LogisticRegression(p) => TrainedClassifier::LogisticRegression(logistic::fit(p, x, y)),
        ClassifierSpec::Knn(p) => TrainedClassifier::Knn(knn::fit(p, x, y)),
        ClassifierSpec::RandomForest(p) => TrainedClassifier::RandomForest(forest::fit(p, x, y, rng)),
        ClassifierSpec::Mlp(p) => TrainedClassifier::Mlp(mlp::fit(p, x, y, &mut rng.clone())),
    })
}

/// P(class 1) for each row.
pub fn positive_scores(model: &TrainedClassifier, x: &Matrix) -> Result<Vec<f64>> {
    if x.cols() != model.n_features() {
        return Err(Error::Input(format!(
            "model trained on {} features, got {}",
            model.n_features(),
            x.cols()
        )));
    }
    Ok(match model {
        TrainedClassifier::LogisticRegression(m) => m.scores(x),
        TrainedClassifier::Knn(m) => m.scores(x),
        TrainedClassifier::RandomForest(m) => m.scores(x),
        TrainedClassifier::Mlp(m) => m.scores(x),
    })
}

/// `n x 2` matrix of class probabilities, columns ordered (class 0, class 1).
pub fn predict_proba(model: &TrainedClassifier, x: &Matrix) -> Result<Matrix> {
    let p1 = positive_scores(model, x)?;
    let mut out = Matrix::zeros(p1.len(), 2);
    for (i, p) in p1.iter().enumerate() {
        out.row_mut(i).copy_from_slice(&[1.0 - p, *p]);
    }
    Ok(out)
}

pub fn predict(model: &TrainedClassifier, x: &Matrix) -> Result<Vec<u8>> {
    Ok(positive_scores(model, x)?.iter().map(|&p| label_for(p)).collect())
}

/// Decision rule shared by every model: positive on `p ≥ 0.5`.
pub fn label_for(p_positive: f64) -> u8 {
    u8::from(p_positive >= 0.5)
}
