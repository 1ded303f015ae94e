use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::curves::{roc_auc, CurveKind, CurveSeries};
use super::metrics::{basic_metrics, brier, confusion, timed, ConfusionMatrix};
use super::split::allocate;
use crate::error::{Error, Result};
use crate::models::{label_for, positive_scores, train, ClassifierSpec};
use crate::numerics::{Matrix, SeededRng};

/// Substream offset for learning-curve subsampling, kept clear of fold ids.
const SUBSET_STREAM: u64 = 1 << 32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub model: String,
    pub protocol: String,
    pub accuracy: f64,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: f64,
    pub auc: f64,
    pub brier: f64,
    pub runtime_seconds: f64,
}

/// Train/validation matrices for one fold (or one hold-out split).
#[derive(Debug, Clone)]
pub struct FoldData {
    /// Row ids of the validation rows in the evaluated dataset.
    pub validation_index: Vec<usize>,
    pub train_x: Matrix,
    pub train_y: Vec<u8>,
    pub val_x: Matrix,
    pub val_y: Vec<u8>,
}

impl FoldData {
    pub fn from_indices(x: &Matrix, y: &[u8], train: &[usize], validation: &[usize]) -> FoldData {
        FoldData {
            validation_index: validation.to_vec(),
            train_x: x.select_rows(train),
            train_y: train.iter().map(|&i| y[i]).collect(),
            val_x: x.select_rows(validation),
            val_y: validation.iter().map(|&i| y[i]).collect(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Evaluation {
    pub row: MetricRow,
    pub confusion: ConfusionMatrix,
    /// P(positive) for each validation row, in `val_y` order.
    pub scores: Vec<f64>,
    pub labels: Vec<u8>,
}

fn evaluate(model_name: &str, protocol: &str, spec: &ClassifierSpec, data: &FoldData, rng: &SeededRng) -> Result<Evaluation> {
    let (scores, seconds) = timed(|| -> Result<Vec<f64>> {
        let model = train(spec, &data.train_x, &data.train_y, rng)?;
        positive_scores(&model, &data.val_x)
    });
    let scores = scores?;
    let pred: Vec<u8> = scores.iter().map(|&p| label_for(p)).collect();
    let cm = confusion(&data.val_y, &pred)?;
    let m = basic_metrics(&cm);
    Ok(Evaluation {
        row: MetricRow {
            model: model_name.to_string(),
            protocol: protocol.to_string(),
            accuracy: m.accuracy,
            precision: m.precision,
            recall: m.recall,
            f1: m.f1,
            auc: roc_auc(&data.val_y, &scores)?,
            brier: brier(&data.val_y, &scores)?,
            runtime_seconds: seconds,
        },
        confusion: cm,
        scores,
        labels: data.val_y.clone(),
    })
}

/// Single train/test evaluation; the model draws from `rng` directly.
pub fn holdout(spec: &ClassifierSpec, data: &FoldData, rng: &SeededRng) -> Result<Evaluation> {
    evaluate(spec.label(), "split", spec, data, rng)
}

#[derive(Debug, Clone)]
pub struct CvOutcome {
    /// Fold means, runtime summed over folds.
    pub row: MetricRow,
    pub folds: Vec<Evaluation>,
    /// Out-of-fold P(positive) per evaluated row.
    pub oof_scores: Vec<f64>,
    pub oof_labels: Vec<u8>,
}

/// Fold `f` trains with `rng.derive_substream(f)`.
pub fn cross_validate(spec: &ClassifierSpec, folds: &[FoldData], rng: &SeededRng) -> Result<CvOutcome> {
    if folds.is_empty() {
        return Err(Error::Input("cross-validation needs at least one fold".into()));
    }
    let evals: Vec<Evaluation> = folds
        .par_iter()
        .enumerate()
        .map(|(f, data)| evaluate(spec.label(), "cv", spec, data, &rng.derive_substream(f as u64)))
        .collect::<Result<_>>()?;

    let n = folds.iter().map(|f| f.validation_index.len()).sum::<usize>();
    let max_id = folds.iter().flat_map(|f| f.validation_index.iter()).max().copied().unwrap_or(0);
    let mut oof_scores = vec![f64::NAN; (max_id + 1).max(n)];
    let mut oof_labels = vec![0u8; oof_scores.len()];
    for (data, e) in folds.iter().zip(&evals) {
        for ((&i, &s), &l) in data.validation_index.iter().zip(&e.scores).zip(&e.labels) {
            oof_scores[i] = s;
            oof_labels[i] = l;
        }
    }
    if oof_scores.iter().any(|s| s.is_nan()) {
        return Err(Error::Input("validation folds do not cover every row exactly".into()));
    }

    let k = evals.len() as f64;
    let mean = |f: &dyn Fn(&MetricRow) -> f64| evals.iter().map(|e| f(&e.row)).sum::<f64>() / k;
    let mean_opt = |f: &dyn Fn(&MetricRow) -> Option<f64>| {
        let vals: Vec<f64> = evals.iter().filter_map(|e| f(&e.row)).collect();
        (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
    };
    let row = MetricRow {
        model: spec.label().to_string(),
        protocol: "cv".to_string(),
        accuracy: mean(&|r| r.accuracy),
        precision: mean_opt(&|r| r.precision),
        recall: mean_opt(&|r| r.recall),
        f1: mean(&|r| r.f1),
        auc: mean(&|r| r.auc),
        brier: mean(&|r| r.brier),
        runtime_seconds: evals.iter().map(|e| e.row.runtime_seconds).sum(),
    };
    Ok(CvOutcome {
        row,
        folds: evals,
        oof_scores,
        oof_labels,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearningPoint {
    pub fraction: f64,
    /// Mean training-subset size across folds.
    pub train_size: f64,
    pub train_score: f64,
    pub validation_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearningCurve {
    pub model: String,
    pub points: Vec<LearningPoint>,
    pub skipped: Vec<f64>,
}

impl LearningCurve {
    pub fn train_series(&self) -> CurveSeries {
        CurveSeries::new(CurveKind::Learning, self.points.iter().map(|p| (p.train_size, p.train_score)).collect())
            .with_model(&self.model)
    }

    pub fn validation_series(&self) -> CurveSeries {
        CurveSeries::new(
            CurveKind::Learning,
            self.points.iter().map(|p| (p.train_size, p.validation_score)).collect(),
        )
        .with_model(&self.model)
    }
}

/// Accuracy on the training subset and on the validation fold, averaged
/// over folds, for stratified subsets of each training fold. Subsets for
/// one fold are nested prefixes of a fixed per-class shuffle, restored to
/// their original row order, so fraction 1 reproduces [`cross_validate`].
pub fn learning_curve(
    spec: &ClassifierSpec,
    folds: &[FoldData],
    fractions: &[f64],
    rng: &SeededRng,
) -> Result<LearningCurve> {
    if fractions.iter().any(|&f| !(f > 0.0 && f <= 1.0)) {
        return Err(Error::Config(format!("learning-curve fractions must lie in (0, 1]: {fractions:?}")));
    }
    if fractions.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("learning-curve fractions must be strictly ascending".into()));
    }
    let shuffled: Vec<[Vec<usize>; 2]> = folds
        .iter()
        .enumerate()
        .map(|(f, data)| {
            let mut sub = rng.derive_substream(SUBSET_STREAM + f as u64);
            let mut classes = [Vec::new(), Vec::new()];
            for (i, &label) in data.train_y.iter().enumerate() {
                classes[usize::from(label == 1)].push(i);
            }
            classes.iter_mut().for_each(|c| sub.shuffle(c));
            classes
        })
        .collect();

    let mut points = Vec::new();
    let mut skipped = Vec::new();
    for &frac in fractions {
        let subsets: Vec<Vec<usize>> = folds
            .iter()
            .zip(&shuffled)
            .map(|(data, classes)| {
                let n = data.train_y.len();
                let size = ((frac * n as f64).round() as usize).clamp(1, n);
                let take = allocate([classes[0].len(), classes[1].len()], size);
                let mut idx: Vec<usize> = classes[0][..take[0]].iter().chain(&classes[1][..take[1]]).copied().collect();
                idx.sort_unstable();
                idx
            })
            .collect();
        let single_class = folds.iter().zip(&subsets).any(|(data, idx)| {
            let ones = idx.iter().filter(|&&i| data.train_y[i] == 1).count();
            ones == 0 || ones == idx.len()
        });
        if single_class {
            log::warn!("learning curve: fraction {frac} gives a single-class subset; skipped");
            skipped.push(frac);
            continue;
        }
        let scores: Vec<(f64, f64, f64)> = folds
            .par_iter()
            .zip(subsets.par_iter())
            .enumerate()
            .map(|(f, (data, idx))| -> Result<(f64, f64, f64)> {
                let sx = data.train_x.select_rows(idx);
                let sy: Vec<u8> = idx.iter().map(|&i| data.train_y[i]).collect();
                let model = train(spec, &sx, &sy, &rng.derive_substream(f as u64))?;
                let acc = |x: &Matrix, y: &[u8]| -> Result<f64> {
                    let p = positive_scores(&model, x)?;
                    Ok(p.iter().zip(y).filter(|(p, l)| label_for(**p) == **l).count() as f64 / y.len() as f64)
                };
                Ok((idx.len() as f64, acc(&sx, &sy)?, acc(&data.val_x, &data.val_y)?))
            })
            .collect::<Result<_>>()?;
        let k = scores.len() as f64;
        points.push(LearningPoint {
            fraction: frac,
            train_size: scores.iter().map(|s| s.0).sum::<f64>() / k,
            train_score: scores.iter().map(|s| s.1).sum::<f64>() / k,
            validation_score: scores.iter().map(|s| s.2).sum::<f64>() / k,
        });
    }
    Ok(LearningCurve {
        model: spec.label().to_string(),
        points,
        skipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::stratified_kfold;
    use crate::models::ForestParams;

    fn data(n: usize, seed: u64) -> (Matrix, Vec<u8>) {
        let mut rng = SeededRng::new(seed);
        let y: Vec<u8> = (0..n).map(|i| (i % 3 == 0) as u8).collect();
        let x = Matrix::from_vec(n, 2, (0..2 * n).map(|i| rng.normal() + y[i / 2] as f64 * 1.5).collect()).unwrap();
        (x, y)
    }

    fn folds(x: &Matrix, y: &[u8], k: usize) -> Vec<FoldData> {
        stratified_kfold(y, k, &mut SeededRng::new(1))
            .unwrap()
            .iter()
            .map(|f| FoldData::from_indices(x, y, &f.train, &f.validation))
            .collect()
    }

    #[test]
    fn full_fraction_matches_cv() {
        let (x, y) = data(150, 2);
        let fd = folds(&x, &y, 5);
        let rng = SeededRng::new(9);
        for spec in ClassifierSpec::defaults() {
            let cv = cross_validate(&spec, &fd, &rng).unwrap();
            let lc = learning_curve(&spec, &fd, &[0.5, 1.0], &rng).unwrap();
            assert_eq!(lc.points.len(), 2);
            assert_eq!(lc.points[1].validation_score, cv.row.accuracy, "{}", spec.label());
        }
    }

    #[test]
    fn forest_memorizes_training_subset() {
        let (x, y) = data(200, 3);
        let fd = folds(&x, &y, 4);
        let spec = ClassifierSpec::RandomForest(ForestParams { n_trees: 30, ..ForestParams::default() });
        let fractions: Vec<f64> = (1..=10).map(|i| i as f64 / 10.0).collect();
        let lc = learning_curve(&spec, &fd, &fractions, &SeededRng::new(4)).unwrap();
        assert_eq!(lc.points.len(), 10);
        for p in &lc.points {
            assert!(p.train_score >= p.validation_score);
        }
    }

    #[test]
    fn oof_scores_cover_rows() {
        let (x, y) = data(90, 5);
        let fd = folds(&x, &y, 3);
        let cv = cross_validate(&ClassifierSpec::defaults()[1], &fd, &SeededRng::new(0)).unwrap();
        assert_eq!(cv.oof_scores.len(), 90);
        assert_eq!(cv.oof_labels, y);
        assert_eq!(cv.folds.len(), 3);
    }

    #[test]
    fn tiny_fraction_skipped() {
        let (x, y) = data(60, 6);
        let fd = folds(&x, &y, 2);
        let lc = learning_curve(&ClassifierSpec::defaults()[1], &fd, &[0.02, 1.0], &SeededRng::new(0)).unwrap();
        assert_eq!(lc.skipped, vec![0.02]);
        assert_eq!(lc.points.len(), 1);
        assert!(learning_curve(&ClassifierSpec::defaults()[1], &fd, &[1.0, 0.5], &SeededRng::new(0)).is_err());
    }
}
