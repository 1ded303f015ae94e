use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::Matrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LogisticParams {
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2: f64,
}

impl Default for LogisticParams {
    fn default() -> Self {
        LogisticParams {
            learning_rate: 0.1,
            epochs: 1000,
            l2: 0.0,
        }
    }
}

impl LogisticParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) || self.epochs == 0 || !(self.l2 >= 0.0) {
            return Err(Error::Config(format!("invalid logistic regression parameters {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    /// Mean log-loss at the start of each epoch.
    pub loss_trace: Vec<f64>,
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Log-loss of a logit, stable for large |z|.
pub(crate) fn logit_loss(z: f64, y: f64) -> f64 {
    z.max(0.0) - z * y + (-z.abs()).exp().ln_1p()
}

/// Full-batch gradient descent from zero weights.
pub(super) fn fit(p: &LogisticParams, x: &Matrix, y: &[u8]) -> LogisticModel {
    let (n, m) = x.shape();
    let mut w = vec![0.0; m];
    let mut b = 0.0;
    let mut loss_trace = Vec::with_capacity(p.epochs);
    let mut gw = vec![0.0; m];
    for _ in 0..p.epochs {
        gw.iter_mut().for_each(|g| *g = 0.0);
        let mut gb = 0.0;
        let mut loss = 0.0;
        for (row, &label) in x.row_iter().zip(y) {
            let z = b + row.iter().zip(&w).map(|(a, c)| a * c).sum::<f64>();
            let t = label as f64;
            loss += logit_loss(z, t);
            let r = sigmoid(z) - t;
            gb += r;
            for (g, v) in gw.iter_mut().zip(row) {
                *g += r * v;
            }
        }
        let reg: f64 = 0.5 * p.l2 * w.iter().map(|v| v * v).sum::<f64>();
        loss_trace.push(loss / n as f64 + reg);
        for (wj, g) in w.iter_mut().zip(&gw) {
            *wj -= p.learning_rate * (g / n as f64 + p.l2 * *wj);
        }
        b -= p.learning_rate * gb / n as f64;
    }
    LogisticModel {
        weights: w,
        bias: b,
        loss_trace,
    }
}

impl LogisticModel {
    pub(super) fn scores(&self, x: &Matrix) -> Vec<f64> {
        x.row_iter()
            .map(|row| sigmoid(self.bias + row.iter().zip(&self.weights).map(|(a, c)| a * c).sum::<f64>()))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{train, ClassifierSpec, TrainedClassifier};
    use crate::numerics::SeededRng;

    #[test]
    fn separable_line_fits_perfectly() {
        let x = Matrix::from_rows(&[[-3.0], [-2.0], [-1.0], [1.0], [2.0], [3.0]]).unwrap();
        let y = [0, 0, 0, 1, 1, 1];
        let m = fit(&LogisticParams::default(), &x, &y);
        let pred: Vec<u8> = m.scores(&x).iter().map(|&p| u8::from(p >= 0.5)).collect();
        assert_eq!(pred, y);
    }

    #[test]
    fn zero_weights_give_half() {
        let m = LogisticModel {
            weights: vec![0.0, 0.0],
            bias: 0.0,
            loss_trace: vec![],
        };
        let x = Matrix::from_rows(&[[5.0, -1.0], [0.0, 100.0]]).unwrap();
        assert_eq!(m.scores(&x), vec![0.5, 0.5]);
    }

    #[test]
    fn loss_non_increasing_after_warmup() {
        let mut rng = SeededRng::new(11);
        let x = Matrix::from_vec(300, 3, (0..900).map(|_| rng.normal()).collect()).unwrap();
        let y: Vec<u8> = x.row_iter().map(|r| u8::from(r[0] + 0.5 * r[1] + 0.3 * rng.normal() > 0.0)).collect();
        let spec = ClassifierSpec::LogisticRegression(LogisticParams::default());
        let TrainedClassifier::LogisticRegression(m) = train(&spec, &x, &y, &rng).unwrap() else {
            unreachable!()
        };
        assert_eq!(m.loss_trace.len(), 1000);
        for w in m.loss_trace[10..].windows(2) {
            assert!(w[1] <= w[0] + 1e-15);
        }
    }

    #[test]
    fn stable_loss_and_sigmoid() {
        assert!((sigmoid(0.0) - 0.5).abs() < 1e-15);
        assert!(sigmoid(-800.0) >= 0.0 && sigmoid(800.0) <= 1.0);
        assert!((logit_loss(0.0, 1.0) - std::f64::consts::LN_2).abs() < 1e-15);
        assert!(logit_loss(-800.0, 1.0).is_finite());
    }
}
