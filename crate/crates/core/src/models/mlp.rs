use serde::{Deserialize, Serialize};

use super::logistic::{logit_loss, sigmoid};
use crate::error::{Error, Result};
use crate::numerics::{Matrix, SeededRng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MlpParams {
    pub hidden: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    pub batch_size: usize,
    pub epochs: usize,
}

impl Default for MlpParams {
    fn default() -> Self {
        MlpParams {
            hidden: 100,
            learning_rate: 1e-3,
            momentum: 0.9,
            batch_size: 32,
            epochs: 200,
        }
    }
}

impl MlpParams {
    pub fn validate(&self) -> Result<()> {
        if self.hidden == 0
            || self.batch_size == 0
            || self.epochs == 0
            || !(self.learning_rate > 0.0)
            || !(0.0..1.0).contains(&self.momentum)
        {
            return Err(Error::Config(format!("invalid MLP parameters {self:?}")));
        }
        Ok(())
    }
}

/// One ReLU hidden layer feeding a single logistic output unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpWeights {
    /// `m x h`
    pub w1: Matrix,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: f64,
}

impl MlpWeights {
    /// Glorot-uniform weights, zero biases. Draws `w1` row-major, then `w2`.
    pub fn init(m: usize, h: usize, rng: &mut SeededRng) -> MlpWeights {
        let l1 = (6.0 / (m + h) as f64).sqrt();
        let w1 = (0..m * h).map(|_| rng.uniform(-l1, l1)).collect();
        let l2 = (6.0 / (h + 1) as f64).sqrt();
        let w2 = (0..h).map(|_| rng.uniform(-l2, l2)).collect();
        MlpWeights {
            w1: Matrix::from_vec(m, h, w1).expect("m*h weights"),
            b1: vec![0.0; h],
            w2,
            b2: 0.0,
        }
    }

    pub fn zeros_like(&self) -> MlpWeights {
        MlpWeights {
            w1: Matrix::zeros(self.w1.rows(), self.w1.cols()),
            b1: vec![0.0; self.b1.len()],
            w2: vec![0.0; self.w2.len()],
            b2: 0.0,
        }
    }

    /// Parameters as one vector: `w1`, `b1`, `w2`, `b2`.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut v = self.w1.as_slice().to_vec();
        v.extend(&self.b1);
        v.extend(&self.w2);
        v.push(self.b2);
        v
    }

    pub fn from_flat(&self, flat: &[f64]) -> MlpWeights {
        let (m, h) = self.w1.shape();
        let (w1, rest) = flat.split_at(m * h);
        let (b1, rest) = rest.split_at(h);
        let (w2, rest) = rest.split_at(h);
        MlpWeights {
            w1: Matrix::from_vec(m, h, w1.to_vec()).expect("m*h weights"),
            b1: b1.to_vec(),
            w2: w2.to_vec(),
            b2: rest[0],
        }
    }

    fn forward(&self, row: &[f64], hidden: &mut [f64]) -> f64 {
        hidden.copy_from_slice(&self.b1);
        for (xi, wrow) in row.iter().zip(self.w1.row_iter()) {
            for (a, w) in hidden.iter_mut().zip(wrow) {
                *a += xi * w;
            }
        }
        hidden.iter_mut().for_each(|a| *a = a.max(0.0));
        self.b2 + hidden.iter().zip(&self.w2).map(|(a, w)| a * w).sum::<f64>()
    }
}

/// Mean binary cross-entropy over the rows and its gradient.
pub fn loss_and_grad(w: &MlpWeights, x: &Matrix, y: &[u8]) -> (f64, MlpWeights) {
    let mut g = w.zeros_like();
    let mut hidden = vec![0.0; w.b1.len()];
    let mut loss = 0.0;
    let n = x.rows() as f64;
    for (row, &label) in x.row_iter().zip(y) {
        let z = w.forward(row, &mut hidden);
        let t = label as f64;
        loss += logit_loss(z, t);
        let dz = (sigmoid(z) - t) / n;
        g.b2 += dz;
        for k in 0..hidden.len() {
            g.w2[k] += dz * hidden[k];
            if hidden[k] > 0.0 {
                let dh = dz * w.w2[k];
                g.b1[k] += dh;
                for (i, xi) in row.iter().enumerate() {
                    g.w1[(i, k)] += dh * xi;
                }
            }
        }
    }
    (loss / n, g)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub weights: MlpWeights,
    /// Full-training-set loss after each epoch.
    pub loss_trace: Vec<f64>,
}

/// Mini-batch SGD with classical momentum; batches reshuffled every epoch.
pub(super) fn fit(p: &MlpParams, x: &Matrix, y: &[u8], rng: &mut SeededRng) -> MlpModel {
    let n = x.rows();
    let mut w = MlpWeights::init(x.cols(), p.hidden, rng);
    let mut params = w.to_flat();
    let mut velocity = vec![0.0; params.len()];
    let mut loss_trace = Vec::with_capacity(p.epochs);
    for _ in 0..p.epochs {
        let order = rng.permutation(n);
        for batch in order.chunks(p.batch_size) {
            let bx = x.select_rows(batch);
            let by: Vec<u8> = batch.iter().map(|&i| y[i]).collect();
            let (_, g) = loss_and_grad(&w, &bx, &by);
            for ((v, theta), gi) in velocity.iter_mut().zip(params.iter_mut()).zip(g.to_flat()) {
                *v = p.momentum * *v - p.learning_rate * gi;
                *theta += *v;
            }
            w = w.from_flat(&params);
        }
        loss_trace.push(loss_and_grad(&w, x, y).0);
    }
    MlpModel {
        weights: w,
        loss_trace,
    }
}

impl MlpModel {
    pub(super) fn scores(&self, x: &Matrix) -> Vec<f64> {
        let mut hidden = vec![0.0; self.weights.b1.len()];
        x.row_iter().map(|row| sigmoid(self.weights.forward(row, &mut hidden))).collect()
    }
}
