use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{sq_dist, Matrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KnnParams {
    pub k: usize,
}

impl Default for KnnParams {
    fn default() -> Self {
        KnnParams { k: 5 }
    }
}

impl KnnParams {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Config("knn k must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub k: usize,
    pub train_x: Matrix,
    pub train_y: Vec<u8>,
}

pub(super) fn fit(p: &KnnParams, x: &Matrix, y: &[u8]) -> KnnModel {
    KnnModel {
        k: p.k,
        train_x: x.clone(),
        train_y: y.to_vec(),
    }
}

impl KnnModel {
    /// Positive vote fraction among the `k` nearest training rows (Euclidean,
    /// ties by training index). `k` is capped at the training size.
    pub(super) fn scores(&self, x: &Matrix) -> Vec<f64> {
        let k = self.k.min(self.train_y.len());
        let mut cand: Vec<(f64, usize)> = Vec::with_capacity(self.train_y.len());
        x.row_iter()
            .map(|q| {
                cand.clear();
                cand.extend(self.train_x.row_iter().enumerate().map(|(j, r)| (sq_dist(q, r), j)));
                let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
                if k < cand.len() {
                    cand.select_nth_unstable_by(k - 1, cmp);
                }
                let votes = cand[..k].iter().filter(|c| self.train_y[c.1] == 1).count();
                votes as f64 / k as f64
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::SeededRng;

    #[test]
    fn one_nn_reproduces_training_labels() {
        let mut rng = SeededRng::new(5);
        let x = Matrix::from_vec(60, 2, (0..120).map(|_| rng.normal()).collect()).unwrap();
        let y: Vec<u8> = (0..60).map(|_| rng.below(2) as u8).collect();
        let m = fit(&KnnParams { k: 1 }, &x, &y);
        let s = m.scores(&x);
        for (p, l) in s.iter().zip(&y) {
            assert_eq!(*p, *l as f64);
        }
    }

    #[test]
    fn vote_fraction_with_index_ties() {
        let x = Matrix::from_rows(&[[-1.0], [1.0], [2.0], [3.0]]).unwrap();
        let m = fit(&KnnParams { k: 2 }, &x, &[1, 0, 0, 0]);
        // query at 0: rows 0 and 1 tie at distance 1
        assert_eq!(m.scores(&Matrix::from_rows(&[[0.0]]).unwrap()), vec![0.5]);
        let m = fit(&KnnParams { k: 10 }, &x, &[1, 0, 0, 0]);
        assert_eq!(m.scores(&Matrix::from_rows(&[[0.0]]).unwrap()), vec![0.25]);
    }
}
