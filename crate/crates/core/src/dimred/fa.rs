use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{covariance_matrix, solve_linear, symmetric_eig, Matrix};

const SCORE_RIDGE: f64 = 1e-9;

/// Factor model `S = L Lᵀ + Ψ` estimated by principal-component extraction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaModel {
    /// `m x q` loadings.
    pub loadings: Matrix,
    /// Diagonal of Ψ (unique variances), clamped at zero.
    pub uniquenesses: Vec<f64>,
    pub column_means: Vec<f64>,
    /// Sample covariance the model was extracted from.
    pub covariance: Matrix,
    /// All eigenvalues of the covariance, descending.
    pub eigenvalues: Vec<f64>,
}

impl FaModel {
    pub fn n_factors(&self) -> usize {
        self.loadings.cols()
    }

    /// Common variance `Σ_k L_ik²` for each variable.
    pub fn communalities(&self) -> Vec<f64> {
        self.loadings
            .row_iter()
            .map(|r| r.iter().map(|l| l * l).sum())
            .collect()
    }

    /// `diag(S − L Lᵀ − Ψ)`, evaluated in the same order as the fit.
    pub fn residual_diag(&self) -> Vec<f64> {
        self.communalities()
            .iter()
            .enumerate()
            .map(|(i, c)| (self.covariance[(i, i)] - c) - self.uniquenesses[i])
            .collect()
    }
}

pub fn fa_fit(x: &Matrix, q: usize) -> Result<FaModel> {
    let m = x.cols();
    if q == 0 || q > m {
        return Err(Error::Config(format!(
            "factor count must be in 1..={m}, got {q}"
        )));
    }
    let covariance = covariance_matrix(x)?;
    let eig = symmetric_eig(&covariance)?;
    let mut loadings = Matrix::zeros(m, q);
    for k in 0..q {
        let scale = eig.values[k].max(0.0).sqrt();
        let v = eig.vectors.col(k);
        for i in 0..m {
            loadings[(i, k)] = v[i] * scale;
        }
    }
    let mut model = FaModel {
        loadings,
        uniquenesses: vec![0.0; m],
        column_means: x.column_means(),
        covariance,
        eigenvalues: eig.values,
    };
    let communalities = model.communalities();
    for (i, c) in communalities.iter().enumerate() {
        model.uniquenesses[i] = (model.covariance[(i, i)] - c).max(0.0);
    }
    Ok(model)
}

/// Least-squares factor scores: `(X − μ) L (LᵀL + εI)^{-1}`.
pub fn fa_transform(model: &FaModel, x: &Matrix) -> Result<Matrix> {
    if x.cols() != model.column_means.len() {
        return Err(Error::Input(format!(
            "FA fitted on {} features, got {}",
            model.column_means.len(),
            x.cols()
        )));
    }
    let l = &model.loadings;
    let mut gram = l.transpose().matmul(l)?;
    for k in 0..gram.rows() {
        gram[(k, k)] += SCORE_RIDGE;
    }
    // q x m: rows are the score weights for each factor
    let weights = solve_linear(&gram, &l.transpose())?;
    let mut centered = x.clone();
    for i in 0..centered.rows() {
        for (v, mu) in centered.row_mut(i).iter_mut().zip(&model.column_means) {
            *v -= mu;
        }
    }
    centered.matmul(&weights.transpose())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::SeededRng;

    fn random(n: usize, m: usize, seed: u64) -> Matrix {
        let mut rng = SeededRng::new(seed);
        Matrix::from_vec(n, m, (0..n * m).map(|_| rng.normal()).collect()).unwrap()
    }

    #[test]
    fn full_rank_reconstruction() {
        let x = random(50, 4, 1);
        let model = fa_fit(&x, 4).unwrap();
        let llt = model.loadings.matmul(&model.loadings.transpose()).unwrap();
        for (a, b) in llt.as_slice().iter().zip(model.covariance.as_slice()) {
            assert!((a - b).abs() < 1e-8);
        }
        assert!(model.uniquenesses.iter().all(|&u| u < 1e-8));
    }

    #[test]
    fn residual_diagonal_is_exactly_zero() {
        let x = random(80, 6, 2);
        let model = fa_fit(&x, 3).unwrap();
        assert!(model.residual_diag().iter().all(|&r| r == 0.0));
        assert!(model.uniquenesses.iter().all(|&u| u >= 0.0));
    }

    #[test]
    fn rank_one_loadings_ratio() {
        let mut rng = SeededRng::new(3);
        let rows: Vec<[f64; 2]> = (0..30).map(|_| {
            let t = rng.normal();
            [t, 2.0 * t]
        }).collect();
        let model = fa_fit(&Matrix::from_rows(&rows).unwrap(), 1).unwrap();
        let l = model.loadings.col(0);
        assert!((l[1] / l[0] - 2.0).abs() < 1e-10);
        assert!(model.uniquenesses.iter().all(|&u| u.abs() < 1e-10));
    }

    #[test]
    fn scores_of_mean_row_are_zero() {
        let x = random(40, 5, 4);
        let model = fa_fit(&x, 3).unwrap();
        let means = Matrix::from_rows(&[model.column_means.clone()]).unwrap();
        let s = fa_transform(&model, &means).unwrap();
        assert_eq!(s.cols(), 3);
        assert!(s.as_slice().iter().all(|v| v.abs() < 1e-12));
        assert!(fa_transform(&model, &Matrix::zeros(1, 4)).is_err());
    }

    #[test]
    fn rank_q_data_reconstructs_exactly() {
        let mut rng = SeededRng::new(5);
        let factors = random(60, 2, 6);
        let mix = Matrix::from_vec(2, 5, (0..10).map(|_| rng.uniform(-1.0, 1.0)).collect()).unwrap();
        let mut x = factors.matmul(&mix).unwrap();
        for i in 0..x.rows() {
            for v in x.row_mut(i) {
                *v += 3.0;
            }
        }
        let model = fa_fit(&x, 2).unwrap();
        let scores = fa_transform(&model, &x).unwrap();
        let rec = scores.matmul(&model.loadings.transpose()).unwrap();
        for i in 0..x.rows() {
            for j in 0..5 {
                assert!((rec[(i, j)] + model.column_means[j] - x[(i, j)]).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn factor_count_validated() {
        assert!(fa_fit(&random(10, 3, 7), 4).is_err());
        assert!(fa_fit(&random(10, 3, 7), 0).is_err());
    }
}
