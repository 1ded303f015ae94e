use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::Matrix;

/// Per-column z-scoring with the population standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalerModel {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
    /// Columns whose training values were all identical; they scale to 0.
    pub constant: Vec<bool>,
}

pub fn standard_scale_fit(x: &Matrix) -> Result<ScalerModel> {
    let (n, m) = x.shape();
    if n == 0 {
        return Err(Error::Input("scaler needs at least one row".into()));
    }
    let means = x.column_means();
    let mut stds = vec![0.0; m];
    let mut constant = vec![false; m];
    for j in 0..m {
        let col = x.col(j);
        let (lo, hi) = col
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        if lo == hi {
            constant[j] = true;
            stds[j] = 1.0;
            continue;
        }
        let var = col.iter().map(|v| (v - means[j]).powi(2)).sum::<f64>() / n as f64;
        stds[j] = var.sqrt();
    }
    Ok(ScalerModel {
        means,
        stds,
        constant,
    })
}

pub fn standard_scale_apply(model: &ScalerModel, x: &Matrix) -> Result<Matrix> {
    if x.cols() != model.means.len() {
        return Err(Error::Input(format!(
            "scaler fitted on {} columns, got {}",
            model.means.len(),
            x.cols()
        )));
    }
    let mut out = x.clone();
    for i in 0..out.rows() {
        for (j, v) in out.row_mut(i).iter_mut().enumerate() {
            *v = if model.constant[j] {
                0.0
            } else {
                (*v - model.means[j]) / model.stds[j]
            };
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::SeededRng;

    #[test]
    fn hand_z_scores() {
        let x = Matrix::from_rows(&[[2.0], [4.0], [6.0]]).unwrap();
        let s = standard_scale_fit(&x).unwrap();
        let z = standard_scale_apply(&s, &x).unwrap();
        let expect = 2.0 / (8.0f64 / 3.0).sqrt();
        assert!((z[(0, 0)] + expect).abs() < 1e-12);
        assert_eq!(z[(1, 0)], 0.0);
        assert!((z[(2, 0)] - expect).abs() < 1e-12);
        assert!((expect - 1.2247).abs() < 1e-4);
    }

    #[test]
    fn constant_column_flagged() {
        let x = Matrix::from_rows(&[[0.1, 1.0], [0.1, 2.0], [0.1, 3.0]]).unwrap();
        let s = standard_scale_fit(&x).unwrap();
        assert_eq!(s.constant, vec![true, false]);
        let z = standard_scale_apply(&s, &x).unwrap();
        assert!(z.col(0).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn moments_after_scaling() {
        let mut rng = SeededRng::new(4);
        let x = Matrix::from_vec(200, 3, (0..600).map(|i| rng.normal() * (i % 3 + 1) as f64 + 7.0).collect())
            .unwrap();
        let s = standard_scale_fit(&x).unwrap();
        let z = standard_scale_apply(&s, &x).unwrap();
        for j in 0..3 {
            let col = z.col(j);
            let mu = col.iter().sum::<f64>() / 200.0;
            let sd = (col.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / 200.0).sqrt();
            assert!(mu.abs() < 1e-9);
            assert!((sd - 1.0).abs() < 1e-9);
        }
        assert!(standard_scale_apply(&s, &Matrix::zeros(1, 2)).is_err());
        assert!(standard_scale_fit(&Matrix::zeros(0, 2)).is_err());
    }
}
