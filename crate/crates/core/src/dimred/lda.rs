//! Fisher linear discriminant analysis.
//!
//! The generalized problem `S_b w = λ S_w w` is reduced to a symmetric one by
//! whitening with `S_w^{-1/2}` (from the Jacobi eigendecomposition of `S_w`),
//! so the returned directions are exact generalized eigenvectors. For two
//! classes the closed form `w ∝ S_w^{-1}(μ_1 − μ_0)` is computed as well and
//! its agreement recorded.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{solve_linear, symmetric_eig, Matrix};

const RIDGE_EPS: f64 = 1e-8;
const SINGULAR_RATIO: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdaModel {
    /// `m x d`, columns are unit-norm discriminant directions.
    pub projection: Matrix,
    pub classes: Vec<u8>,
    pub class_counts: Vec<usize>,
    pub class_means: Vec<Vec<f64>>,
    pub global_mean: Vec<f64>,
    pub within_scatter: Matrix,
    pub between_scatter: Matrix,
    /// Generalized eigenvalues of the kept directions, descending.
    pub eigenvalues: Vec<f64>,
    /// Ridge added to the diagonal of `S_w` (0 when none was needed).
    pub ridge: f64,
    /// |cos| between the first direction and the two-class closed form.
    pub closed_form_agreement: Option<f64>,
}

impl LdaModel {
    pub fn total_scatter(&self) -> Matrix {
        let mut t = self.within_scatter.clone();
        for (a, b) in t.as_mut_slice().iter_mut().zip(self.between_scatter.as_slice()) {
            *a += b;
        }
        t
    }

    pub fn output_dims(&self) -> usize {
        self.projection.cols()
    }
}

pub fn lda_fit(x: &Matrix, y: &[u8], dims: usize) -> Result<LdaModel> {
    let (n, m) = x.shape();
    if y.len() != n {
        return Err(Error::Input(format!("{n} rows but {} labels", y.len())));
    }
    if dims == 0 {
        return Err(Error::Config("LDA needs at least one output dimension".into()));
    }
    let mut classes: Vec<u8> = y.to_vec();
    classes.sort_unstable();
    classes.dedup();
    let k = classes.len();
    if k < 2 {
        return Err(Error::Data("LDA needs at least two classes".into()));
    }
    let dims = dims.min(m).min(k - 1);

    let global_mean = x.column_means();
    let mut class_means = vec![vec![0.0; m]; k];
    let mut class_counts = vec![0usize; k];
    let slot = |label: u8| classes.binary_search(&label).expect("label is a known class");
    for (row, &label) in x.row_iter().zip(y) {
        let c = slot(label);
        class_counts[c] += 1;
        for (s, v) in class_means[c].iter_mut().zip(row) {
            *s += v;
        }
    }
    for (mean, &count) in class_means.iter_mut().zip(&class_counts) {
        mean.iter_mut().for_each(|v| *v /= count as f64);
    }

    let mut sw = Matrix::zeros(m, m);
    let mut diff = vec![0.0; m];
    for (row, &label) in x.row_iter().zip(y) {
        let mu = &class_means[slot(label)];
        for ((d, v), c) in diff.iter_mut().zip(row).zip(mu) {
            *d = v - c;
        }
        add_outer(&mut sw, &diff, 1.0);
    }
    let mut sb = Matrix::zeros(m, m);
    for (mu, &count) in class_means.iter().zip(&class_counts) {
        for ((d, c), g) in diff.iter_mut().zip(mu).zip(&global_mean) {
            *d = c - g;
        }
        add_outer(&mut sb, &diff, count as f64);
    }

    let (whitener, ridge) = match inverse_sqrt(&sw) {
        Some(w) => (w, 0.0),
        None => {
            let trace: f64 = (0..m).map(|i| sw[(i, i)]).sum();
            let ridge = if trace > 0.0 {
                RIDGE_EPS * trace / m as f64
            } else {
                RIDGE_EPS
            };
            let mut regularized = sw.clone();
            for i in 0..m {
                regularized[(i, i)] += ridge;
            }
            let w = inverse_sqrt(&regularized).ok_or_else(|| {
                Error::Numeric("within-class scatter is singular even after ridge".into())
            })?;
            log::warn!("LDA: within-class scatter singular, added ridge {ridge:e}");
            (w, ridge)
        }
    };

    let mut c = whitener.matmul(&sb)?.matmul(&whitener)?;
    for i in 0..m {
        for j in (i + 1)..m {
            let v = 0.5 * (c[(i, j)] + c[(j, i)]);
            c[(i, j)] = v;
            c[(j, i)] = v;
        }
    }
    let eig = symmetric_eig(&c)?;
    let mut projection = Matrix::zeros(m, dims);
    for d in 0..dims {
        let v = Matrix::column_vector(&eig.vectors.col(d));
        let mut w = whitener.matmul(&v)?.into_vec();
        normalize(&mut w);
        orient(&mut w, &class_means[k - 1], &class_means[0]);
        projection.set_col(d, &w);
    }
    let eigenvalues = eig.values[..dims].to_vec();

    let closed_form_agreement = if k == 2 {
        let mut swr = sw.clone();
        for i in 0..m {
            swr[(i, i)] += ridge;
        }
        let delta: Vec<f64> = class_means[1]
            .iter()
            .zip(&class_means[0])
            .map(|(a, b)| a - b)
            .collect();
        match solve_linear(&swr, &Matrix::column_vector(&delta)) {
            Ok(sol) => {
                let mut w = sol.into_vec();
                normalize(&mut w);
                let cos: f64 = w.iter().zip(&projection.col(0)).map(|(a, b)| a * b).sum();
                if cos.abs() < 1.0 - 1e-6 {
                    log::warn!("LDA: eigen and closed-form directions disagree (|cos| = {})", cos.abs());
                }
                Some(cos.abs())
            }
            Err(_) => None,
        }
    } else {
        None
    };

    Ok(LdaModel {
        projection,
        classes,
        class_counts,
        class_means,
        global_mean,
        within_scatter: sw,
        between_scatter: sb,
        eigenvalues,
        ridge,
        closed_form_agreement,
    })
}

/// `(X − μ) · projection`.
pub fn lda_transform(model: &LdaModel, x: &Matrix) -> Result<Matrix> {
    if x.cols() != model.global_mean.len() {
        return Err(Error::Input(format!(
            "LDA fitted on {} features, got {}",
            model.global_mean.len(),
            x.cols()
        )));
    }
    let mut centered = x.clone();
    for i in 0..centered.rows() {
        for (v, mu) in centered.row_mut(i).iter_mut().zip(&model.global_mean) {
            *v -= mu;
        }
    }
    centered.matmul(&model.projection)
}

fn add_outer(acc: &mut Matrix, v: &[f64], scale: f64) {
    let m = v.len();
    for a in 0..m {
        let va = v[a] * scale;
        for b in 0..m {
            acc[(a, b)] += va * v[b];
        }
    }
}

/// `A^{-1/2}` for symmetric positive definite `A`; `None` when `A` is
/// numerically singular.
fn inverse_sqrt(a: &Matrix) -> Option<Matrix> {
    let eig = symmetric_eig(a).ok()?;
    let top = eig.values.first().copied().unwrap_or(0.0);
    let bottom = eig.values.last().copied().unwrap_or(0.0);
    if !(top > 0.0) || bottom <= SINGULAR_RATIO * top {
        return None;
    }
    let m = a.rows();
    let mut out = Matrix::zeros(m, m);
    for (k, &lambda) in eig.values.iter().enumerate() {
        let s = 1.0 / lambda.sqrt();
        let v = eig.vectors.col(k);
        for i in 0..m {
            for j in 0..m {
                out[(i, j)] += s * v[i] * v[j];
            }
        }
    }
    Some(out)
}

fn normalize(w: &mut [f64]) {
    let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        w.iter_mut().for_each(|v| *v /= norm);
    }
}

/// Flips `w` so the last class projects above the first; falls back to a
/// positive largest component when the class means coincide along `w`.
fn orient(w: &mut [f64], hi: &[f64], lo: &[f64]) {
    let along: f64 = w.iter().zip(hi.iter().zip(lo)).map(|(a, (h, l))| a * (h - l)).sum();
    let flip = if along != 0.0 {
        along < 0.0
    } else {
        let pivot = w.iter().copied().fold(0.0f64, |b, x| if x.abs() > b.abs() { x } else { b });
        pivot < 0.0
    };
    if flip {
        w.iter_mut().for_each(|v| *v = -*v);
    }
}
