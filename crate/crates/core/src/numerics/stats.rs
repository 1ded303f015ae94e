use crate::error::{Error, Result};
use crate::numerics::Matrix;

/// Linear-interpolation quantile on the sorted sample: rank `h = (n-1)p`,
/// interpolating between the order statistics around `h`.
pub fn quantile(xs: &[f64], p: f64) -> Result<f64> {
    if xs.is_empty() {
        return Err(Error::Input("quantile of empty sequence".into()));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Input(format!("quantile level {p} outside [0, 1]")));
    }
    if xs.iter().any(|x| x.is_nan()) {
        return Err(Error::Input("quantile input contains NaN".into()));
    }
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(quantile_sorted(&sorted, p))
}

/// `quantile` on an already sorted, NaN-free, non-empty slice.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    if lo == hi {
        return sorted[lo];
    }
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample covariance (denominator `n - 1`) of the columns of `x`.
pub fn covariance_matrix(x: &Matrix) -> Result<Matrix> {
    let (n, m) = x.shape();
    if n < 2 {
        return Err(Error::Input(format!(
            "covariance needs at least 2 rows, got {n}"
        )));
    }
    let means = x.column_means();
    let mut cov = Matrix::zeros(m, m);
    let mut centered = vec![0.0; m];
    for row in x.row_iter() {
        for ((c, v), mu) in centered.iter_mut().zip(row).zip(&means) {
            *c = v - mu;
        }
        for a in 0..m {
            let ca = centered[a];
            for b in a..m {
                cov[(a, b)] += ca * centered[b];
            }
        }
    }
    let denom = (n - 1) as f64;
    for a in 0..m {
        for b in a..m {
            let v = cov[(a, b)] / denom;
            cov[(a, b)] = v;
            cov[(b, a)] = v;
        }
    }
    Ok(cov)
}

#[inline]
pub fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Full `n x n` matrix of squared Euclidean distances between rows.
pub fn pairwise_sq_dists(x: &Matrix) -> Result<Matrix> {
    if !x.all_finite() {
        return Err(Error::Input("pairwise distances need finite entries".into()));
    }
    let n = x.rows();
    let mut d = Matrix::zeros(n, n);
    for i in 0..n {
        let ri = x.row(i);
        for j in (i + 1)..n {
            let v = sq_dist(ri, x.row(j));
            d[(i, j)] = v;
            d[(j, i)] = v;
        }
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::SeededRng;
    use proptest::prelude::*;

    #[test]
    fn quantile_examples() {
        assert_eq!(quantile(&[5.0], 0.3).unwrap(), 5.0);
        assert_eq!(quantile(&[1.0, 2.0, 3.0, 4.0], 0.25).unwrap(), 1.75);
        assert_eq!(quantile(&[1.0, 2.0, 3.0, 4.0, 100.0], 0.5).unwrap(), 3.0);
    }

    #[test]
    fn quantile_errors() {
        assert!(quantile(&[], 0.5).is_err());
        assert!(quantile(&[1.0, f64::NAN], 0.5).is_err());
        assert!(quantile(&[1.0], 1.5).is_err());
    }

    #[test]
    fn covariance_examples() {
        let x = Matrix::from_rows(&[[0.0, 0.0], [2.0, 2.0]]).unwrap();
        let c = covariance_matrix(&x).unwrap();
        assert_eq!(c, Matrix::from_rows(&[[2.0, 2.0], [2.0, 2.0]]).unwrap());

        let x = Matrix::from_rows(&[[1.0, 7.0], [2.0, 7.0], [4.0, 7.0]]).unwrap();
        let c = covariance_matrix(&x).unwrap();
        assert_eq!(c[(1, 1)], 0.0);
        assert_eq!(c[(0, 1)], 0.0);
        assert_eq!(c[(1, 0)], 0.0);

        assert!(covariance_matrix(&Matrix::zeros(1, 3)).is_err());
    }

    #[test]
    fn pairwise_examples() {
        let x = Matrix::from_rows(&[[0.0, 0.0], [3.0, 4.0]]).unwrap();
        let d = pairwise_sq_dists(&x).unwrap();
        assert_eq!(d[(0, 1)], 25.0);
        assert_eq!(d[(1, 0)], 25.0);
        assert_eq!(d[(0, 0)], 0.0);

        let same = Matrix::from_rows(&[[1.0, 2.0], [1.0, 2.0], [1.0, 2.0]]).unwrap();
        assert!(pairwise_sq_dists(&same)
            .unwrap()
            .as_slice()
            .iter()
            .all(|&v| v == 0.0));

        let mut rng = SeededRng::new(9);
        let pts = Matrix::from_vec(3, 4, (0..12).map(|_| rng.normal()).collect()).unwrap();
        let d = pairwise_sq_dists(&pts).unwrap();
        let (ab, bc, ac) = (d[(0, 1)].sqrt(), d[(1, 2)].sqrt(), d[(0, 2)].sqrt());
        assert!(ac <= ab + bc + 1e-12);
        assert!(ab <= ac + bc + 1e-12);
        assert!(bc <= ab + ac + 1e-12);
    }

    proptest! {
        #[test]
        fn quantile_endpoints_and_monotone(xs in prop::collection::vec(-1e6f64..1e6, 1..40),
                                           p in 0.0f64..1.0, q in 0.0f64..1.0) {
            let min = xs.iter().cloned().fold(f64::INFINITY, f64::min);
            let max = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            prop_assert_eq!(quantile(&xs, 0.0).unwrap(), min);
            prop_assert_eq!(quantile(&xs, 1.0).unwrap(), max);
            let (lo, hi) = if p <= q { (p, q) } else { (q, p) };
            prop_assert!(quantile(&xs, lo).unwrap() <= quantile(&xs, hi).unwrap());
        }

        #[test]
        fn pairwise_matches_brute_force(seed in 0u64..1000, n in 1usize..8, m in 1usize..5) {
            let mut rng = SeededRng::new(seed);
            let x = Matrix::from_vec(n, m, (0..n * m).map(|_| rng.uniform(-5.0, 5.0)).collect()).unwrap();
            let d = pairwise_sq_dists(&x).unwrap();
            for i in 0..n {
                for j in 0..n {
                    let mut brute = 0.0;
                    for k in 0..m {
                        brute += (x[(i, k)] - x[(j, k)]).powi(2);
                    }
                    prop_assert!((d[(i, j)] - brute).abs() <= 1e-12 * (1.0 + brute));
                    prop_assert!(d[(i, j)] >= 0.0);
                    prop_assert_eq!(d[(i, j)], d[(j, i)]);
                }
            }
        }

        #[test]
        fn covariance_symmetric(seed in 0u64..1000) {
            let mut rng = SeededRng::new(seed);
            let x = Matrix::from_vec(6, 3, (0..18).map(|_| rng.normal()).collect()).unwrap();
            let c = covariance_matrix(&x).unwrap();
            for a in 0..3 {
                for b in 0..3 {
                    prop_assert_eq!(c[(a, b)], c[(b, a)]);
                }
            }
        }
    }
}
