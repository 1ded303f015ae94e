use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Nondecreasing step function: `levels[k]` applies from `knots[k]` up to
/// the next knot; inputs below the first knot take the first level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsotonicFit {
    pub knots: Vec<f64>,
    pub levels: Vec<f64>,
}

impl IsotonicFit {
    pub fn predict(&self, x: f64) -> f64 {
        let k = self.knots.partition_point(|&t| t <= x);
        self.levels[k.saturating_sub(1)]
    }

    pub fn predict_all(&self, xs: &[f64]) -> Vec<f64> {
        xs.iter().map(|&x| self.predict(x)).collect()
    }
}

/// Least-squares monotone fit by pool-adjacent-violators. Tied inputs are
/// pooled first, so they always share a level.
pub fn isotonic_fit(x: &[f64], y: &[f64]) -> Result<IsotonicFit> {
    if x.is_empty() || x.len() != y.len() {
        return Err(Error::Input("isotonic fit needs equal, non-empty inputs".into()));
    }
    if x.iter().chain(y).any(|v| v.is_nan()) {
        return Err(Error::Input("isotonic fit input contains NaN".into()));
    }
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]).then(a.cmp(&b)));

    // (first knot, weighted sum, weight)
    let mut blocks: Vec<(f64, f64, f64)> = Vec::new();
    let mut knots = Vec::new();
    for &i in &order {
        match blocks.last_mut() {
            Some(last) if knots.last() == Some(&x[i]) => {
                last.1 += y[i];
                last.2 += 1.0;
            }
            _ => {
                knots.push(x[i]);
                blocks.push((x[i], y[i], 1.0));
            }
        }
    }
    // each block now covers one distinct x; pool violators
    let mut stack: Vec<(usize, f64, f64)> = Vec::new(); // (first group index, sum, weight)
    for (g, &(_, s, w)) in blocks.iter().enumerate() {
        let mut cur = (g, s, w);
        while let Some(&(start, ps, pw)) = stack.last() {
            if ps / pw > cur.1 / cur.2 {
                stack.pop();
                cur = (start, ps + cur.1, pw + cur.2);
            } else {
                break;
            }
        }
        stack.push(cur);
    }
    let mut levels = vec![0.0; knots.len()];
    for (k, &(start, s, w)) in stack.iter().enumerate() {
        let end = stack.get(k + 1).map_or(knots.len(), |n| n.0);
        levels[start..end].iter_mut().for_each(|l| *l = s / w);
    }
    Ok(IsotonicFit { knots, levels })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::brier;
    use crate::numerics::SeededRng;

    fn sse(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(p, q)| (p - q).powi(2)).sum()
    }

    #[test]
    fn pooling_by_hand() {
        let f = isotonic_fit(&[1.0, 2.0], &[3.0, 1.0]).unwrap();
        assert_eq!(f.predict_all(&[1.0, 2.0]), vec![2.0, 2.0]);
        let f = isotonic_fit(&[1.0, 2.0, 3.0], &[0.0, 0.5, 1.0]).unwrap();
        assert_eq!(f.levels, vec![0.0, 0.5, 1.0]);
        assert!(isotonic_fit(&[], &[]).is_err());
    }

    #[test]
    fn step_function_lookup() {
        let f = IsotonicFit { knots: vec![0.2, 0.5], levels: vec![0.1, 0.7] };
        assert_eq!(f.predict(0.0), 0.1);
        assert_eq!(f.predict(0.49), 0.1);
        assert_eq!(f.predict(0.5), 0.7);
        assert_eq!(f.predict(9.0), 0.7);
    }

    #[test]
    fn matches_exhaustive_partition_search() {
        // For sorted distinct x the optimal monotone fit is constant on
        // contiguous blocks at the block means; enumerate all 2^(n-1) cuts.
        let mut rng = SeededRng::new(3);
        for _ in 0..50 {
            let n = 8;
            let x: Vec<f64> = (0..n).map(|i| i as f64).collect();
            let y: Vec<f64> = (0..n).map(|_| rng.below(2) as f64).collect();
            let mut best = f64::INFINITY;
            for mask in 0u32..(1 << (n - 1)) {
                let mut fit = vec![0.0; n];
                let mut start = 0;
                let mut ok = true;
                let mut prev = f64::NEG_INFINITY;
                for i in 0..n {
                    if i == n - 1 || mask & (1 << i) != 0 {
                        let mean = y[start..=i].iter().sum::<f64>() / (i + 1 - start) as f64;
                        if mean < prev {
                            ok = false;
                        }
                        prev = mean;
                        fit[start..=i].iter_mut().for_each(|v| *v = mean);
                        start = i + 1;
                    }
                }
                if ok {
                    best = best.min(sse(&fit, &y));
                }
            }
            let ours = isotonic_fit(&x, &y).unwrap().predict_all(&x);
            assert!((sse(&ours, &y) - best).abs() < 1e-12);
        }
    }

    #[test]
    fn monotone_idempotent_and_no_worse_brier() {
        let mut rng = SeededRng::new(5);
        let p: Vec<f64> = (0..300).map(|_| (rng.next_f64() * 20.0).floor() / 20.0).collect();
        let y: Vec<u8> = p.iter().map(|&q| u8::from(rng.next_f64() < q * q)).collect();
        let yf: Vec<f64> = y.iter().map(|&v| v as f64).collect();
        let f = isotonic_fit(&p, &yf).unwrap();
        for w in f.levels.windows(2) {
            assert!(w[0] <= w[1]);
        }
        let fitted = f.predict_all(&p);
        let again = isotonic_fit(&p, &fitted).unwrap().predict_all(&p);
        for (a, b) in again.iter().zip(&fitted) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(brier(&y, &fitted).unwrap() <= brier(&y, &p).unwrap() + 1e-15);
    }
}
