use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::SeededRng;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fold {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
}

fn class_indices(y: &[u8]) -> [Vec<usize>; 2] {
    let mut out = [Vec::new(), Vec::new()];
    for (i, &label) in y.iter().enumerate() {
        out[usize::from(label == 1)].push(i);
    }
    out
}

/// Splits `total` across the classes proportionally to `sizes`, rounding by
/// largest remainder (ties to the lower class index).
pub(crate) fn allocate(sizes: [usize; 2], total: usize) -> [usize; 2] {
    let n: usize = sizes.iter().sum();
    let frac = total as f64 / n as f64;
    allocate_at(sizes, frac, total)
}

/// Largest-remainder rounding of `sizes[c] · frac` to integers summing to
/// `total`, never exceeding a class size.
pub(crate) fn allocate_at(sizes: [usize; 2], frac: f64, total: usize) -> [usize; 2] {
    let mut out = [0usize; 2];
    let mut rema = [0f64; 2];
    for c in 0..2 {
        let ideal = sizes[c] as f64 * frac;
        out[c] = (ideal.floor() as usize).min(sizes[c]);
        rema[c] = ideal - out[c] as f64;
    }
    let mut left = total - out.iter().sum::<usize>();
    let mut order = [0usize, 1];
    order.sort_by(|&a, &b| rema[b].total_cmp(&rema[a]).then(a.cmp(&b)));
    for &c in order.iter().cycle() {
        if left == 0 {
            break;
        }
        if out[c] < sizes[c] {
            out[c] += 1;
            left -= 1;
        }
    }
    out
}

/// Stratified hold-out split. The test size is `ceil(fraction · n)`, shared
/// between classes by largest remainder; each class is shuffled (class 0
/// first) and its first rows become test rows. Both index lists are sorted.
pub fn stratified_split(y: &[u8], test_fraction: f64, rng: &mut SeededRng) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::Config(format!("test fraction must be in (0, 1), got {test_fraction}")));
    }
    let classes = class_indices(y);
    let sizes = [classes[0].len(), classes[1].len()];
    let n = y.len();
    let n_test = ((test_fraction * n as f64) - 1e-9).ceil() as usize;
    let per_class = allocate_at(sizes, test_fraction, n_test);
    for c in 0..2 {
        if per_class[c] == 0 || per_class[c] >= sizes[c] {
            return Err(Error::Data(format!(
                "class {c} with {} rows cannot be split at fraction {test_fraction}",
                sizes[c]
            )));
        }
    }
    let mut train = Vec::with_capacity(n - n_test);
    let mut test = Vec::with_capacity(n_test);
    for (c, idx) in classes.into_iter().enumerate() {
        let mut idx = idx;
        rng.shuffle(&mut idx);
        test.extend_from_slice(&idx[..per_class[c]]);
        train.extend_from_slice(&idx[per_class[c]..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// Stratified k-fold: each class is shuffled and dealt round-robin onto the
/// folds, class 1 continuing where class 0 stopped so fold sizes differ by
/// at most one.
pub fn stratified_kfold(y: &[u8], k: usize, rng: &mut SeededRng) -> Result<Vec<Fold>> {
    if k < 2 {
        return Err(Error::Config(format!("need at least 2 folds, got {k}")));
    }
    let classes = class_indices(y);
    for (c, idx) in classes.iter().enumerate() {
        if idx.len() < k {
            return Err(Error::Data(format!(
                "class {c} has {} rows, fewer than {k} folds",
                idx.len()
            )));
        }
    }
    let mut assignment = vec![0usize; y.len()];
    let mut pos = 0usize;
    for idx in classes {
        let mut idx = idx;
        rng.shuffle(&mut idx);
        for i in idx {
            assignment[i] = pos % k;
            pos += 1;
        }
    }
    Ok((0..k)
        .map(|f| {
            let (validation, train): (Vec<usize>, Vec<usize>) = (0..y.len()).partition(|&i| assignment[i] == f);
            Fold { train, validation }
        })
        .collect())
}
