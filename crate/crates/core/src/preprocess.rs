//! Imputation, random oversampling, cohort simulation, concatenation and
//! IQR-based outlier replacement.

use serde::{Deserialize, Serialize};

use crate::dataset::{class_counts, Dataset};
use crate::error::{Error, Result};
use crate::numerics::{mean, quantile_sorted, Matrix, SeededRng};

pub const AG_COLUMN: &str = "A/G";
pub const ALB_COLUMN: &str = "ALB";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImputeStrategy {
    /// Fill missing A/G ratios with the mean of the ALB column.
    #[default]
    Faithful,
    /// Fill missing A/G ratios with the median of the observed A/G values.
    ColumnMedian,
}

fn column_index(d: &Dataset, name: &str) -> Result<usize> {
    d.feature_names
        .iter()
        .position(|n| n == name)
        .ok_or_else(|| Error::Data(format!("dataset has no `{name}` column")))
}

pub fn impute_ag(d: &Dataset, strategy: ImputeStrategy) -> Result<Dataset> {
    let ag = column_index(d, AG_COLUMN)?;
    for (r, row) in d.features.row_iter().enumerate() {
        if let Some(c) = row.iter().enumerate().position(|(c, v)| c != ag && v.is_nan()) {
            return Err(Error::Data(format!(
                "row {}: missing value in `{}`; only `{AG_COLUMN}` may be imputed",
                r + 1,
                d.feature_names[c]
            )));
        }
    }
    let ag_values = d.features.col(ag);
    if !ag_values.iter().any(|v| v.is_nan()) {
        return Ok(d.clone());
    }
    let fill = match strategy {
        ImputeStrategy::Faithful => {
            let alb = column_index(d, ALB_COLUMN)?;
            mean(&d.features.col(alb))
        }
        ImputeStrategy::ColumnMedian => {
            let mut observed: Vec<f64> = ag_values.iter().copied().filter(|v| !v.is_nan()).collect();
            if observed.is_empty() {
                return Err(Error::Data(format!("`{AG_COLUMN}` has no observed values")));
            }
            observed.sort_by(f64::total_cmp);
            quantile_sorted(&observed, 0.5)
        }
    };
    if !fill.is_finite() {
        return Err(Error::Data("imputation value is not finite".into()));
    }
    let mut out = d.clone();
    for r in 0..out.n_rows() {
        if out.features[(r, ag)].is_nan() {
            out.features[(r, ag)] = fill;
        }
    }
    Ok(out)
}

/// Appends uniformly drawn copies of minority rows until both classes match
/// the majority count. Original rows keep their order.
pub fn random_oversample(d: &Dataset, rng: &mut SeededRng) -> Result<Dataset> {
    let (zeros, ones) = class_counts(d);
    oversample_to(d, zeros.max(ones), rng)
}

/// Grows each class to `per_class` rows by appending uniformly drawn copies
/// of its own rows (class 0 copies first, then class 1).
pub fn oversample_to(d: &Dataset, per_class: usize, rng: &mut SeededRng) -> Result<Dataset> {
    let (zeros, ones) = class_counts(d);
    if zeros == 0 || ones == 0 {
        return Err(Error::Data(format!(
            "oversampling needs both classes, got {zeros} negatives and {ones} positives"
        )));
    }
    if per_class < zeros.max(ones) {
        return Err(Error::Config(format!(
            "per-class target {per_class} is below the majority count {}",
            zeros.max(ones)
        )));
    }
    let mut idx: Vec<usize> = (0..d.n_rows()).collect();
    for class in [0u8, 1] {
        let members: Vec<usize> = (0..d.n_rows()).filter(|&i| d.labels[i] == class).collect();
        for _ in members.len()..per_class {
            idx.push(members[rng.below(members.len())]);
        }
    }
    Ok(d.select_rows(&idx))
}

/// Parameters of the simulated binary cohort.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SyntheticSpec {
    pub n_samples: usize,
    pub n_informative: usize,
    pub n_redundant: usize,
    pub n_repeated: usize,
    /// Class centers sit at `±class_sep` on every informative axis.
    pub class_sep: f64,
    /// Seed for standalone generation (`simulate`). The pipeline derives its
    /// own stream from the master seed.
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            n_samples: 1000,
            n_informative: 5,
            n_redundant: 2,
            n_repeated: 2,
            class_sep: 1.0,
            seed: 42,
        }
    }
}

impl SyntheticSpec {
    pub fn n_features(&self) -> usize {
        self.n_informative + self.n_redundant + self.n_repeated
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_informative == 0 && (self.n_redundant > 0 || self.n_repeated > 0) {
            return Err(Error::Config(
                "redundant or repeated features need at least one informative feature".into(),
            ));
        }
        if !self.class_sep.is_finite() {
            return Err(Error::Config("class_sep must be finite".into()));
        }
        Ok(())
    }
}

/// Simulated cohort with informative, redundant and repeated blocks.
///
/// Draw order: label permutation, informative noise (row-major), the
/// `n_informative x n_redundant` mixing matrix (row-major, uniform on
/// `[-1, 1]`), then one source column per repeated feature.
pub fn generate_synthetic(spec: &SyntheticSpec, rng: &mut SeededRng) -> Result<Dataset> {
    spec.validate()?;
    let n = spec.n_samples;
    let (ni, nr, np) = (spec.n_informative, spec.n_redundant, spec.n_repeated);
    let m = spec.n_features();

    let mut labels: Vec<u8> = (0..n).map(|i| u8::from(i >= n.div_ceil(2))).collect();
    rng.shuffle(&mut labels);

    let mut x = Matrix::zeros(n, m);
    for (i, &y) in labels.iter().enumerate() {
        let center = if y == 1 { spec.class_sep } else { -spec.class_sep };
        for j in 0..ni {
            x[(i, j)] = center + rng.normal();
        }
    }
    let mixing: Vec<f64> = (0..ni * nr).map(|_| rng.uniform(-1.0, 1.0)).collect();
    for i in 0..n {
        for r in 0..nr {
            x[(i, ni + r)] = (0..ni).map(|j| x[(i, j)] * mixing[j * nr + r]).sum();
        }
    }
    for p in 0..np {
        let src = rng.below(ni + nr);
        for i in 0..n {
            x[(i, ni + nr + p)] = x[(i, src)];
        }
    }
    let names = (0..m).map(|j| format!("f{j}")).collect();
    Dataset::new(x, labels, names)
}

/// Stacks `b` under `a`. Column names come from `a` (positional alignment).
pub fn concatenate(a: &Dataset, b: &Dataset) -> Result<Dataset> {
    if b.n_rows() == 0 {
        return Ok(a.clone());
    }
    if a.n_rows() == 0 {
        return Ok(b.clone());
    }
    if a.n_features() != b.n_features() {
        return Err(Error::Data(format!(
            "cannot concatenate datasets of width {} and {}",
            a.n_features(),
            b.n_features()
        )));
    }
    let features = a.features.vstack(&b.features)?;
    let labels = a.labels.iter().chain(&b.labels).copied().collect();
    Dataset::new(features, labels, a.feature_names.clone())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IqrBounds {
    pub q1: f64,
    pub q2: f64,
    pub q3: f64,
    pub iqr: f64,
    pub lower: f64,
    pub upper: f64,
    pub k: f64,
}

impl IqrBounds {
    pub fn contains(&self, v: f64) -> bool {
        v >= self.lower && v <= self.upper
    }
}

pub fn iqr_bounds(column: &[f64], k: f64) -> Result<IqrBounds> {
    if column.is_empty() {
        return Err(Error::Input("IQR bounds of an empty column".into()));
    }
    if column.iter().any(|v| v.is_nan()) {
        return Err(Error::Data("IQR bounds need a column without missing values".into()));
    }
    if !(k >= 0.0 && k.is_finite()) {
        return Err(Error::Config(format!("IQR multiplier must be non-negative, got {k}")));
    }
    let mut sorted = column.to_vec();
    sorted.sort_by(f64::total_cmp);
    let q1 = quantile_sorted(&sorted, 0.25);
    let q2 = quantile_sorted(&sorted, 0.5);
    let q3 = quantile_sorted(&sorted, 0.75);
    let iqr = q3 - q1;
    Ok(IqrBounds {
        q1,
        q2,
        q3,
        iqr,
        lower: q1 - k * iqr,
        upper: q3 + k * iqr,
        k,
    })
}

pub fn fit_iqr(d: &Dataset, k: f64) -> Result<Vec<IqrBounds>> {
    (0..d.n_features())
        .map(|j| iqr_bounds(&d.features.col(j), k))
        .collect()
}

/// Replaces every cell outside its column bounds with that column's median.
pub fn apply_iqr(d: &Dataset, bounds: &[IqrBounds]) -> Result<(Dataset, Vec<usize>)> {
    if bounds.len() != d.n_features() {
        return Err(Error::Input(format!(
            "{} IQR bounds for {} columns",
            bounds.len(),
            d.n_features()
        )));
    }
    let mut out = d.clone();
    let mut counts = vec![0usize; bounds.len()];
    for r in 0..out.n_rows() {
        for (j, b) in bounds.iter().enumerate() {
            let v = out.features[(r, j)];
            if !b.contains(v) {
                out.features[(r, j)] = b.q2;
                counts[j] += 1;
            }
        }
    }
    Ok((out, counts))
}

/// Column-wise outlier replacement with bounds computed on `d` itself.
pub fn iqr_replace(d: &Dataset, k: f64) -> Result<(Dataset, Vec<usize>)> {
    if d.count_missing() > 0 {
        return Err(Error::Data("outlier replacement needs imputed data".into()));
    }
    let bounds = fit_iqr(d, k)?;
    apply_iqr(d, &bounds)
}
