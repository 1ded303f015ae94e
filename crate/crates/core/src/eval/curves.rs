use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    Roc,
    Pr,
    Calibration,
    Learning,
}

impl CurveKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            CurveKind::Roc => "roc",
            CurveKind::Pr => "pr",
            CurveKind::Calibration => "calibration",
            CurveKind::Learning => "learning",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveSeries {
    pub kind: CurveKind,
    pub model: String,
    pub points: Vec<(f64, f64)>,
}

impl CurveSeries {
    pub fn new(kind: CurveKind, points: Vec<(f64, f64)>) -> Self {
        CurveSeries {
            kind,
            model: String::new(),
            points,
        }
    }

    pub fn with_model(mut self, model: &str) -> Self {
        self.model = model.to_string();
        self
    }

    /// Writes `x,y` rows with shortest round-trip float formatting.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let err = |e: csv::Error| Error::Input(format!("curve CSV write failed: {e}"));
        w.write_record(["x", "y"]).map_err(err)?;
        for (x, y) in &self.points {
            w.write_record([x.to_string(), y.to_string()]).map_err(err)?;
        }
        w.flush().map_err(|e| Error::Input(format!("curve CSV write failed: {e}")))
    }

    pub fn read_csv<R: Read>(kind: CurveKind, model: &str, input: R) -> Result<CurveSeries> {
        let mut r = csv::Reader::from_reader(input);
        let mut points = Vec::new();
        for (line, rec) in r.records().enumerate() {
            let rec = rec.map_err(|e| Error::Data(format!("curve CSV: {e}")))?;
            let parse = |i: usize| -> Result<f64> {
                rec.get(i)
                    .and_then(|s| s.trim().parse().ok())
                    .ok_or_else(|| Error::Data(format!("curve CSV row {}: bad value", line + 2)))
            };
            points.push((parse(0)?, parse(1)?));
        }
        Ok(CurveSeries {
            kind,
            model: model.to_string(),
            points,
        })
    }
}

fn check_scores(y: &[u8], scores: &[f64]) -> Result<(usize, usize)> {
    if y.len() != scores.len() {
        return Err(Error::Input(format!("{} labels but {} scores", y.len(), scores.len())));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::Input("scores contain NaN".into()));
    }
    let pos = y.iter().filter(|&&v| v == 1).count();
    Ok((pos, y.len() - pos))
}

/// Indices ordered by descending score (ties by index) and the boundaries of
/// each tied group.
fn descending_groups(scores: &[f64]) -> (Vec<usize>, Vec<usize>) {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    let mut ends = Vec::new();
    for k in 0..order.len() {
        if k + 1 == order.len() || scores[order[k + 1]] != scores[order[k]] {
            ends.push(k + 1);
        }
    }
    (order, ends)
}

/// (FPR, TPR) at every distinct threshold, starting at (0, 0).
pub fn roc_curve(y: &[u8], scores: &[f64]) -> Result<CurveSeries> {
    let (pos, neg) = check_scores(y, scores)?;
    if pos == 0 || neg == 0 {
        return Err(Error::Input("ROC needs both classes".into()));
    }
    let (order, ends) = descending_groups(scores);
    let mut points = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut start = 0;
    for end in ends {
        for &i in &order[start..end] {
            if y[i] == 1 {
                tp += 1;
            } else {
                fp += 1;
            }
        }
        start = end;
        points.push((fp as f64 / neg as f64, tp as f64 / pos as f64));
    }
    Ok(CurveSeries::new(CurveKind::Roc, points))
}

/// Trapezoidal area under a curve whose x is nondecreasing.
pub fn auc(series: &CurveSeries) -> f64 {
    series
        .points
        .windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[1].1 + w[0].1) * 0.5)
        .sum()
}

pub fn roc_auc(y: &[u8], scores: &[f64]) -> Result<f64> {
    Ok(auc(&roc_curve(y, scores)?))
}

/// (recall, precision) at every distinct threshold, recall ascending.
pub fn pr_curve(y: &[u8], scores: &[f64]) -> Result<CurveSeries> {
    let (pos, _) = check_scores(y, scores)?;
    if pos == 0 {
        return Err(Error::Input("precision-recall needs positive labels".into()));
    }
    let (order, ends) = descending_groups(scores);
    let mut points = Vec::with_capacity(ends.len());
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut start = 0;
    for end in ends {
        for &i in &order[start..end] {
            if y[i] == 1 {
                tp += 1;
            } else {
                fp += 1;
            }
        }
        start = end;
        points.push((tp as f64 / pos as f64, tp as f64 / (tp + fp) as f64));
    }
    Ok(CurveSeries::new(CurveKind::Pr, points))
}

/// Equal-width reliability bins on [0, 1]; `p = 1` lands in the last bin.
/// Points are (mean predicted p, positive fraction); empty bins are skipped.
pub fn calibration_bins(y: &[u8], p: &[f64], bins: usize) -> Result<CurveSeries> {
    if bins < 2 {
        return Err(Error::Config(format!("need at least 2 calibration bins, got {bins}")));
    }
    check_scores(y, p)?;
    let mut sum_p = vec![0.0; bins];
    let mut sum_y = vec![0.0; bins];
    let mut count = vec![0usize; bins];
    for (&label, &prob) in y.iter().zip(p) {
        let b = ((prob.clamp(0.0, 1.0) * bins as f64).floor() as usize).min(bins - 1);
        sum_p[b] += prob;
        sum_y[b] += label as f64;
        count[b] += 1;
    }
    let points = (0..bins)
        .filter(|&b| count[b] > 0)
        .map(|b| (sum_p[b] / count[b] as f64, sum_y[b] / count[b] as f64))
        .collect();
    Ok(CurveSeries::new(CurveKind::Calibration, points))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::SeededRng;
    use proptest::prelude::*;

    /// P(score_pos > score_neg) + ½ P(tie), by enumerating all pairs.
    fn rank_statistic(y: &[u8], s: &[f64]) -> f64 {
        let mut total = 0.0;
        let mut pairs = 0usize;
        for i in 0..y.len() {
            for j in 0..y.len() {
                if y[i] == 1 && y[j] == 0 {
                    pairs += 1;
                    total += if s[i] > s[j] { 1.0 } else if s[i] == s[j] { 0.5 } else { 0.0 };
                }
            }
        }
        total / pairs as f64
    }

    #[test]
    fn auc_examples() {
        assert_eq!(roc_auc(&[0, 0, 1, 1], &[0.1, 0.2, 0.8, 0.9]).unwrap(), 1.0);
        assert_eq!(roc_auc(&[1, 1, 0, 0], &[0.1, 0.2, 0.8, 0.9]).unwrap(), 0.0);
        let y = [1, 0, 1, 0];
        let s = [0.9, 0.8, 0.7, 0.1];
        assert!((roc_auc(&y, &s).unwrap() - 0.75).abs() < 1e-15);
        assert_eq!(rank_statistic(&y, &s), 0.75);
        assert!(roc_auc(&[1, 1], &[0.2, 0.3]).is_err());
    }

    #[test]
    fn roc_is_monotone_staircase() {
        let mut rng = SeededRng::new(1);
        let y: Vec<u8> = (0..50).map(|i| (i % 2) as u8).collect();
        let s: Vec<f64> = (0..50).map(|_| (rng.next_f64() * 5.0).floor()).collect();
        let roc = roc_curve(&y, &s).unwrap();
        assert_eq!(roc.points[0], (0.0, 0.0));
        assert_eq!(*roc.points.last().unwrap(), (1.0, 1.0));
        for w in roc.points.windows(2) {
            assert!(w[1].0 >= w[0].0 && w[1].1 >= w[0].1);
        }
    }

    #[test]
    fn pr_examples() {
        let pr = pr_curve(&[0, 1, 0, 1], &[0.1, 0.9, 0.2, 0.8]).unwrap();
        assert!(pr.points.iter().all(|p| p.1 == 1.0 || p.0 == 1.0));
        assert_eq!(pr.points[..2], [(0.5, 1.0), (1.0, 1.0)]);
        let flat = pr_curve(&[0, 1, 0, 0], &[0.3; 4]).unwrap();
        assert_eq!(flat.points, vec![(1.0, 0.25)]);
        assert!(pr_curve(&[0, 0], &[0.1, 0.2]).is_err());
    }

    #[test]
    fn pr_matches_threshold_enumeration() {
        let y = [1, 0, 1, 0];
        let s = [0.9, 0.8, 0.7, 0.1];
        let pr = pr_curve(&y, &s).unwrap();
        let mut thresholds = s.to_vec();
        thresholds.sort_by(|a, b| b.total_cmp(a));
        let brute: Vec<(f64, f64)> = thresholds
            .iter()
            .map(|&t| {
                let tp = (0..4).filter(|&i| s[i] >= t && y[i] == 1).count() as f64;
                let pp = (0..4).filter(|&i| s[i] >= t).count() as f64;
                (tp / 2.0, tp / pp)
            })
            .collect();
        assert_eq!(pr.points, brute);
    }

    #[test]
    fn calibration_edges() {
        let c = calibration_bins(&[1, 0, 1], &[1.0, 0.95, 0.91], 10).unwrap();
        assert_eq!(c.points.len(), 1);
        assert!((c.points[0].1 - 2.0 / 3.0).abs() < 1e-15);
        assert!(calibration_bins(&[1], &[0.5], 1).is_err());
    }

    #[test]
    fn calibrated_monte_carlo() {
        let mut rng = SeededRng::new(7);
        let n = 100_000;
        let p: Vec<f64> = (0..n).map(|_| rng.next_f64()).collect();
        let y: Vec<u8> = p.iter().map(|&q| u8::from(rng.next_f64() < q)).collect();
        let c = calibration_bins(&y, &p, 10).unwrap();
        assert_eq!(c.points.len(), 10);
        for (x, f) in c.points {
            assert!((x - f).abs() < 0.02, "{x} {f}");
        }
    }

    #[test]
    fn csv_round_trip() {
        let s = CurveSeries::new(CurveKind::Roc, vec![(0.0, 0.1), (1.0 / 3.0, 2.0f64.sqrt())]).with_model("RF");
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("x,y\n"));
        assert_eq!(CurveSeries::read_csv(CurveKind::Roc, "RF", &buf[..]).unwrap(), s);
    }

    proptest! {
        #[test]
        fn trapezoid_equals_rank_statistic(
            data in proptest::collection::vec((0u8..2, 0u32..20), 2..200)
        ) {
            let y: Vec<u8> = data.iter().map(|d| d.0).collect();
            let s: Vec<f64> = data.iter().map(|d| d.1 as f64 / 7.0).collect();
            prop_assume!(y.contains(&0) && y.contains(&1));
            let a = roc_auc(&y, &s).unwrap();
            prop_assert!((a - rank_statistic(&y, &s)).abs() < 1e-9);
        }
    }
}
