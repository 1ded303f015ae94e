use std::fmt::Write;

use crate::error::{Error, Result};
use crate::eval::{CurveKind, CurveSeries};

const WIDTH: f64 = 480.0;
const HEIGHT: f64 = 360.0;
const LEFT: f64 = 56.0;
const RIGHT: f64 = 16.0;
const TOP: f64 = 32.0;
const BOTTOM: f64 = 44.0;

fn axis_labels(kind: CurveKind) -> (&'static str, &'static str) {
    match kind {
        CurveKind::Roc => ("false positive rate", "true positive rate"),
        CurveKind::Pr => ("recall", "precision"),
        CurveKind::Calibration => ("mean predicted probability", "observed frequency"),
        CurveKind::Learning => ("training rows", "accuracy"),
    }
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if hi - lo < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Standalone SVG line plot of one curve. ROC, PR and calibration axes are
/// fixed to [0, 1] and points are clamped into that box; learning curves use
/// the data range.
pub fn render_svg(series: &CurveSeries) -> Result<String> {
    if series.points.is_empty() {
        return Err(Error::Input(format!("cannot plot an empty {} series", series.kind.as_str())));
    }
    if series.points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(Error::Input("cannot plot non-finite points".into()));
    }
    let unit = series.kind != CurveKind::Learning;
    let (x_range, y_range) = if unit {
        ((0.0, 1.0), (0.0, 1.0))
    } else {
        (
            range(series.points.iter().map(|p| p.0)),
            range(series.points.iter().map(|p| p.1)),
        )
    };
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let px = |x: f64| {
        let t = ((x - x_range.0) / (x_range.1 - x_range.0)).clamp(0.0, 1.0);
        LEFT + t * plot_w
    };
    let py = |y: f64| {
        let t = ((y - y_range.0) / (y_range.1 - y_range.0)).clamp(0.0, 1.0);
        TOP + (1.0 - t) * plot_h
    };

    let (xlabel, ylabel) = axis_labels(series.kind);
    let title = if series.model.is_empty() {
        series.kind.as_str().to_string()
    } else {
        format!("{} {}", series.kind.as_str(), series.model)
    };

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="20" text-anchor="middle" font-size="13">{}</text>"#, WIDTH / 2.0, escape(&title));
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );
    for i in 0..=4 {
        let t = i as f64 / 4.0;
        let xv = x_range.0 + t * (x_range.1 - x_range.0);
        let yv = y_range.0 + t * (y_range.1 - y_range.0);
        let (x, y) = (px(xv), py(yv));
        let _ = writeln!(
            s,
            r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            TOP + plot_h,
            TOP + plot_h + 4.0,
            TOP + plot_h + 16.0,
            tick(xv)
        );
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            LEFT - 4.0,
            LEFT - 6.0,
            y + 4.0,
            tick(yv)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{xlabel}</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 8.0
    );
    let _ = writeln!(
        s,
        r#"<text x="14" y="{:.2}" text-anchor="middle" transform="rotate(-90 14 {:.2})">{ylabel}</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0
    );
    if series.kind == CurveKind::Roc || series.kind == CurveKind::Calibration {
        let _ = writeln!(
            s,
            r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#999" stroke-dasharray="4 3"/>"##,
            px(0.0),
            py(0.0),
            px(1.0),
            py(1.0)
        );
    }
    let points: Vec<String> = series
        .points
        .iter()
        .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
        .collect();
    let _ = writeln!(
        s,
        r##"<polyline points="{}" fill="none" stroke="#1f5fa8" stroke-width="2"/>"##,
        points.join(" ")
    );
    s.push_str("</svg>\n");
    Ok(s)
}

fn tick(v: f64) -> String {
    if v.abs() >= 100.0 {
        format!("{v:.0}")
    } else {
        format!("{v:.2}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn polyline(svg: &str) -> &str {
        let start = svg.find("<polyline points=\"").unwrap() + "<polyline points=\"".len();
        let end = svg[start..].find('"').unwrap();
        &svg[start..start + end]
    }

    #[test]
    fn diagonal_spans_plot_box() {
        let svg = render_svg(&CurveSeries::new(CurveKind::Roc, vec![(0.0, 0.0), (1.0, 1.0)])).unwrap();
        let origin = format!("{:.2},{:.2}", LEFT, HEIGHT - BOTTOM);
        let corner = format!("{:.2},{:.2}", WIDTH - RIGHT, TOP);
        assert_eq!(polyline(&svg), format!("{origin} {corner}"));
    }

    #[test]
    fn unit_axes_clamp() {
        let a = render_svg(&CurveSeries::new(CurveKind::Pr, vec![(-0.5, 2.0), (1.5, -1.0)])).unwrap();
        let b = render_svg(&CurveSeries::new(CurveKind::Pr, vec![(0.0, 1.0), (1.0, 0.0)])).unwrap();
        assert_eq!(polyline(&a), polyline(&b));
    }

    #[test]
    fn deterministic_and_rejects_empty() {
        let s = CurveSeries::new(CurveKind::Learning, vec![(100.0, 0.7), (200.0, 0.8)]).with_model("RF");
        assert_eq!(render_svg(&s).unwrap(), render_svg(&s.clone()).unwrap());
        assert!(render_svg(&CurveSeries::new(CurveKind::Roc, vec![])).is_err());
    }

    #[test]
    fn single_point_learning_curve() {
        let svg = render_svg(&CurveSeries::new(CurveKind::Learning, vec![(10.0, 0.5)])).unwrap();
        assert!(svg.ends_with("</svg>\n"));
    }
}
