use std::fs;
use std::io::Write;
use std::path::Path;

use super::report::RunReport;
use super::run::{file_stem, Artifact, RunOutput};
use super::svg::render_svg;
use crate::error::{Error, Result};
use crate::eval::MetricRow;

/// Writes `bytes` to `dir/rel` through a temporary file in the same
/// directory, so readers never observe a half-written file.
pub fn write_atomic(dir: &Path, rel: &str, bytes: &[u8]) -> Result<()> {
    let path = dir.join(rel);
    let parent = path.parent().unwrap_or(dir);
    fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(parent).map_err(|e| Error::io(parent, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(&path, e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(&path, e))?;
    tmp.persist(&path).map_err(|e| Error::io(&path, e.error))?;
    Ok(())
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let err = |e: csv::Error| Error::Input(format!("CSV encoding failed: {e}"));
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(err)?;
    for row in rows {
        w.write_record(&row).map_err(err)?;
    }
    w.into_inner()
        .map_err(|e| Error::Input(format!("CSV encoding failed: {e}")))
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |v| v.to_string())
}

/// One row per model per protocol. Undefined precision/recall are written
/// as `NA`. Runtimes live in `runtime.csv` so this file stays reproducible.
pub fn metrics_csv(rows: &[MetricRow]) -> Result<Vec<u8>> {
    csv_bytes(
        &["model", "protocol", "accuracy", "precision", "recall", "f1", "auc", "brier"],
        rows.iter().map(|r| {
            vec![
                r.model.clone(),
                r.protocol.clone(),
                r.accuracy.to_string(),
                opt(r.precision),
                opt(r.recall),
                r.f1.to_string(),
                r.auc.to_string(),
                r.brier.to_string(),
            ]
        }),
    )
}

/// Writes every report file under `dir` and returns the report with its
/// manifest filled in. `summary.json` is written last.
pub fn emit_reports(output: &RunOutput, dir: &Path) -> Result<RunReport> {
    let mut report = output.report.clone();
    let mut files: Vec<(String, Vec<u8>)> = Vec::new();

    files.push(("metrics.csv".into(), metrics_csv(&report.metrics)?));
    files.push((
        "runtime.csv".into(),
        csv_bytes(
            &["model", "protocol", "seconds"],
            report
                .metrics
                .iter()
                .map(|r| vec![r.model.clone(), r.protocol.clone(), r.runtime_seconds.to_string()]),
        )?,
    ));

    let mut models: Vec<&str> = Vec::new();
    for c in &report.confusion {
        if !models.contains(&c.model.as_str()) {
            models.push(&c.model);
        }
    }
    for model in models {
        let rows = report.confusion.iter().filter(|c| c.model == model).map(|c| {
            let m = &c.matrix;
            vec![c.protocol.clone(), m.tp.to_string(), m.fp.to_string(), m.tn.to_string(), m.fn_.to_string()]
        });
        files.push((
            format!("confusion_{}.csv", file_stem(model)),
            csv_bytes(&["protocol", "tp", "fp", "tn", "fn"], rows)?,
        ));
    }

    let plots = report.config.output.plots;
    for (rel, artifact) in &output.artifacts {
        match artifact {
            Artifact::Curve(series) => {
                let mut buf = Vec::new();
                series.write_csv(&mut buf)?;
                files.push((rel.clone(), buf));
                let top_level = !rel.contains('/') && !rel.starts_with("isotonic_");
                if plots && top_level {
                    let svg = render_svg(series)?;
                    files.push((format!("plots/{}", rel.replace(".csv", ".svg")), svg.into_bytes()));
                }
            }
            Artifact::Table { header, rows } => {
                let header: Vec<&str> = header.iter().map(String::as_str).collect();
                files.push((
                    rel.clone(),
                    csv_bytes(&header, rows.row_iter().map(|r| r.iter().map(f64::to_string).collect()))?,
                ));
            }
            Artifact::Json(text) => files.push((rel.clone(), text.clone().into_bytes())),
        }
    }

    report.manifest = files.iter().map(|(rel, _)| rel.clone()).collect();
    report.manifest.push("summary.json".into());
    let summary = serde_json::to_string_pretty(&report)
        .map_err(|e| Error::Input(format!("cannot serialize report: {e}")))?;

    for (rel, bytes) in &files {
        write_atomic(dir, rel, bytes)?;
    }
    write_atomic(dir, "summary.json", summary.as_bytes())?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(precision: Option<f64>) -> MetricRow {
        MetricRow {
            model: "LR".into(),
            protocol: "cv".into(),
            accuracy: 0.5,
            precision,
            recall: Some(0.25),
            f1: 0.0,
            auc: 0.5,
            brier: 0.25,
            runtime_seconds: 1.5,
        }
    }

    #[test]
    fn undefined_precision_is_marked() {
        let text = String::from_utf8(metrics_csv(&[row(None)]).unwrap()).unwrap();
        assert_eq!(
            text,
            "model,protocol,accuracy,precision,recall,f1,auc,brier\nLR,cv,0.5,NA,0.25,0,0.5,0.25\n"
        );
    }

    #[test]
    fn atomic_write_creates_parents_and_replaces() {
        let dir = tempfile::tempdir().unwrap();
        write_atomic(dir.path(), "a/b.txt", b"one").unwrap();
        write_atomic(dir.path(), "a/b.txt", b"two").unwrap();
        assert_eq!(fs::read(dir.path().join("a/b.txt")).unwrap(), b"two");
        assert_eq!(fs::read_dir(dir.path().join("a")).unwrap().count(), 1);
    }
}
