//! ILPD ingestion and the `Dataset` type that flows through the pipeline.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::Matrix;

/// Numeric feature matrix with binary labels (1 = liver disease present).
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: Matrix,
    pub labels: Vec<u8>,
    pub feature_names: Vec<String>,
}

impl Dataset {
    pub fn new(features: Matrix, labels: Vec<u8>, feature_names: Vec<String>) -> Result<Self> {
        if features.rows() != labels.len() {
            return Err(Error::Input(format!(
                "{} feature rows but {} labels",
                features.rows(),
                labels.len()
            )));
        }
        if features.cols() != feature_names.len() && features.rows() > 0 {
            return Err(Error::Input(format!(
                "{} feature columns but {} names",
                features.cols(),
                feature_names.len()
            )));
        }
        if let Some(bad) = labels.iter().find(|&&l| l > 1) {
            return Err(Error::Input(format!("label {bad} is not binary")));
        }
        Ok(Dataset {
            features,
            labels,
            feature_names,
        })
    }

    pub fn empty(feature_names: Vec<String>) -> Self {
        Dataset {
            features: Matrix::zeros(0, feature_names.len()),
            labels: Vec::new(),
            feature_names,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn select_rows(&self, idx: &[usize]) -> Dataset {
        Dataset {
            features: self.features.select_rows(idx),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            feature_names: self.feature_names.clone(),
        }
    }

    pub fn count_missing(&self) -> usize {
        self.features.as_slice().iter().filter(|v| v.is_nan()).count()
    }

    /// Writes features then a trailing `label` column. Missing cells are `NA`;
    /// every other value uses the shortest round-trip decimal form.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        self.write_csv_to(&mut out).map_err(|e| Error::io(path, e))?;
        out.flush().map_err(|e| Error::io(path, e))
    }

    pub fn write_csv_to<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        let mut header: Vec<String> = self.feature_names.iter().map(|n| csv_field(n)).collect();
        header.push("label".into());
        writeln!(out, "{}", header.join(","))?;
        for (row, label) in self.features.row_iter().zip(&self.labels) {
            let mut cells: Vec<String> = row.iter().map(|v| format_cell(*v)).collect();
            cells.push(label.to_string());
            writeln!(out, "{}", cells.join(","))?;
        }
        Ok(())
    }

    /// Reads the format produced by [`Dataset::write_csv`].
    pub fn read_csv(path: &Path) -> Result<Dataset> {
        let mut text = String::new();
        File::open(path)
            .and_then(|mut f| f.read_to_string(&mut text))
            .map_err(|e| Error::io(path, e))?;
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(text.as_bytes());
        let headers = reader
            .headers()
            .map_err(|e| Error::Data(format!("{}: {e}", path.display())))?
            .clone();
        if headers.len() < 2 {
            return Err(Error::Data(format!(
                "{}: expected feature columns plus a label column",
                path.display()
            )));
        }
        let m = headers.len() - 1;
        let names: Vec<String> = headers.iter().take(m).map(str::to_string).collect();
        let mut data = Vec::new();
        let mut labels = Vec::new();
        for (r, rec) in reader.records().enumerate() {
            let rec = rec.map_err(|e| Error::Data(format!("row {}: {e}", r + 1)))?;
            if rec.len() != m + 1 {
                return Err(Error::Data(format!(
                    "row {}: expected {} fields, found {}",
                    r + 1,
                    m + 1,
                    rec.len()
                )));
            }
            for (c, cell) in rec.iter().take(m).enumerate() {
                data.push(parse_cell(cell).ok_or_else(|| {
                    Error::Data(format!("row {}, column {}: non-numeric `{cell}`", r + 1, names[c]))
                })?);
            }
            let label = match rec[m].trim() {
                "0" => 0,
                "1" => 1,
                other => {
                    return Err(Error::Data(format!(
                        "row {}: label `{other}` is not 0 or 1",
                        r + 1
                    )))
                }
            };
            labels.push(label);
        }
        let features = Matrix::from_vec(labels.len(), m, data)?;
        Dataset::new(features, labels, names)
    }
}

/// `(count of label 0, count of label 1)`.
pub fn class_counts(d: &Dataset) -> (usize, usize) {
    let ones = d.labels.iter().filter(|&&l| l == 1).count();
    (d.labels.len() - ones, ones)
}

/// Columns of the raw ILPD file, in the order of the public release.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IlpdColumn {
    Age,
    Gender,
    Tb,
    Db,
    Alkphos,
    Sgpt,
    Sgot,
    Tp,
    Alb,
    AgRatio,
    Target,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnKind {
    Integer,
    Real,
    Categorical,
    Label,
}

impl IlpdColumn {
    pub const ALL: [IlpdColumn; 11] = [
        IlpdColumn::Age,
        IlpdColumn::Gender,
        IlpdColumn::Tb,
        IlpdColumn::Db,
        IlpdColumn::Alkphos,
        IlpdColumn::Sgpt,
        IlpdColumn::Sgot,
        IlpdColumn::Tp,
        IlpdColumn::Alb,
        IlpdColumn::AgRatio,
        IlpdColumn::Target,
    ];

    pub fn name(self) -> &'static str {
        match self {
            IlpdColumn::Age => "Age",
            IlpdColumn::Gender => "Gender",
            IlpdColumn::Tb => "TB",
            IlpdColumn::Db => "DB",
            IlpdColumn::Alkphos => "Alkphos",
            IlpdColumn::Sgpt => "Sgpt",
            IlpdColumn::Sgot => "Sgot",
            IlpdColumn::Tp => "TP",
            IlpdColumn::Alb => "ALB",
            IlpdColumn::AgRatio => "A/G",
            IlpdColumn::Target => "Target",
        }
    }

    pub fn kind(self) -> ColumnKind {
        match self {
            IlpdColumn::Age | IlpdColumn::Alkphos | IlpdColumn::Sgpt | IlpdColumn::Sgot => {
                ColumnKind::Integer
            }
            IlpdColumn::Gender => ColumnKind::Categorical,
            IlpdColumn::Target => ColumnKind::Label,
            _ => ColumnKind::Real,
        }
    }

    /// Header spellings seen across public copies, after normalization
    /// (lowercased, whitespace removed).
    fn aliases(self) -> &'static [&'static str] {
        match self {
            IlpdColumn::Age => &["age"],
            IlpdColumn::Gender => &["gender", "sex"],
            IlpdColumn::Tb => &["tb", "total_bilirubin", "totalbilirubin"],
            IlpdColumn::Db => &["db", "direct_bilirubin", "directbilirubin"],
            IlpdColumn::Alkphos => &[
                "alkphos",
                "alkaline_phosphotase",
                "alkaline_phosphatase",
                "alkalinephosphotase",
            ],
            IlpdColumn::Sgpt => &[
                "sgpt",
                "alamine_aminotransferase",
                "alanine_aminotransferase",
                "alamineaminotransferase",
            ],
            IlpdColumn::Sgot => &["sgot", "aspartate_aminotransferase", "aspartateaminotransferase"],
            IlpdColumn::Tp => &["tp", "total_protiens", "total_proteins", "totalproteins"],
            IlpdColumn::Alb => &["alb", "albumin"],
            IlpdColumn::AgRatio => &[
                "a/g",
                "a/gratio",
                "ag",
                "ag_ratio",
                "albumin_and_globulin_ratio",
                "albuminandglobulinratio",
            ],
            IlpdColumn::Target => &["target", "selector", "dataset", "class", "label"],
        }
    }

    fn from_header(raw: &str) -> Option<IlpdColumn> {
        let key: String = raw
            .chars()
            .filter(|c| !c.is_whitespace())
            .flat_map(char::to_lowercase)
            .collect();
        IlpdColumn::ALL
            .into_iter()
            .find(|c| c.aliases().contains(&key.as_str()))
    }
}

/// What `load_ilpd` saw besides the data itself.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MissingReport {
    pub rows: usize,
    pub had_header: bool,
    /// `(feature name, missing cells)` for every retained feature.
    pub missing_per_column: Vec<(String, usize)>,
    pub absent: usize,
    pub present: usize,
}

impl MissingReport {
    pub fn missing_in(&self, name: &str) -> usize {
        self.missing_per_column
            .iter()
            .find(|(n, _)| n == name)
            .map_or(0, |(_, c)| *c)
    }

    pub fn total_missing(&self) -> usize {
        self.missing_per_column.iter().map(|(_, c)| c).sum()
    }
}

/// Loads an ILPD CSV, drops `Gender` and maps the raw target (1 = disease,
/// 2 = no disease) onto 1 / 0. Missing numeric cells (empty or `NA`) become
/// NaN and are left for imputation.
pub fn load_ilpd(path: &Path) -> Result<(Dataset, MissingReport)> {
    let mut text = String::new();
    File::open(path)
        .and_then(|mut f| f.read_to_string(&mut text))
        .map_err(|e| Error::io(path, e))?;
    parse_ilpd(&text)
}

pub fn parse_ilpd(text: &str) -> Result<(Dataset, MissingReport)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut records = reader.records().peekable();

    let first = match records.peek() {
        Some(Ok(rec)) => rec.clone(),
        Some(Err(e)) => return Err(Error::Data(format!("unreadable CSV: {e}"))),
        None => return Err(Error::Data("empty ILPD file".into())),
    };
    let had_header = first
        .get(0)
        .map(|f| f.trim().parse::<f64>().is_err())
        .unwrap_or(false);

    // position in the file -> column
    let layout: Vec<IlpdColumn> = if had_header {
        let mut cols = Vec::with_capacity(first.len());
        for (i, h) in first.iter().enumerate() {
            let col = IlpdColumn::from_header(h).ok_or_else(|| {
                Error::Data(format!("unknown column `{}` at header position {}", h.trim(), i + 1))
            })?;
            if cols.contains(&col) {
                return Err(Error::Data(format!("duplicate column `{}`", h.trim())));
            }
            cols.push(col);
        }
        if cols.len() != IlpdColumn::ALL.len() {
            let missing: Vec<&str> = IlpdColumn::ALL
                .iter()
                .filter(|c| !cols.contains(c))
                .map(|c| c.name())
                .collect();
            return Err(Error::Data(format!("missing columns: {}", missing.join(", "))));
        }
        records.next();
        cols
    } else {
        IlpdColumn::ALL.to_vec()
    };

    let feature_cols: Vec<IlpdColumn> = IlpdColumn::ALL
        .into_iter()
        .filter(|c| !matches!(c, IlpdColumn::Gender | IlpdColumn::Target))
        .collect();
    let slot_of = |col: IlpdColumn| feature_cols.iter().position(|&c| c == col);

    let m = feature_cols.len();
    let mut data = Vec::new();
    let mut labels = Vec::new();
    let mut missing = vec![0usize; m];
    for (r, rec) in records.enumerate() {
        let row_no = r + 1;
        let rec = rec.map_err(|e| Error::Data(format!("row {row_no}: {e}")))?;
        if rec.len() == 1 && rec[0].trim().is_empty() {
            continue;
        }
        if rec.len() != layout.len() {
            return Err(Error::Data(format!(
                "row {row_no}: expected {} fields, found {}",
                layout.len(),
                rec.len()
            )));
        }
        let mut row = vec![f64::NAN; m];
        let mut label = None;
        for (cell, &col) in rec.iter().zip(&layout) {
            let cell = cell.trim();
            match col.kind() {
                ColumnKind::Categorical => {}
                ColumnKind::Label => {
                    label = Some(match cell {
                        "1" | "1.0" => 1u8,
                        "2" | "2.0" => 0u8,
                        other => {
                            return Err(Error::Data(format!(
                                "row {row_no}, column {}: label `{other}` is not 1 or 2",
                                col.name()
                            )))
                        }
                    });
                }
                ColumnKind::Integer | ColumnKind::Real => {
                    let slot = slot_of(col).expect("numeric column has a slot");
                    if is_missing(cell) {
                        missing[slot] += 1;
                    } else {
                        let v: f64 = cell.parse().ok().filter(|v: &f64| v.is_finite()).ok_or_else(|| {
                            Error::Data(format!(
                                "row {row_no}, column {}: non-numeric value `{cell}`",
                                col.name()
                            ))
                        })?;
                        row[slot] = v;
                    }
                }
            }
        }
        data.extend(row);
        labels.push(label.expect("layout always contains the target"));
    }

    let names: Vec<String> = feature_cols.iter().map(|c| c.name().to_string()).collect();
    let features = Matrix::from_vec(labels.len(), m, data)?;
    let dataset = Dataset::new(features, labels, names.clone())?;
    let (absent, present) = class_counts(&dataset);
    let report = MissingReport {
        rows: dataset.n_rows(),
        had_header,
        missing_per_column: names.into_iter().zip(missing).collect(),
        absent,
        present,
    };
    Ok((dataset, report))
}

fn is_missing(cell: &str) -> bool {
    cell.is_empty() || cell.eq_ignore_ascii_case("na")
}

fn parse_cell(cell: &str) -> Option<f64> {
    let cell = cell.trim();
    if is_missing(cell) {
        return Some(f64::NAN);
    }
    cell.parse().ok()
}

fn format_cell(v: f64) -> String {
    if v.is_nan() {
        "NA".into()
    } else {
        format!("{v}")
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "Age,Gender,TB,DB,Alkphos,Sgpt,Sgot,TP,ALB,A/G Ratio,Selector\n";

    fn row(target: &str, ag: &str) -> String {
        format!("40,Male,0.9,0.2,190,25,30,6.8,3.3,{ag},{target}\n")
    }

    #[test]
    fn parses_header_and_maps_labels() {
        let text = format!("{HEADER}{}{}", row("1", "1.0"), row("2", ""));
        let (d, rep) = parse_ilpd(&text).unwrap();
        assert_eq!(d.n_rows(), 2);
        assert_eq!(d.n_features(), 9);
        assert_eq!(d.labels, vec![1, 0]);
        assert!(rep.had_header);
        assert_eq!(rep.missing_in("A/G"), 1);
        assert!(d.features[(1, 8)].is_nan());
        assert!(!d.feature_names.iter().any(|n| n == "Gender"));
    }

    #[test]
    fn headerless_file_is_positional() {
        let text = format!("{}{}", row("1", "NA"), row("1", "0.9"));
        let (d, rep) = parse_ilpd(&text).unwrap();
        assert!(!rep.had_header);
        assert_eq!(rep.missing_in("A/G"), 1);
        assert_eq!(d.features[(1, 8)], 0.9);
    }

    #[test]
    fn header_order_and_case_insensitive() {
        let text = " target ,age,gender,tb,db,ALKPHOS,sgpt,sgot,tp,alb,a/g\n1,40,Female,1,0.5,100,20,20,6,3,1.1\n";
        let (d, _) = parse_ilpd(text).unwrap();
        assert_eq!(d.features.row(0), &[40.0, 1.0, 0.5, 100.0, 20.0, 20.0, 6.0, 3.0, 1.1]);
        assert_eq!(d.labels, vec![1]);
    }

    #[test]
    fn bad_label_cites_row() {
        let mut text = HEADER.to_string();
        for i in 1..=7 {
            text.push_str(&row(if i == 7 { "3" } else { "1" }, "1.0"));
        }
        let err = parse_ilpd(&text).unwrap_err().to_string();
        assert!(err.contains("row 7"), "{err}");
    }

    #[test]
    fn unknown_column_and_bad_cell() {
        let text = "Age,Gender,TB,DB,Alkphos,Sgpt,Sgot,TP,ALB,A/G,Weight\n";
        assert!(parse_ilpd(text).unwrap_err().to_string().contains("Weight"));
        let text = format!("{HEADER}40,Male,abc,0.2,190,25,30,6.8,3.3,1,1\n");
        let err = parse_ilpd(&text).unwrap_err().to_string();
        assert!(err.contains("row 1") && err.contains("TB"), "{err}");
    }

    #[test]
    fn class_counts_examples() {
        let d = Dataset::new(Matrix::zeros(3, 1), vec![0, 0, 1], vec!["x".into()]).unwrap();
        assert_eq!(class_counts(&d), (2, 1));
        assert_eq!(class_counts(&Dataset::empty(vec!["x".into()])), (0, 0));
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let values = vec![0.1 + 0.2, 1e-300, -3.5, f64::NAN, 123456.789, 1.0 / 3.0];
        let features = Matrix::from_vec(3, 2, values.clone()).unwrap();
        let d = Dataset::new(features, vec![1, 0, 1], vec!["a".into(), "b,c".into()]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        d.write_csv(&path).unwrap();
        let back = Dataset::read_csv(&path).unwrap();
        assert_eq!(back.labels, d.labels);
        assert_eq!(back.feature_names, d.feature_names);
        for (a, b) in back.features.as_slice().iter().zip(&values) {
            assert!(a.to_bits() == b.to_bits() || (a.is_nan() && b.is_nan()));
        }
    }
}
