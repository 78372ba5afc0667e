//! Datasets, labels, score vectors and file ingestion.

use std::fmt;
use std::path::Path;

use ndarray::{Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ground-truth class of a sample. Files encode these as `0`/`1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    Normal,
    Anomalous,
}

impl Label {
    pub fn from_code(code: &str) -> Option<Self> {
        match code.trim() {
            "0" => Some(Label::Normal),
            "1" => Some(Label::Anomalous),
            _ => None,
        }
    }

    pub fn code(self) -> u8 {
        match self {
            Label::Normal => 0,
            Label::Anomalous => 1,
        }
    }

    pub fn is_anomalous(self) -> bool {
        self == Label::Anomalous
    }
}

/// Dense feature matrix with optional labels.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularDataset {
    features: Array2<f64>,
    labels: Option<Vec<Label>>,
    name: String,
}

impl TabularDataset {
    pub fn new(
        name: impl Into<String>,
        features: Array2<f64>,
        labels: Option<Vec<Label>>,
    ) -> Result<Self> {
        let (n, d) = features.dim();
        if n == 0 || d == 0 {
            return Err(Error::Data(format!("empty dataset ({n} x {d})")));
        }
        if let Some((idx, _)) = features.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::Data(format!(
                "non-finite feature at row {}, column {}",
                idx / d,
                idx % d
            )));
        }
        if let Some(l) = &labels {
            if l.len() != n {
                return Err(Error::LengthMismatch {
                    left: n,
                    right: l.len(),
                });
            }
        }
        Ok(Self {
            features,
            labels,
            name: name.into(),
        })
    }

    /// Build from row vectors. All rows must share one length.
    pub fn from_rows(
        name: impl Into<String>,
        rows: &[Vec<f64>],
        labels: Option<Vec<Label>>,
    ) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().position(|r| r.len() != d) {
            return Err(Error::Data(format!(
                "row {bad} has {} values, expected {d}",
                rows[bad].len()
            )));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        let features = Array2::from_shape_vec((rows.len(), d), flat)
            .map_err(|e| Error::Data(e.to_string()))?;
        Self::new(name, features, labels)
    }

    pub fn n_samples(&self) -> usize {
        self.features.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.features.ncols()
    }

    pub fn features(&self) -> ArrayView2<'_, f64> {
        self.features.view()
    }

    pub fn labels(&self) -> Option<&[Label]> {
        self.labels.as_deref()
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Labels, or an error naming the dataset if it has none.
    pub fn require_labels(&self) -> Result<&[Label]> {
        self.labels
            .as_deref()
            .ok_or_else(|| Error::Data(format!("dataset '{}' has no labels", self.name)))
    }

    /// Indices whose label matches `label`. Empty when unlabeled.
    pub fn indices_with(&self, label: Label) -> Vec<usize> {
        match &self.labels {
            Some(ls) => ls
                .iter()
                .enumerate()
                .filter(|(_, l)| **l == label)
                .map(|(i, _)| i)
                .collect(),
            None => Vec::new(),
        }
    }

    /// Rows at `indices`, in that order (repeats allowed).
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::Data(format!("empty selection from '{}'", self.name)));
        }
        let features = self.features.select(Axis(0), indices);
        let labels = self
            .labels
            .as_ref()
            .map(|ls| indices.iter().map(|&i| ls[i]).collect());
        Self::new(self.name.clone(), features, labels)
    }

    /// Stack `other` below `self`. Labels survive only if both sides have them.
    pub fn concat(&self, other: &Self) -> Result<Self> {
        if self.n_features() != other.n_features() {
            return Err(Error::DimensionMismatch {
                expected: self.n_features(),
                got: other.n_features(),
            });
        }
        let features =
            ndarray::concatenate(Axis(0), &[self.features.view(), other.features.view()])
                .map_err(|e| Error::Data(e.to_string()))?;
        let labels = match (&self.labels, &other.labels) {
            (Some(a), Some(b)) => Some(a.iter().chain(b).copied().collect()),
            _ => None,
        };
        Self::new(self.name.clone(), features, labels)
    }

    /// Same rows, labels dropped.
    pub fn unlabeled(&self) -> Self {
        Self {
            features: self.features.clone(),
            labels: None,
            name: self.name.clone(),
        }
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Per-feature affine map fitted elsewhere (see [`FeatureScaler`]).
    pub fn map_features(&self, scaler: &FeatureScaler) -> Result<Self> {
        Self::new(
            self.name.clone(),
            scaler.apply(self.features.view())?,
            self.labels.clone(),
        )
    }
}

/// Per-feature z-score parameters, fitted on one matrix and applied to others.
/// Constant features get unit scale.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureScaler {
    mean: Vec<f64>,
    std: Vec<f64>,
}

impl FeatureScaler {
    pub fn fit(x: ArrayView2<'_, f64>) -> Self {
        let n = x.nrows() as f64;
        let mut mean = Vec::with_capacity(x.ncols());
        let mut std = Vec::with_capacity(x.ncols());
        for col in x.columns() {
            let m = col.sum() / n;
            let v = col.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n;
            mean.push(m);
            std.push(if v > 0.0 { v.sqrt() } else { 1.0 });
        }
        Self { mean, std }
    }

    pub fn apply(&self, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        if x.ncols() != self.mean.len() {
            return Err(Error::DimensionMismatch {
                expected: self.mean.len(),
                got: x.ncols(),
            });
        }
        let mut out = x.to_owned();
        for (j, mut col) in out.columns_mut().into_iter().enumerate() {
            col.mapv_inplace(|v| (v - self.mean[j]) / self.std[j]);
        }
        Ok(out)
    }
}

/// Which direction of a score means "more anomalous".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Orientation {
    AnomalyHigh,
    InlierHigh,
}

impl Orientation {
    pub fn flipped(self) -> Self {
        match self {
            Orientation::AnomalyHigh => Orientation::InlierHigh,
            Orientation::InlierHigh => Orientation::AnomalyHigh,
        }
    }
}

impl fmt::Display for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Orientation::AnomalyHigh => "anomaly-high",
            Orientation::InlierHigh => "inlier-high",
        })
    }
}

impl std::str::FromStr for Orientation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "anomaly-high" => Ok(Orientation::AnomalyHigh),
            "inlier-high" => Ok(Orientation::InlierHigh),
            other => Err(Error::InvalidParameter(format!(
                "unknown orientation '{other}'"
            ))),
        }
    }
}

/// Score normalization applied before fusion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Normalization {
    None,
    #[default]
    Zscore,
    Minmax,
}

impl std::str::FromStr for Normalization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Normalization::None),
            "zscore" => Ok(Normalization::Zscore),
            "minmax" => Ok(Normalization::Minmax),
            other => Err(Error::InvalidParameter(format!(
                "unknown normalization '{other}'"
            ))),
        }
    }
}

/// Per-sample scores tagged with their orientation.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreVector {
    values: Vec<f64>,
    orientation: Orientation,
    source: String,
}

impl ScoreVector {
    pub fn new(
        values: Vec<f64>,
        orientation: Orientation,
        source: impl Into<String>,
    ) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Data(format!("non-finite score at index {i}")));
        }
        Ok(Self {
            values,
            orientation,
            source: source.into(),
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[must_use]
    pub fn with_source(mut self, source: impl Into<String>) -> Self {
        self.source = source.into();
        self
    }

    /// Negate values if needed so that the result has orientation `target`.
    #[must_use]
    pub fn reorient(&self, target: Orientation) -> Self {
        if self.orientation == target {
            return self.clone();
        }
        Self {
            values: self.values.iter().map(|v| -v).collect(),
            orientation: target,
            source: self.source.clone(),
        }
    }

    /// Rescale values per `mode`; orientation is kept.
    pub fn standardize(&self, mode: Normalization) -> Result<Self> {
        let scaler = ScoreScaler::fit(self.values(), mode)?;
        Ok(Self {
            values: scaler.apply(&self.values),
            orientation: self.orientation,
            source: self.source.clone(),
        })
    }
}

/// An affine score map `v -> (v - shift) * scale + offset`, fitted on one
/// batch of scores and reusable on other points (e.g. a plotting grid).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreScaler {
    shift: f64,
    scale: f64,
    offset: f64,
}

impl ScoreScaler {
    pub fn identity() -> Self {
        Self {
            shift: 0.0,
            scale: 1.0,
            offset: 0.0,
        }
    }

    pub fn fit(values: &[f64], mode: Normalization) -> Result<Self> {
        if mode == Normalization::None {
            return Ok(Self::identity());
        }
        let n = values.len();
        if n < 2 {
            return Err(Error::InvalidParameter(format!(
                "{mode:?} normalization needs at least 2 scores, got {n}"
            )));
        }
        match mode {
            Normalization::None => unreachable!(),
            Normalization::Zscore => {
                let mean = values.iter().sum::<f64>() / n as f64;
                let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
                let std = var.sqrt();
                if std > 0.0 && std.is_finite() {
                    Ok(Self {
                        shift: mean,
                        scale: 1.0 / std,
                        offset: 0.0,
                    })
                } else {
                    Ok(Self {
                        shift: mean,
                        scale: 0.0,
                        offset: 0.0,
                    })
                }
            }
            Normalization::Minmax => {
                let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                if hi > lo {
                    Ok(Self {
                        shift: lo,
                        scale: 1.0 / (hi - lo),
                        offset: 0.0,
                    })
                } else {
                    Ok(Self {
                        shift: lo,
                        scale: 0.0,
                        offset: 0.5,
                    })
                }
            }
        }
    }

    pub fn apply_one(&self, v: f64) -> f64 {
        (v - self.shift) * self.scale + self.offset
    }

    pub fn apply(&self, values: &[f64]) -> Vec<f64> {
        values.iter().map(|&v| self.apply_one(v)).collect()
    }
}

/// Load a comma-separated table with a header row.
///
/// Every column except `label_column` must parse as a finite real. The label
/// column, when named, must hold only `0` (normal) or `1` (anomalous).
pub fn load_csv(path: &Path, label_column: Option<&str>) -> Result<TabularDataset> {
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = std::fs::File::open(path).map_err(io_err)?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let headers = reader
        .headers()
        .map_err(|e| Error::Data(format!("{}: bad header: {e}", path.display())))?
        .clone();
    if headers.is_empty() {
        return Err(Error::Data(format!(
            "{}: missing header row",
            path.display()
        )));
    }
    let label_idx =
        match label_column {
            Some(name) => Some(headers.iter().position(|h| h == name).ok_or_else(|| {
                Error::Data(format!("{}: no column named '{name}'", path.display()))
            })?),
            None => None,
        };
    let feature_cols: Vec<usize> = (0..headers.len())
        .filter(|&c| Some(c) != label_idx)
        .collect();
    if feature_cols.is_empty() {
        return Err(Error::Data(format!(
            "{}: no feature columns",
            path.display()
        )));
    }

    let mut flat = Vec::new();
    let mut labels = Vec::new();
    let mut n = 0usize;
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record =
            record.map_err(|e| Error::Data(format!("{}: row {row}: {e}", path.display())))?;
        for &c in &feature_cols {
            let cell = record.get(c).unwrap_or("");
            let v: f64 = cell
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| Error::Parse {
                    path: path.to_path_buf(),
                    row,
                    column: headers[c].to_string(),
                    message: format!("'{cell}' is not a finite number"),
                })?;
            flat.push(v);
        }
        if let Some(c) = label_idx {
            let cell = record.get(c).unwrap_or("");
            labels.push(Label::from_code(cell).ok_or_else(|| Error::Parse {
                path: path.to_path_buf(),
                row,
                column: headers[c].to_string(),
                message: format!("label '{cell}' is not 0 or 1"),
            })?);
        }
        n += 1;
    }
    if n == 0 {
        return Err(Error::Data(format!(
            "{}: table has no data rows",
            path.display()
        )));
    }
    let features = Array2::from_shape_vec((n, feature_cols.len()), flat)
        .map_err(|e| Error::Data(e.to_string()))?;
    let name = path.file_stem().map_or_else(
        || "dataset".to_string(),
        |s| s.to_string_lossy().into_owned(),
    );
    TabularDataset::new(name, features, label_idx.map(|_| labels))
}

/// Read a two-column `index,<value_column>` file into a dense vector ordered
/// by index. Indices must cover `0..n` exactly once.
fn read_indexed_column(path: &Path, value_column: &str) -> Result<Vec<String>> {
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let headers = reader
        .headers()
        .map_err(|e| Error::Data(format!("{}: bad header: {e}", path.display())))?
        .clone();
    if headers.len() != 2 || &headers[0] != "index" || &headers[1] != value_column {
        return Err(Error::Data(format!(
            "{}: expected header 'index,{value_column}', found '{}'",
            path.display(),
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut entries: Vec<(usize, String)> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record =
            record.map_err(|e| Error::Data(format!("{}: row {row}: {e}", path.display())))?;
        let idx: usize = record[0].parse().map_err(|_| Error::Parse {
            path: path.to_path_buf(),
            row,
            column: "index".into(),
            message: format!("'{}' is not a non-negative integer", &record[0]),
        })?;
        entries.push((idx, record[1].to_string()));
    }
    if entries.is_empty() {
        return Err(Error::Data(format!("{}: no rows", path.display())));
    }
    entries.sort_by_key(|(i, _)| *i);
    for (expected, (idx, _)) in entries.iter().enumerate() {
        if *idx != expected {
            return Err(Error::Data(if *idx < expected {
                format!("{}: duplicate index {idx}", path.display())
            } else {
                format!("{}: missing index {expected}", path.display())
            }));
        }
    }
    Ok(entries.into_iter().map(|(_, v)| v).collect())
}

/// Read an `index,score` file.
pub fn read_score_file(path: &Path, orientation: Orientation) -> Result<ScoreVector> {
    let raw = read_indexed_column(path, "score")?;
    let values = raw
        .iter()
        .enumerate()
        .map(|(i, s)| {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Parse {
                    path: path.to_path_buf(),
                    row: i + 1,
                    column: "score".into(),
                    message: format!("'{s}' is not a finite number"),
                })
        })
        .collect::<Result<Vec<_>>>()?;
    let source = path
        .file_stem()
        .map_or_else(String::new, |s| s.to_string_lossy().into_owned());
    ScoreVector::new(values, orientation, source)
}

/// Read an `index,label` file of `0`/`1` codes.
pub fn read_label_file(path: &Path) -> Result<Vec<Label>> {
    let raw = read_indexed_column(path, "label")?;
    raw.iter()
        .enumerate()
        .map(|(i, s)| {
            Label::from_code(s).ok_or_else(|| Error::Parse {
                path: path.to_path_buf(),
                row: i + 1,
                column: "label".into(),
                message: format!("label '{s}' is not 0 or 1"),
            })
        })
        .collect()
}

/// Render `v` with six significant digits, shortest form.
pub fn fmt_sig6(v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    let rounded: f64 = format!("{v:.5e}").parse().unwrap_or(v);
    let out = format!("{rounded}");
    if out == "-0" {
        "0".to_string()
    } else {
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_tmp(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn load_three_rows_with_labels() {
        let f = write_tmp("f1,f2,label\n0,0,0\n1,1,0\n9,9,1\n");
        let ds = load_csv(f.path(), Some("label")).unwrap();
        assert_eq!(ds.n_samples(), 3);
        assert_eq!(ds.n_features(), 2);
        assert_eq!(
            ds.labels().unwrap(),
            &[Label::Normal, Label::Normal, Label::Anomalous]
        );
        assert_eq!(ds.features()[[2, 1]], 9.0);
    }

    #[test]
    fn load_without_label_column() {
        let f = write_tmp("a,b\n1.5,2\n3,4\n");
        let ds = load_csv(f.path(), None).unwrap();
        assert!(ds.labels().is_none());
        assert_eq!(ds.n_features(), 2);
    }

    #[test]
    fn bad_cell_names_row_and_column() {
        let f = write_tmp("f1,f2\n1,2\n3,abc\n");
        let err = load_csv(f.path(), None).unwrap_err();
        match err {
            Error::Parse { row, column, .. } => {
                assert_eq!(row, 2);
                assert_eq!(column, "f2");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn label_outside_binary_is_rejected() {
        let f = write_tmp("f1,label\n1,0\n2,2\n");
        assert!(matches!(
            load_csv(f.path(), Some("label")),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn empty_table_and_missing_file() {
        let f = write_tmp("f1,f2\n");
        assert!(load_csv(f.path(), None).is_err());
        assert!(matches!(
            load_csv(Path::new("/nonexistent/x.csv"), None),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn reorient_negates_and_is_involution() {
        let s = ScoreVector::new(vec![1.0, -2.0], Orientation::AnomalyHigh, "t").unwrap();
        let f = s.reorient(Orientation::InlierHigh);
        assert_eq!(f.values(), &[-1.0, 2.0]);
        assert_eq!(f.orientation(), Orientation::InlierHigh);
        let back = f.reorient(Orientation::AnomalyHigh);
        assert_eq!(back, s);
        // already in target orientation
        assert_eq!(s.reorient(Orientation::AnomalyHigh), s);
        let z = ScoreVector::new(vec![0.0, 0.0], Orientation::InlierHigh, "z").unwrap();
        assert!(z
            .reorient(Orientation::AnomalyHigh)
            .values()
            .iter()
            .all(|v| *v == 0.0));
    }

    #[test]
    fn zscore_uses_population_std() {
        let s = ScoreVector::new(vec![1.0, 2.0, 3.0], Orientation::AnomalyHigh, "t").unwrap();
        let z = s.standardize(Normalization::Zscore).unwrap();
        let expect = 1.0 / (2.0f64 / 3.0).sqrt();
        assert!((z.values()[0] + expect).abs() < 1e-12);
        assert!(z.values()[1].abs() < 1e-12);
        assert!((z.values()[2] - expect).abs() < 1e-12);
        assert!((expect - 1.224_744_871).abs() < 1e-9);
    }

    #[test]
    fn degenerate_standardization() {
        let s = ScoreVector::new(vec![5.0, 5.0, 5.0], Orientation::InlierHigh, "t").unwrap();
        assert_eq!(
            s.standardize(Normalization::Minmax).unwrap().values(),
            &[0.5, 0.5, 0.5]
        );
        assert_eq!(
            s.standardize(Normalization::Zscore).unwrap().values(),
            &[0.0, 0.0, 0.0]
        );
        assert_eq!(s.standardize(Normalization::None).unwrap(), s);
        let one = ScoreVector::new(vec![1.0], Orientation::InlierHigh, "t").unwrap();
        assert!(one.standardize(Normalization::Zscore).is_err());
        assert!(one.standardize(Normalization::None).is_ok());
    }

    #[test]
    fn score_file_gap_is_reported() {
        let f = write_tmp("index,score\n0,1.0\n2,3.0\n");
        let err = read_score_file(f.path(), Orientation::AnomalyHigh).unwrap_err();
        assert!(err.to_string().contains("missing index 1"), "{err}");
        let f = write_tmp("index,score\n1,2.0\n0,1.0\n");
        let s = read_score_file(f.path(), Orientation::AnomalyHigh).unwrap();
        assert_eq!(s.values(), &[1.0, 2.0]);
        let f = write_tmp("idx,score\n0,1\n");
        assert!(read_score_file(f.path(), Orientation::AnomalyHigh).is_err());
    }

    #[test]
    fn sig6_formatting() {
        assert_eq!(fmt_sig6(0.123_456_789), "0.123457");
        assert_eq!(fmt_sig6(1.0), "1");
        assert_eq!(fmt_sig6(1e6), "1000000");
        assert_eq!(fmt_sig6(-0.0), "0");
        assert_eq!(fmt_sig6(123_456_789.0), "123457000");
    }
}

#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    fn argsort(v: &[f64]) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        idx
    }

    fn distinct(values: Vec<f64>) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for v in values {
            if out.iter().all(|o| (o - v).abs() > 1e-6) {
                out.push(v);
            }
        }
        out
    }

    proptest! {
        #[test]
        fn standardization_preserves_ranking(raw in prop::collection::vec(-1e3f64..1e3, 2..60)) {
            let values = distinct(raw);
            prop_assume!(values.len() >= 2);
            let s = ScoreVector::new(values.clone(), Orientation::AnomalyHigh, "p").unwrap();
            for mode in [Normalization::Zscore, Normalization::Minmax, Normalization::None] {
                let t = s.standardize(mode).unwrap();
                prop_assert_eq!(argsort(t.values()), argsort(&values));
            }
            let cubed: Vec<f64> = values.iter().map(|v| v.powi(3) + 2.0 * v).collect();
            prop_assert_eq!(argsort(&cubed), argsort(&values));
        }

        #[test]
        fn reorient_reverses_argsort(raw in prop::collection::vec(-1e3f64..1e3, 2..60)) {
            let values = distinct(raw);
            let s = ScoreVector::new(values.clone(), Orientation::InlierHigh, "p").unwrap();
            let f = s.reorient(Orientation::AnomalyHigh);
            let mut rev = argsort(&values);
            rev.reverse();
            prop_assert_eq!(argsort(f.values()), rev);
            prop_assert_eq!(f.reorient(Orientation::InlierHigh), s);
        }
    }
}
