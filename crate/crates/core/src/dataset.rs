//! Tabular data model shared by every stage.
//!
//! Values are stored column-major. Missingness lives in a separate boolean
//! mask; masked cells hold `0.0` and are never read by any statistic.

use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetKind {
    Regression,
    Classification,
}

impl std::str::FromStr for DatasetKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "regression" => Ok(DatasetKind::Regression),
            "classification" => Ok(DatasetKind::Classification),
            other => Err(Error::Config(format!("unknown dataset kind {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    columns: Vec<Vec<f64>>,
    missing: Vec<Vec<bool>>,
    target: Vec<f64>,
    kind: DatasetKind,
    feature_names: Vec<String>,
    target_name: String,
}

/// Observed cells of a single feature, in row order.
#[derive(Clone, Debug, PartialEq)]
pub struct ColumnView {
    pub feature_index: usize,
    pub present_values: Vec<f64>,
    pub row_indices: Vec<usize>,
}

impl Dataset {
    pub fn new(
        columns: Vec<Vec<f64>>,
        missing: Vec<Vec<bool>>,
        target: Vec<f64>,
        kind: DatasetKind,
        feature_names: Vec<String>,
    ) -> Result<Self> {
        let mut ds = Dataset {
            columns,
            missing,
            target,
            kind,
            feature_names,
            target_name: "target".to_string(),
        };
        ds.validate()?;
        ds.normalize_masked();
        Ok(ds)
    }

    /// Dataset with no missing cells.
    pub fn complete(
        columns: Vec<Vec<f64>>,
        target: Vec<f64>,
        kind: DatasetKind,
        feature_names: Vec<String>,
    ) -> Result<Self> {
        let missing = columns.iter().map(|c| vec![false; c.len()]).collect();
        Self::new(columns, missing, target, kind, feature_names)
    }

    /// Default feature names `feature_0`, `feature_1`, ...
    pub fn default_names(n_features: usize) -> Vec<String> {
        (0..n_features).map(|f| format!("feature_{f}")).collect()
    }

    pub fn with_target_name(mut self, name: impl Into<String>) -> Result<Self> {
        let name = name.into();
        if name.is_empty() {
            return Err(Error::InvalidDataset("target name is empty".into()));
        }
        if self.feature_names.contains(&name) {
            return Err(Error::InvalidDataset(format!(
                "target name {name:?} duplicates a feature name"
            )));
        }
        self.target_name = name;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        let n_features = self.columns.len();
        if n_features == 0 {
            return Err(Error::InvalidDataset("dataset has no features".into()));
        }
        if self.missing.len() != n_features || self.feature_names.len() != n_features {
            return Err(Error::InvalidDataset(format!(
                "{} columns, {} mask columns, {} feature names",
                n_features,
                self.missing.len(),
                self.feature_names.len()
            )));
        }
        let n_rows = self.target.len();
        for (f, (col, mask)) in self.columns.iter().zip(&self.missing).enumerate() {
            if col.len() != n_rows || mask.len() != n_rows {
                return Err(Error::InvalidDataset(format!(
                    "feature {f} has {} values and {} mask cells, expected {n_rows}",
                    col.len(),
                    mask.len()
                )));
            }
            if let Some(r) = (0..n_rows).find(|&r| !mask[r] && !col[r].is_finite()) {
                return Err(Error::InvalidDataset(format!(
                    "non-finite value at row {r}, feature {f}"
                )));
            }
        }
        let mut seen = HashSet::new();
        for name in &self.feature_names {
            if name.is_empty() {
                return Err(Error::InvalidDataset("empty feature name".into()));
            }
            if !seen.insert(name.as_str()) {
                return Err(Error::InvalidDataset(format!(
                    "duplicate feature name {name:?}"
                )));
            }
        }
        for (r, &t) in self.target.iter().enumerate() {
            if !t.is_finite() {
                return Err(Error::InvalidDataset(format!("non-finite target at row {r}")));
            }
            if self.kind == DatasetKind::Classification && (t < 0.0 || t.fract() != 0.0) {
                return Err(Error::InvalidDataset(format!(
                    "classification target {t} at row {r} is not a class index"
                )));
            }
        }
        Ok(())
    }

    fn normalize_masked(&mut self) {
        for (col, mask) in self.columns.iter_mut().zip(&self.missing) {
            for (v, &m) in col.iter_mut().zip(mask) {
                if m {
                    *v = 0.0;
                }
            }
        }
    }

    pub fn n_rows(&self) -> usize {
        self.target.len()
    }

    pub fn n_features(&self) -> usize {
        self.columns.len()
    }

    pub fn kind(&self) -> DatasetKind {
        self.kind
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn target_name(&self) -> &str {
        &self.target_name
    }

    pub fn target(&self) -> &[f64] {
        &self.target
    }

    /// The observed value at `(row, feature)`, `None` when masked.
    pub fn value(&self, row: usize, feature: usize) -> Option<f64> {
        if self.missing[feature][row] {
            None
        } else {
            Some(self.columns[feature][row])
        }
    }

    pub fn is_missing(&self, row: usize, feature: usize) -> bool {
        self.missing[feature][row]
    }

    /// Raw column storage. Masked cells read as `0.0`; pair with [`Dataset::mask`].
    pub fn raw_column(&self, feature: usize) -> &[f64] {
        &self.columns[feature]
    }

    pub fn mask(&self, feature: usize) -> &[bool] {
        &self.missing[feature]
    }

    pub fn missing_count(&self) -> usize {
        self.missing
            .iter()
            .map(|m| m.iter().filter(|&&b| b).count())
            .sum()
    }

    pub fn has_missing(&self) -> bool {
        self.missing.iter().any(|m| m.iter().any(|&b| b))
    }

    pub fn column_view(&self, feature_index: usize) -> Result<ColumnView> {
        if feature_index >= self.n_features() {
            return Err(Error::FeatureOutOfRange {
                index: feature_index,
                n_features: self.n_features(),
            });
        }
        let (present_values, row_indices) = self.columns[feature_index]
            .iter()
            .zip(&self.missing[feature_index])
            .enumerate()
            .filter(|(_, (_, &m))| !m)
            .map(|(r, (&v, _))| (v, r))
            .unzip();
        Ok(ColumnView {
            feature_index,
            present_values,
            row_indices,
        })
    }

    /// Row `r` as (values, missing mask).
    pub fn row(&self, r: usize) -> (Vec<f64>, Vec<bool>) {
        (
            self.columns.iter().map(|c| c[r]).collect(),
            self.missing.iter().map(|m| m[r]).collect(),
        )
    }

    /// Row-major copy of values and mask, used by neighbour searches.
    pub(crate) fn row_major(&self) -> (Vec<f64>, Vec<bool>) {
        let (n, p) = (self.n_rows(), self.n_features());
        let mut values = vec![0.0; n * p];
        let mut mask = vec![false; n * p];
        for f in 0..p {
            for r in 0..n {
                values[r * p + f] = self.columns[f][r];
                mask[r * p + f] = self.missing[f][r];
            }
        }
        (values, mask)
    }

    /// Row counts per class index, for classification datasets.
    pub fn class_counts(&self) -> BTreeMap<usize, usize> {
        let mut counts = BTreeMap::new();
        for &t in &self.target {
            *counts.entry(t as usize).or_insert(0) += 1;
        }
        counts
    }

    pub(crate) fn set_value(&mut self, row: usize, feature: usize, value: f64) {
        self.columns[feature][row] = value;
        self.missing[feature][row] = false;
    }

    pub(crate) fn set_missing(&mut self, row: usize, feature: usize) {
        self.columns[feature][row] = 0.0;
        self.missing[feature][row] = true;
    }

    pub(crate) fn push_row(&mut self, values: &[f64], target: f64) {
        for (f, &v) in values.iter().enumerate() {
            self.columns[f].push(v);
            self.missing[f].push(false);
        }
        self.target.push(target);
    }

    pub(crate) fn permute_rows(&mut self, order: &[usize]) {
        for col in &mut self.columns {
            *col = order.iter().map(|&r| col[r]).collect();
        }
        for mask in &mut self.missing {
            *mask = order.iter().map(|&r| mask[r]).collect();
        }
        self.target = order.iter().map(|&r| self.target[r]).collect();
    }
}

fn csv_error(err: csv::Error) -> Error {
    let line = err.position().map(|p| p.line()).unwrap_or(0);
    match err.into_kind() {
        csv::ErrorKind::Io(e) => Error::Io(e),
        csv::ErrorKind::UnequalLengths {
            expected_len, len, ..
        } => Error::Parse {
            line,
            column: len as usize + 1,
            message: format!("expected {expected_len} fields, found {len}"),
        },
        csv::ErrorKind::Utf8 { err, .. } => Error::Parse {
            line,
            column: err.field() + 1,
            message: "invalid UTF-8".into(),
        },
        other => Error::Parse {
            line,
            column: 0,
            message: format!("{other:?}"),
        },
    }
}

pub fn load_csv(path: impl AsRef<Path>, kind: DatasetKind) -> Result<Dataset> {
    let file = File::open(path)?;
    read_csv(BufReader::new(file), kind)
}

/// Parses a CSV whose header row names every column and whose last column is the target.
/// Empty fields become missing cells; the target may not be empty.
pub fn read_csv<R: Read>(reader: R, kind: DatasetKind) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(reader);
    let header: Vec<String> = rdr
        .headers()
        .map_err(csv_error)?
        .iter()
        .map(str::to_string)
        .collect();
    if header.len() < 2 {
        return Err(Error::Parse {
            line: 1,
            column: header.len(),
            message: "need at least one feature column and a target column".into(),
        });
    }
    let n_features = header.len() - 1;
    let mut columns = vec![Vec::new(); n_features];
    let mut missing = vec![Vec::new(); n_features];
    let mut target = Vec::new();

    let mut record = csv::StringRecord::new();
    loop {
        match rdr.read_record(&mut record) {
            Ok(true) => {}
            Ok(false) => break,
            Err(e) => return Err(csv_error(e)),
        }
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        for (c, field) in record.iter().enumerate() {
            let parsed = if field.is_empty() {
                None
            } else {
                match field.parse::<f64>() {
                    Ok(v) if v.is_finite() => Some(v),
                    _ => {
                        return Err(Error::NonNumeric {
                            line,
                            column: c + 1,
                            value: field.to_string(),
                        })
                    }
                }
            };
            if c == n_features {
                match parsed {
                    Some(v) => target.push(v),
                    None => return Err(Error::MissingTarget { line }),
                }
            } else {
                columns[c].push(parsed.unwrap_or(0.0));
                missing[c].push(parsed.is_none());
            }
        }
    }
    let target_name = header[n_features].clone();
    let feature_names = header[..n_features].to_vec();
    Dataset::new(columns, missing, target, kind, feature_names)?.with_target_name(target_name)
}

pub fn save_csv(ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let file = File::create(path)?;
    let mut out = BufWriter::new(file);
    write_csv(ds, &mut out)?;
    out.flush()?;
    Ok(())
}

/// 17 significant digits, enough for a lossless f64 round trip.
fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_csv<W: Write>(ds: &Dataset, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let mut header: Vec<&str> = ds.feature_names.iter().map(String::as_str).collect();
    header.push(&ds.target_name);
    wtr.write_record(&header).map_err(csv_error)?;
    let mut fields = Vec::with_capacity(ds.n_features() + 1);
    for r in 0..ds.n_rows() {
        fields.clear();
        for f in 0..ds.n_features() {
            fields.push(match ds.value(r, f) {
                Some(v) => format_value(v),
                None => String::new(),
            });
        }
        let t = ds.target[r];
        fields.push(match ds.kind {
            DatasetKind::Classification => format!("{}", t as u64),
            DatasetKind::Regression => format_value(t),
        });
        wtr.write_record(&fields).map_err(csv_error)?;
    }
    wtr.flush()?;
    Ok(())
}
