//! Tabular datasets: CSV loading and writing, plus a seeded synthetic generator.

use std::collections::HashSet;
use std::path::Path;

use ndarray::{Array2, ArrayView1, ArrayView2, Axis};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::seed::rng_from_seed;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("dataset has no data rows")]
    EmptyFile,
    #[error("column {0:?} not found in header")]
    MissingColumn(String),
    #[error("column {0:?} appears more than once")]
    DuplicateColumn(String),
    #[error("row {row}, column {column:?}: {value:?} is not a finite number")]
    NonNumericCell { row: usize, column: String, value: String },
    #[error("row {row} has {found} fields, header has {expected}")]
    RaggedRow { row: usize, expected: usize, found: usize },
    #[error("malformed CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),
    #[error("invalid dataset: {0}")]
    Invalid(String),
}

/// Numeric table with named columns. Experiments expect the predictors first
/// and the target last.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    column_names: Vec<String>,
    rows: Array2<f64>,
    row_ids: Option<Vec<String>>,
}

impl Dataset {
    pub fn new(
        column_names: Vec<String>,
        rows: Array2<f64>,
        row_ids: Option<Vec<String>>,
    ) -> Result<Self, DatasetError> {
        if column_names.len() != rows.ncols() {
            return Err(DatasetError::Invalid(format!(
                "{} names for {} columns",
                column_names.len(),
                rows.ncols()
            )));
        }
        let mut seen = HashSet::new();
        for name in &column_names {
            if !seen.insert(name.as_str()) {
                return Err(DatasetError::DuplicateColumn(name.clone()));
            }
        }
        if let Some(((row, col), v)) = rows.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(DatasetError::NonNumericCell {
                row: row + 1,
                column: column_names[col].clone(),
                value: v.to_string(),
            });
        }
        if let Some(ids) = &row_ids {
            if ids.len() != rows.nrows() {
                return Err(DatasetError::Invalid(format!(
                    "{} row ids for {} rows",
                    ids.len(),
                    rows.nrows()
                )));
            }
        }
        Ok(Self {
            column_names,
            rows,
            row_ids,
        })
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn rows(&self) -> ArrayView2<'_, f64> {
        self.rows.view()
    }

    pub fn row_ids(&self) -> Option<&[String]> {
        self.row_ids.as_deref()
    }

    pub fn nrows(&self) -> usize {
        self.rows.nrows()
    }

    pub fn column(&self, index: usize) -> ArrayView1<'_, f64> {
        self.rows.column(index)
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.column_names.iter().position(|c| c == name)
    }

    /// Rows at `indices`, in that order.
    pub fn select_rows(&self, indices: &[usize]) -> Array2<f64> {
        self.rows.select(Axis(0), indices)
    }

    /// Keeps only `columns`, in the given order.
    pub fn project(&self, columns: &[String]) -> Result<Dataset, DatasetError> {
        let idx = columns
            .iter()
            .map(|c| self.column_index(c).ok_or_else(|| DatasetError::MissingColumn(c.clone())))
            .collect::<Result<Vec<_>, _>>()?;
        Dataset::new(columns.to_vec(), self.rows.select(Axis(1), &idx), self.row_ids.clone())
    }

    /// CSV text with a header row; numbers use Rust's shortest round-trip form.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = Vec::new();
        if self.row_ids.is_some() {
            header.push("id".to_string());
        }
        header.extend(self.column_names.iter().cloned());
        w.write_record(&header).expect("in-memory write");
        for (i, row) in self.rows.rows().into_iter().enumerate() {
            let mut fields = Vec::new();
            if let Some(ids) = &self.row_ids {
                fields.push(ids[i].clone());
            }
            fields.extend(row.iter().map(|v| v.to_string()));
            w.write_record(&fields).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 output")
    }
}

/// SHA-256 of the raw dataset bytes, lowercase hex.
pub fn content_digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Reads `path` and keeps `predictors` followed by `target`.
pub fn load_dataset(path: &Path, predictors: &[String], target: &str) -> Result<Dataset, DatasetError> {
    let bytes = std::fs::read(path).map_err(|source| DatasetError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_dataset(&bytes, predictors, target)
}

/// Parses CSV bytes whose first line is a header. Only the designated columns
/// must be numeric; an `id` column, when present and not designated, becomes
/// the row ids. Row numbers in errors count data rows from 1.
pub fn parse_dataset(bytes: &[u8], predictors: &[String], target: &str) -> Result<Dataset, DatasetError> {
    let mut wanted: Vec<String> = predictors.to_vec();
    wanted.push(target.to_string());
    parse_columns(bytes, &wanted)
}

/// Parses CSV bytes keeping `columns` in the given order.
pub fn parse_columns(bytes: &[u8], columns: &[String]) -> Result<Dataset, DatasetError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(bytes);
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if header.is_empty() || header.iter().all(String::is_empty) {
        return Err(DatasetError::EmptyFile);
    }
    let mut seen = HashSet::new();
    for h in &header {
        if !seen.insert(h.as_str()) {
            return Err(DatasetError::DuplicateColumn(h.clone()));
        }
    }
    let idx = columns
        .iter()
        .map(|c| {
            header
                .iter()
                .position(|h| h == c)
                .ok_or_else(|| DatasetError::MissingColumn(c.clone()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let id_col = header
        .iter()
        .position(|h| h == "id")
        .filter(|i| !idx.contains(i));

    let mut values = Vec::new();
    let mut ids = Vec::new();
    let mut n = 0;
    for (r, record) in reader.records().enumerate() {
        let record = record?;
        let row = r + 1;
        if record.len() == 1 && record.get(0) == Some("") {
            continue;
        }
        if record.len() != header.len() {
            return Err(DatasetError::RaggedRow {
                row,
                expected: header.len(),
                found: record.len(),
            });
        }
        for (&i, name) in idx.iter().zip(columns) {
            let cell = &record[i];
            match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => values.push(v),
                _ => {
                    return Err(DatasetError::NonNumericCell {
                        row,
                        column: name.clone(),
                        value: cell.to_string(),
                    })
                }
            }
        }
        if let Some(i) = id_col {
            ids.push(record[i].to_string());
        }
        n += 1;
    }
    if n == 0 {
        return Err(DatasetError::EmptyFile);
    }
    let rows = Array2::from_shape_vec((n, columns.len()), values).expect("rectangular by construction");
    Dataset::new(columns.to_vec(), rows, id_col.map(|_| ids))
}

/// Parameters of the synthetic stand-in dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthSpec {
    pub n: usize,
    pub column_names: Vec<String>,
    /// One point per latent group, one coordinate per column.
    pub centers: Vec<Vec<f64>>,
    /// Relative noise: each coordinate is `c · (1 + noise · z)`, `z ~ N(0, 1)`.
    pub noise: f64,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            n: 70,
            column_names: vec!["Attrib".into(), "Nonmenu".into(), "Size".into()],
            // Larger specifications go with larger systems.
            centers: vec![
                vec![30.0, 8.0, 300.0],
                vec![55.0, 14.0, 550.0],
                vec![80.0, 20.0, 800.0],
                vec![110.0, 27.0, 1050.0],
                vec![140.0, 34.0, 1350.0],
                vec![175.0, 42.0, 1700.0],
                vec![215.0, 52.0, 2100.0],
            ],
            noise: 0.12,
            seed: 2011,
        }
    }
}

/// Row `i` is drawn around center `i mod k`. Noisy values are rounded to
/// whole counts and floored at zero; with `noise == 0` rows equal their center.
pub fn generate_synthetic(spec: &SynthSpec) -> Result<Dataset, DatasetError> {
    if spec.n == 0 {
        return Err(DatasetError::InvalidSpec("n must be >= 1".into()));
    }
    if spec.centers.is_empty() {
        return Err(DatasetError::InvalidSpec("at least one center is required".into()));
    }
    let d = spec.column_names.len();
    if spec.centers.iter().any(|c| c.len() != d) {
        return Err(DatasetError::InvalidSpec(format!("every center needs {d} coordinates")));
    }
    if spec.centers.iter().flatten().any(|v| !v.is_finite()) {
        return Err(DatasetError::InvalidSpec("centers must be finite".into()));
    }
    if !(spec.noise.is_finite() && spec.noise >= 0.0) {
        return Err(DatasetError::InvalidSpec("noise must be finite and >= 0".into()));
    }
    let mut rng = rng_from_seed(spec.seed);
    let mut rows = Array2::zeros((spec.n, d));
    for (i, mut row) in rows.rows_mut().into_iter().enumerate() {
        let center = &spec.centers[i % spec.centers.len()];
        for (v, &c) in row.iter_mut().zip(center) {
            let z: f64 = StandardNormal.sample(&mut rng);
            *v = if spec.noise == 0.0 {
                c
            } else {
                (c * (1.0 + spec.noise * z)).round().max(0.0)
            };
        }
    }
    Dataset::new(spec.column_names.clone(), rows, None)
}
