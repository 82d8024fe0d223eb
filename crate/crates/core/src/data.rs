//! Case data: parsing, validation, feature sub-setting and standardization.
//!
//! A [`CaseDataset`] is a dense case-by-feature matrix. Rows are cases,
//! columns are profile components. Every value is finite; missing or
//! non-numeric cells are rejected at parse time.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DataError {
    #[error("input is not valid UTF-8 text")]
    InvalidUtf8,
    #[error("input contains no data rows")]
    EmptyInput,
    #[error("non-numeric value {value:?} at row {row}, column {column}")]
    NonNumericCell {
        row: usize,
        column: String,
        value: String,
    },
    #[error("missing value at row {row}, column {column}")]
    MissingValue { row: usize, column: String },
    #[error("row {row} has {found} fields, expected {expected}")]
    RaggedRows {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("duplicate case id {0:?}")]
    DuplicateIds(String),
    #[error("duplicate feature name {0:?}")]
    DuplicateFeature(String),
    #[error("unknown feature {0:?}")]
    UnknownFeature(String),
    #[error("id column {0} not found")]
    UnknownIdColumn(String),
    #[error("unsupported separator {0:?}; use comma, semicolon or tab")]
    UnsupportedSeparator(char),
    #[error("expected {expected} values, got {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("non-finite value at row {row}, column {column}")]
    NonFiniteValue { row: usize, column: usize },
    #[error("dataset needs at least {needed} cases, has {found}")]
    TooFewCases { needed: usize, found: usize },
    #[error("dataset has no features")]
    NoFeatures,
    #[error("malformed csv: {0}")]
    Malformed(String),
}

impl DataError {
    /// Stable machine-readable error code.
    pub fn code(&self) -> &'static str {
        match self {
            DataError::InvalidUtf8 => "invalid_utf8",
            DataError::EmptyInput => "empty_input",
            DataError::NonNumericCell { .. } => "non_numeric_cell",
            DataError::MissingValue { .. } => "missing_value",
            DataError::RaggedRows { .. } => "ragged_rows",
            DataError::DuplicateIds(_) => "duplicate_ids",
            DataError::DuplicateFeature(_) => "duplicate_feature",
            DataError::UnknownFeature(_) => "unknown_feature",
            DataError::UnknownIdColumn(_) => "unknown_id_column",
            DataError::UnsupportedSeparator(_) => "unsupported_separator",
            DataError::LengthMismatch { .. } => "length_mismatch",
            DataError::NonFiniteValue { .. } => "non_finite_value",
            DataError::TooFewCases { .. } => "too_few_cases",
            DataError::NoFeatures => "no_features",
            DataError::Malformed(_) => "malformed_csv",
        }
    }
}

/// Column designated as the case identifier.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum IdColumn {
    Index(usize),
    Name(String),
}

impl fmt::Display for IdColumn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IdColumn::Index(i) => write!(f, "#{i}"),
            IdColumn::Name(n) => write!(f, "{n:?}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ParseOptions {
    pub has_header: bool,
    pub separator: char,
    pub id_column: Option<IdColumn>,
}

impl Default for ParseOptions {
    fn default() -> Self {
        Self {
            has_header: true,
            separator: ',',
            id_column: None,
        }
    }
}

impl ParseOptions {
    pub fn with_id_column(mut self, id: IdColumn) -> Self {
        self.id_column = Some(id);
        self
    }

    pub fn with_separator(mut self, separator: char) -> Self {
        self.separator = separator;
        self
    }
}

/// Numeric case-by-feature matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDataset", into = "RawDataset")]
pub struct CaseDataset {
    case_ids: Vec<String>,
    feature_names: Vec<String>,
    // row-major, case_ids.len() * feature_names.len()
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawDataset {
    case_ids: Vec<String>,
    feature_names: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl TryFrom<RawDataset> for CaseDataset {
    type Error = DataError;

    fn try_from(raw: RawDataset) -> Result<Self, Self::Error> {
        CaseDataset::new(raw.case_ids, raw.feature_names, raw.rows)
    }
}

impl From<CaseDataset> for RawDataset {
    fn from(d: CaseDataset) -> Self {
        let rows = d.rows().map(<[f64]>::to_vec).collect();
        RawDataset {
            case_ids: d.case_ids,
            feature_names: d.feature_names,
            rows,
        }
    }
}

impl CaseDataset {
    /// Builds a dataset, checking shape, uniqueness and finiteness.
    pub fn new(
        case_ids: Vec<String>,
        feature_names: Vec<String>,
        rows: Vec<Vec<f64>>,
    ) -> Result<Self, DataError> {
        if rows.is_empty() {
            return Err(DataError::EmptyInput);
        }
        if feature_names.is_empty() {
            return Err(DataError::NoFeatures);
        }
        if case_ids.len() != rows.len() {
            return Err(DataError::LengthMismatch {
                expected: rows.len(),
                found: case_ids.len(),
            });
        }
        check_unique(&case_ids).map_err(DataError::DuplicateIds)?;
        check_unique(&feature_names).map_err(DataError::DuplicateFeature)?;

        let m = feature_names.len();
        let mut values = Vec::with_capacity(rows.len() * m);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != m {
                return Err(DataError::RaggedRows {
                    row: i + 1,
                    expected: m,
                    found: row.len(),
                });
            }
            if let Some(j) = row.iter().position(|v| !v.is_finite()) {
                return Err(DataError::NonFiniteValue { row: i + 1, column: j });
            }
            values.extend(row);
        }
        Ok(Self {
            case_ids,
            feature_names,
            values,
        })
    }

    /// Builds a dataset with default ids "1".."n".
    pub fn from_rows(feature_names: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self, DataError> {
        let ids = default_ids(rows.len());
        Self::new(ids, feature_names, rows)
    }

    pub fn n_cases(&self) -> usize {
        self.case_ids.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn case_ids(&self) -> &[String] {
        &self.case_ids
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let m = self.n_features();
        &self.values[i * m..(i + 1) * m]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.n_features())
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        self.rows().map(move |r| r[j])
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.feature_names.iter().position(|f| f == name)
    }

    /// Column arithmetic means.
    pub fn column_means(&self) -> Vec<f64> {
        let n = self.n_cases() as f64;
        (0..self.n_features())
            .map(|j| self.column(j).sum::<f64>() / n)
            .collect()
    }

    /// Errors unless the dataset is usable for analysis (≥ `min` cases).
    pub fn require_cases(&self, min: usize) -> Result<(), DataError> {
        if self.n_cases() < min {
            return Err(DataError::TooFewCases {
                needed: min,
                found: self.n_cases(),
            });
        }
        Ok(())
    }

    /// Keeps only the named features, in the order given.
    pub fn subset_features<S: AsRef<str>>(&self, keep: &[S]) -> Result<Self, DataError> {
        if keep.is_empty() {
            return Err(DataError::NoFeatures);
        }
        let idx = keep
            .iter()
            .map(|k| {
                self.feature_index(k.as_ref())
                    .ok_or_else(|| DataError::UnknownFeature(k.as_ref().to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let names: Vec<String> = idx.iter().map(|&j| self.feature_names[j].clone()).collect();
        let rows = self
            .rows()
            .map(|r| idx.iter().map(|&j| r[j]).collect())
            .collect();
        Self::new(self.case_ids.clone(), names, rows)
    }

    /// Serializes to CSV with a leading `id` column and a header row.
    ///
    /// Floats are written in shortest round-trip form, so parsing the output
    /// with `id_column = "id"` reproduces the dataset exactly.
    pub fn to_csv(&self, separator: char) -> String {
        let mut w = csv::WriterBuilder::new()
            .delimiter(separator as u8)
            .from_writer(Vec::new());
        let mut header = vec!["id".to_string()];
        header.extend(self.feature_names.iter().cloned());
        w.write_record(&header).expect("in-memory write");
        for (id, row) in self.case_ids.iter().zip(self.rows()) {
            let mut rec = vec![id.clone()];
            rec.extend(row.iter().map(|v| v.to_string()));
            w.write_record(&rec).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf8 output")
    }

    /// SHA-256 over ids, names and the exact bit patterns of every value.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        for id in &self.case_ids {
            h.update(id.as_bytes());
            h.update([0u8]);
        }
        h.update([1u8]);
        for f in &self.feature_names {
            h.update(f.as_bytes());
            h.update([0u8]);
        }
        h.update([1u8]);
        for v in &self.values {
            h.update(v.to_bits().to_le_bytes());
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

fn check_unique(items: &[String]) -> Result<(), String> {
    let mut seen = HashSet::with_capacity(items.len());
    for it in items {
        if !seen.insert(it.as_str()) {
            return Err(it.clone());
        }
    }
    Ok(())
}

fn default_ids(n: usize) -> Vec<String> {
    (1..=n).map(|i| i.to_string()).collect()
}

/// Parses delimited numeric text into a [`CaseDataset`].
pub fn parse_csv(raw: &[u8], options: &ParseOptions) -> Result<CaseDataset, DataError> {
    if !matches!(options.separator, ',' | ';' | '\t') {
        return Err(DataError::UnsupportedSeparator(options.separator));
    }
    let text = std::str::from_utf8(raw).map_err(|_| DataError::InvalidUtf8)?;
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);

    let mut reader = csv::ReaderBuilder::new()
        .delimiter(options.separator as u8)
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let mut records = reader.records();
    let header: Option<Vec<String>> = if options.has_header {
        match records.next() {
            None => return Err(DataError::EmptyInput),
            Some(r) => Some(
                r.map_err(|e| DataError::Malformed(e.to_string()))?
                    .iter()
                    .map(str::to_string)
                    .collect(),
            ),
        }
    } else {
        None
    };

    let mut body: Vec<csv::StringRecord> = Vec::new();
    for r in records {
        let r = r.map_err(|e| DataError::Malformed(e.to_string()))?;
        // skip blank lines
        if r.len() == 1 && r[0].is_empty() {
            continue;
        }
        body.push(r);
    }
    if body.is_empty() {
        return Err(DataError::EmptyInput);
    }

    let width = header.as_ref().map_or(body[0].len(), Vec::len);
    for (i, r) in body.iter().enumerate() {
        if r.len() != width {
            return Err(DataError::RaggedRows {
                row: i + 1,
                expected: width,
                found: r.len(),
            });
        }
    }

    let column_names: Vec<String> = match header {
        Some(h) => h,
        None => (1..=width).map(|j| format!("V{j}")).collect(),
    };

    let id_idx = match &options.id_column {
        None => None,
        Some(IdColumn::Index(i)) if *i < width => Some(*i),
        Some(IdColumn::Name(n)) => Some(
            column_names
                .iter()
                .position(|c| c == n)
                .ok_or_else(|| DataError::UnknownIdColumn(format!("{n:?}")))?,
        ),
        Some(other) => return Err(DataError::UnknownIdColumn(other.to_string())),
    };

    let feature_cols: Vec<usize> = (0..width).filter(|&j| Some(j) != id_idx).collect();
    if feature_cols.is_empty() {
        return Err(DataError::NoFeatures);
    }
    let feature_names: Vec<String> = feature_cols.iter().map(|&j| column_names[j].clone()).collect();
    check_unique(&feature_names).map_err(DataError::DuplicateFeature)?;

    let mut ids = Vec::with_capacity(body.len());
    let mut rows = Vec::with_capacity(body.len());
    for (i, rec) in body.iter().enumerate() {
        let row_no = i + 1;
        ids.push(match id_idx {
            Some(j) => rec[j].to_string(),
            None => row_no.to_string(),
        });
        let mut row = Vec::with_capacity(feature_cols.len());
        for &j in &feature_cols {
            row.push(parse_cell(&rec[j], row_no, &column_names[j])?);
        }
        rows.push(row);
    }
    CaseDataset::new(ids, feature_names, rows)
}

fn parse_cell(cell: &str, row: usize, column: &str) -> Result<f64, DataError> {
    if cell.is_empty() {
        return Err(DataError::MissingValue {
            row,
            column: column.to_string(),
        });
    }
    match cell.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(DataError::NonNumericCell {
            row,
            column: column.to_string(),
            value: cell.to_string(),
        }),
    }
}

/// Per-feature standardization parameters.
///
/// Means and standard deviations are always recorded; `enabled` decides
/// whether [`ScalingParams::apply`] uses them. Standard deviation uses the
/// sample divisor `n - 1`. Features with zero spread map to 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingParams {
    pub enabled: bool,
    pub mean: Vec<f64>,
    pub sd: Vec<f64>,
}

impl ScalingParams {
    pub fn fit(data: &CaseDataset, enabled: bool) -> Self {
        let n = data.n_cases();
        let mean = data.column_means();
        let sd = (0..data.n_features())
            .map(|j| {
                if n < 2 {
                    return 0.0;
                }
                let ss: f64 = data.column(j).map(|x| (x - mean[j]).powi(2)).sum();
                (ss / (n - 1) as f64).sqrt()
            })
            .collect();
        Self { enabled, mean, sd }
    }

    /// Identity transform over `m` features.
    pub fn identity(m: usize) -> Self {
        Self {
            enabled: false,
            mean: vec![0.0; m],
            sd: vec![1.0; m],
        }
    }

    pub fn len(&self) -> usize {
        self.mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean.is_empty()
    }

    /// Indices of zero-spread features (scaled to 0 when enabled).
    pub fn constant_features(&self) -> Vec<usize> {
        self.sd
            .iter()
            .enumerate()
            .filter(|(_, &s)| s == 0.0)
            .map(|(j, _)| j)
            .collect()
    }

    pub fn apply(&self, row: &[f64]) -> Result<Vec<f64>, DataError> {
        self.check_len(row)?;
        if !self.enabled {
            return Ok(row.to_vec());
        }
        Ok(row
            .iter()
            .zip(self.mean.iter().zip(&self.sd))
            .map(|(&x, (&mu, &sd))| if sd > 0.0 { (x - mu) / sd } else { 0.0 })
            .collect())
    }

    /// Maps a scaled vector back to raw units. Zero-spread features return their mean.
    pub fn invert(&self, row: &[f64]) -> Result<Vec<f64>, DataError> {
        self.check_len(row)?;
        if !self.enabled {
            return Ok(row.to_vec());
        }
        Ok(row
            .iter()
            .zip(self.mean.iter().zip(&self.sd))
            .map(|(&z, (&mu, &sd))| if sd > 0.0 { z * sd + mu } else { mu })
            .collect())
    }

    /// Applies the transform to every case.
    pub fn transform(&self, data: &CaseDataset) -> Result<Vec<Vec<f64>>, DataError> {
        data.rows().map(|r| self.apply(r)).collect()
    }

    fn check_len(&self, row: &[f64]) -> Result<(), DataError> {
        if row.len() != self.len() {
            return Err(DataError::LengthMismatch {
                expected: self.len(),
                found: row.len(),
            });
        }
        Ok(())
    }
}
