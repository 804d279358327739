//! Column-major CSV tables and per-column type inference.

use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TableError {
    #[error("cannot read {path}: {source}")]
    Csv { path: String, source: csv::Error },
    #[error("{0} has no header row")]
    NoHeader(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub headers: Vec<String>,
    /// `columns[c][r]`
    pub columns: Vec<Vec<String>>,
}

impl Table {
    pub fn row_count(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn column(&self, name: &str) -> Option<&[String]> {
        let i = self.headers.iter().position(|h| h == name)?;
        Some(&self.columns[i])
    }
}

const MISSING: &[&str] = &["", "na", "n/a", "nan", "null", "none", "?"];

pub fn is_missing(cell: &str) -> bool {
    let t = cell.trim();
    MISSING.iter().any(|m| t.eq_ignore_ascii_case(m))
}

pub fn parse_number(cell: &str) -> Option<f64> {
    let x: f64 = cell.trim().parse().ok()?;
    x.is_finite().then_some(x)
}

/// Reads a CSV with a required header row. Short rows are padded with
/// empty (missing) cells; extra cells are ignored.
pub fn read_csv(path: &Path, delimiter: u8) -> Result<Table, TableError> {
    let wrap = |source| TableError::Csv {
        path: path.display().to_string(),
        source,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .flexible(true)
        .from_path(path)
        .map_err(wrap)?;
    let headers: Vec<String> = rdr.headers().map_err(wrap)?.iter().map(str::to_string).collect();
    if headers.is_empty() || headers.iter().all(|h| h.is_empty()) {
        return Err(TableError::NoHeader(path.display().to_string()));
    }
    let mut columns = vec![Vec::new(); headers.len()];
    for rec in rdr.records() {
        let rec = rec.map_err(wrap)?;
        for (c, col) in columns.iter_mut().enumerate() {
            col.push(rec.get(c).unwrap_or("").to_string());
        }
    }
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    Ok(Table { name, headers, columns })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ColumnType {
    Numeric,
    Categorical,
    Text,
}

pub const NUMERIC_SHARE: f64 = 0.99;
pub const CATEGORICAL_MAX_DISTINCT_RATIO: f64 = 0.5;
pub const CATEGORICAL_MAX_MEAN_LEN: f64 = 32.0;

/// Numeric when at least 99% of present cells parse as numbers; otherwise
/// Categorical when distinct/present ≤ 0.5 and the mean cell length is at
/// most 32 characters; otherwise Text. Entirely missing columns are
/// Categorical.
pub fn infer_type(values: &[String]) -> ColumnType {
    let present: Vec<&str> = values.iter().map(|s| s.trim()).filter(|s| !is_missing(s)).collect();
    if present.is_empty() {
        return ColumnType::Categorical;
    }
    let numeric = present.iter().filter(|s| parse_number(s).is_some()).count();
    if numeric as f64 >= NUMERIC_SHARE * present.len() as f64 {
        return ColumnType::Numeric;
    }
    let distinct: std::collections::HashSet<&str> = present.iter().copied().collect();
    let mean_len = present.iter().map(|s| s.chars().count()).sum::<usize>() as f64 / present.len() as f64;
    if distinct.len() as f64 <= CATEGORICAL_MAX_DISTINCT_RATIO * present.len() as f64
        && mean_len <= CATEGORICAL_MAX_MEAN_LEN
    {
        ColumnType::Categorical
    } else {
        ColumnType::Text
    }
}
