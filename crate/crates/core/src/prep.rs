//! Preparing an unseen dataset for the optimizer and splitting the time
//! budget across recommended skeletons.

use crate::profile::fnv1a;
use crate::table::{infer_type, is_missing, parse_number, ColumnType, Table};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Classification,
    Regression,
}

#[derive(Debug, Error)]
pub enum PrepError {
    #[error("target column has no values")]
    EmptyTarget,
    #[error("target column {0:?} not found")]
    MissingTarget(String),
    #[error("cannot write prepared dataset: {0}")]
    Io(#[from] std::io::Error),
}

pub const CLASS_MIN_DISTINCT: usize = 20;
pub const CLASS_DISTINCT_SHARE: f64 = 0.05;

/// Non-numeric targets are classification; integer targets with at most
/// `max(20, 5% of rows)` distinct values are classification; everything
/// else is regression.
pub fn detect_task(target: &[String]) -> Result<Task, PrepError> {
    let present: Vec<&str> = target.iter().map(|s| s.trim()).filter(|s| !is_missing(s)).collect();
    if present.is_empty() {
        return Err(PrepError::EmptyTarget);
    }
    let mut nums = Vec::with_capacity(present.len());
    for s in &present {
        match parse_number(s) {
            Some(x) => nums.push(x),
            None => return Ok(Task::Classification),
        }
    }
    if nums.iter().all(|x| x.fract() == 0.0) {
        let distinct: std::collections::HashSet<u64> = nums.iter().map(|x| x.to_bits()).collect();
        let limit = (CLASS_DISTINCT_SHARE * nums.len() as f64).max(CLASS_MIN_DISTINCT as f64);
        if distinct.len() as f64 <= limit {
            return Ok(Task::Classification);
        }
    }
    Ok(Task::Regression)
}

pub fn infer_types(table: &Table) -> Vec<(String, ColumnType)> {
    table
        .headers
        .iter()
        .zip(&table.columns)
        .map(|(h, c)| (h.clone(), infer_type(c)))
        .collect()
}

pub const TEXT_DIM: usize = 64;

fn tokens(cell: &str) -> impl Iterator<Item = String> + '_ {
    cell.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(|t| t.to_lowercase())
}

/// Hashed token-unigram bag per cell, L2-normalized; `TEXT_DIM` values per
/// row. Empty cells map to the zero vector.
pub fn vectorize_cell(cell: &str) -> [f64; TEXT_DIM] {
    let mut v = [0.0; TEXT_DIM];
    for t in tokens(cell) {
        v[(fnv1a(t.as_bytes(), 0) % TEXT_DIM as u64) as usize] += 1.0;
    }
    crate::profile::l2_normalize(&mut v);
    v
}

pub fn vectorize_text(column: &[String]) -> Vec<[f64; TEXT_DIM]> {
    column.iter().map(|c| vectorize_cell(c)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Imputation {
    None,
    Median,
    Mode,
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("column is entirely missing")]
pub struct AllMissingColumn;

/// Numeric columns take the median, others the most frequent value (ties go
/// to the lexicographically smallest).
pub fn impute(column: &[String], ty: ColumnType) -> Result<(Vec<String>, Imputation), AllMissingColumn> {
    let present: Vec<&String> = column.iter().filter(|s| !is_missing(s)).collect();
    if present.is_empty() {
        return Err(AllMissingColumn);
    }
    if present.len() == column.len() {
        return Ok((column.to_vec(), Imputation::None));
    }
    let (fill, how) = if ty == ColumnType::Numeric {
        let mut xs: Vec<f64> = present.iter().filter_map(|s| parse_number(s)).collect();
        xs.sort_by(f64::total_cmp);
        let m = xs.len() / 2;
        let med = if xs.len() % 2 == 1 { xs[m] } else { (xs[m - 1] + xs[m]) / 2.0 };
        (format!("{med}"), Imputation::Median)
    } else {
        (mode(&present).to_string(), Imputation::Mode)
    };
    let out = column
        .iter()
        .map(|s| if is_missing(s) { fill.clone() } else { s.clone() })
        .collect();
    Ok((out, how))
}

fn mode<'a>(values: &[&'a String]) -> &'a str {
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for v in values {
        *counts.entry(v.as_str()).or_insert(0) += 1;
    }
    let mut best: Vec<(&str, usize)> = counts.into_iter().collect();
    best.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
    best[0].0
}

/// Ordinal codes by descending frequency, ties lexicographic.
pub fn frequency_codes(column: &[String]) -> HashMap<String, usize> {
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for v in column {
        *counts.entry(v.as_str()).or_insert(0) += 1;
    }
    let mut ranked: Vec<(&str, usize)> = counts.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
    ranked.into_iter().enumerate().map(|(i, (v, _))| (v.to_string(), i)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreparedColumn {
    pub name: String,
    pub inferred_type: ColumnType,
    pub imputation_applied: Imputation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreparedDataset {
    pub name: String,
    pub columns: Vec<PreparedColumn>,
    pub target_column: String,
    pub task: Task,
    pub row_count: usize,
    pub matrix_path: PathBuf,
    pub manifest_path: PathBuf,
    pub warnings: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub columns: Vec<String>,
    pub target_index: usize,
    pub task: Task,
}

/// Detects the task, types, imputes and encodes `table` into a numeric
/// matrix (`<name>.prepared.csv`, target last) plus a JSON manifest.
/// Rows with a missing target are dropped.
pub fn prepare_dataset(table: &Table, target: &str, out_dir: &Path) -> Result<PreparedDataset, PrepError> {
    let t_idx = table
        .headers
        .iter()
        .position(|h| h == target)
        .ok_or_else(|| PrepError::MissingTarget(target.to_string()))?;
    let target_col = &table.columns[t_idx];
    let task = detect_task(target_col)?;
    let keep_rows: Vec<usize> = (0..table.row_count()).filter(|&r| !is_missing(&target_col[r])).collect();
    let pick = |col: &[String]| -> Vec<String> { keep_rows.iter().map(|&r| col[r].clone()).collect() };

    let mut warnings = Vec::new();
    let mut columns = Vec::new();
    let mut names: Vec<String> = Vec::new();
    let mut features: Vec<Vec<f64>> = Vec::new();
    for (c, h) in table.headers.iter().enumerate() {
        if c == t_idx {
            continue;
        }
        let col = pick(&table.columns[c]);
        let ty = infer_type(&col);
        let (filled, how) = match impute(&col, ty) {
            Ok(x) => x,
            Err(AllMissingColumn) => {
                warnings.push(format!("dropped all-missing column {h:?}"));
                continue;
            }
        };
        columns.push(PreparedColumn {
            name: h.clone(),
            inferred_type: ty,
            imputation_applied: how,
        });
        match ty {
            ColumnType::Numeric => {
                let fallback = impute_numeric_fallback(&filled);
                features.push(filled.iter().map(|s| parse_number(s).unwrap_or(fallback)).collect());
                names.push(h.clone());
            }
            ColumnType::Categorical => {
                let codes = frequency_codes(&filled);
                features.push(filled.iter().map(|s| codes[s] as f64).collect());
                names.push(h.clone());
            }
            ColumnType::Text => {
                let vecs = vectorize_text(&filled);
                for k in 0..TEXT_DIM {
                    features.push(vecs.iter().map(|v| v[k]).collect());
                    names.push(format!("{h}_t{k}"));
                }
            }
        }
    }
    let tcol = pick(target_col);
    let y: Vec<f64> = if tcol.iter().all(|s| parse_number(s).is_some()) {
        tcol.iter().map(|s| parse_number(s).unwrap()).collect()
    } else {
        let codes = frequency_codes(&tcol);
        tcol.iter().map(|s| codes[s] as f64).collect()
    };
    columns.push(PreparedColumn {
        name: target.to_string(),
        inferred_type: infer_type(&tcol),
        imputation_applied: Imputation::None,
    });
    names.push(target.to_string());
    features.push(y);

    std::fs::create_dir_all(out_dir)?;
    let matrix_path = out_dir.join(format!("{}.prepared.csv", table.name));
    let manifest_path = out_dir.join(format!("{}.manifest.json", table.name));
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(&matrix_path)
        .map_err(std::io::Error::other)?;
    for r in 0..keep_rows.len() {
        w.write_record(features.iter().map(|f| format!("{}", f[r])))
            .map_err(std::io::Error::other)?;
    }
    w.flush()?;
    let manifest = Manifest {
        target_index: names.len() - 1,
        columns: names,
        task,
    };
    std::fs::write(&manifest_path, serde_json::to_string_pretty(&manifest).expect("serializable"))?;
    Ok(PreparedDataset {
        name: table.name.clone(),
        columns,
        target_column: target.to_string(),
        task,
        row_count: keep_rows.len(),
        matrix_path,
        manifest_path,
        warnings,
    })
}

/// Median of the parseable cells; numeric columns may hold up to 1% junk.
fn impute_numeric_fallback(col: &[String]) -> f64 {
    let mut xs: Vec<f64> = col.iter().filter_map(|s| parse_number(s)).collect();
    if xs.is_empty() {
        return 0.0;
    }
    xs.sort_by(f64::total_cmp);
    xs[xs.len() / 2]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BudgetPlan {
    pub total_t: f64,
    pub consumed_t: f64,
    pub k: usize,
    pub per_graph: f64,
}

#[derive(Debug, Error, PartialEq)]
pub enum BudgetError {
    #[error("time budget exhausted ({consumed} s used of {total} s)")]
    BudgetExhausted { total: f64, consumed: f64 },
    #[error("invalid budget inputs")]
    InvalidInput,
}

/// `(T - t) / K` seconds per skeleton.
pub fn plan_budget(total: f64, consumed: f64, k: usize) -> Result<BudgetPlan, BudgetError> {
    if !(total > 0.0) || !(consumed >= 0.0) || k == 0 || !total.is_finite() || !consumed.is_finite() {
        return Err(BudgetError::InvalidInput);
    }
    if consumed >= total {
        return Err(BudgetError::BudgetExhausted { total, consumed });
    }
    Ok(BudgetPlan {
        total_t: total,
        consumed_t: consumed,
        k,
        per_graph: (total - consumed) / k as f64,
    })
}
