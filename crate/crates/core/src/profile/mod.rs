//! Content embeddings of columns and tables, and exact nearest-neighbour
//! search over them.
//!
//! Text and categorical columns become a bag of hashed character 3-grams of
//! the `^cell$`-padded, lowercased cells. Numeric columns become a sketch of
//! named statistics hashed into the same space. Both are L2-normalized.

pub mod index;

pub use index::{cosine_distance, read_index, write_index, EmbeddingIndex, IndexError};

use crate::table::{infer_type, is_missing, parse_number, ColumnType, Table};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_DIM: usize = 256;
pub const DEFAULT_MAX_ROWS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProfileConfig {
    pub dim: usize,
    pub seed: u64,
    pub max_rows: usize,
}

impl Default for ProfileConfig {
    fn default() -> Self {
        Self {
            dim: DEFAULT_DIM,
            seed: 0,
            max_rows: DEFAULT_MAX_ROWS,
        }
    }
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// 64-bit FNV-1a; the seed is folded into the offset basis (seed 0 gives the
/// standard function).
pub fn fnv1a(bytes: &[u8], seed: u64) -> u64 {
    let mut h = FNV_OFFSET ^ seed;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

pub fn bucket(bytes: &[u8], cfg: &ProfileConfig) -> usize {
    (fnv1a(bytes, cfg.seed) % cfg.dim as u64) as usize
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnProfile {
    pub name: String,
    pub inferred_type: ColumnType,
    pub vector: Vec<f64>,
    /// Set for entirely missing columns, whose vector is zero.
    pub all_missing: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableEmbedding {
    pub dataset_name: String,
    pub vector: Vec<f64>,
    pub n_columns: usize,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ProfileError {
    #[error("embedding dimensions differ ({0} vs {1})")]
    DimensionMismatch(usize, usize),
    #[error("table has no columns")]
    NoColumns,
}

pub fn l2_normalize(v: &mut [f64]) {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
}

fn slog(x: f64) -> f64 {
    x.signum() * x.abs().ln_1p()
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

fn add_feature(v: &mut [f64], name: &str, value: f64, cfg: &ProfileConfig) {
    v[bucket(format!("num:{name}").as_bytes(), cfg)] += value;
}

fn numeric_vector(values: &[&str], cfg: &ProfileConfig) -> Vec<f64> {
    let mut v = vec![0.0; cfg.dim];
    let n_all = values.len() as f64;
    let mut xs: Vec<f64> = values.iter().filter_map(|s| parse_number(s)).collect();
    let missing = values.iter().filter(|s| is_missing(s)).count() as f64 / n_all;
    add_feature(&mut v, "missing_rate", missing, cfg);
    if xs.is_empty() {
        return v;
    }
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let std = var.sqrt();
    let skew = if std > 0.0 {
        xs.iter().map(|x| ((x - mean) / std).powi(3)).sum::<f64>() / n
    } else {
        0.0
    };
    let mut distinct = xs.clone();
    distinct.dedup();
    let integer = xs.iter().filter(|x| x.fract() == 0.0).count() as f64 / n;
    add_feature(&mut v, "mean", slog(mean), cfg);
    add_feature(&mut v, "std", slog(std), cfg);
    add_feature(&mut v, "min", slog(xs[0]), cfg);
    add_feature(&mut v, "max", slog(xs[xs.len() - 1]), cfg);
    for (name, q) in [("q05", 0.05), ("q25", 0.25), ("q50", 0.5), ("q75", 0.75), ("q95", 0.95)] {
        add_feature(&mut v, name, slog(quantile(&xs, q)), cfg);
    }
    add_feature(&mut v, "cardinality", distinct.len() as f64 / n, cfg);
    add_feature(&mut v, "integer", integer, cfg);
    add_feature(&mut v, "skew", slog(skew), cfg);
    // order-of-magnitude histogram, signed
    let mut hist = std::collections::BTreeMap::new();
    for &x in &xs {
        let key = if x == 0.0 {
            "zero".to_string()
        } else {
            let mag = (x.abs().log10().floor() as i32).clamp(-6, 12);
            format!("{}{mag}", if x < 0.0 { "-" } else { "+" })
        };
        *hist.entry(key).or_insert(0usize) += 1;
    }
    for (k, c) in hist {
        add_feature(&mut v, &format!("mag{k}"), 2.0 * c as f64 / n, cfg);
    }
    add_feature(&mut v, "bias", 1.0, cfg);
    v
}

fn ngram_vector(values: &[&str], cfg: &ProfileConfig) -> Vec<f64> {
    let mut v = vec![0.0; cfg.dim];
    for s in values.iter().filter(|s| !is_missing(s)) {
        let padded = format!("^{}$", s.trim().to_lowercase());
        let chars: Vec<char> = padded.chars().collect();
        let mut buf = String::new();
        for w in chars.windows(3) {
            buf.clear();
            buf.extend(w);
            v[bucket(buf.as_bytes(), cfg)] += 1.0;
        }
    }
    v
}

pub fn profile_column(name: &str, values: &[String], cfg: &ProfileConfig) -> ColumnProfile {
    let inferred_type = infer_type(values);
    let all_missing = values.iter().all(|s| is_missing(s));
    let cells: Vec<&str> = values.iter().map(String::as_str).collect();
    let mut vector = if all_missing {
        vec![0.0; cfg.dim]
    } else if inferred_type == ColumnType::Numeric {
        numeric_vector(&cells, cfg)
    } else {
        ngram_vector(&cells, cfg)
    };
    l2_normalize(&mut vector);
    ColumnProfile {
        name: name.to_string(),
        inferred_type,
        vector,
        all_missing,
    }
}

/// Mean of the column vectors, renormalized. Values are rounded to f32 so
/// an embedding compares exactly with its stored copy in an index file.
pub fn embed_table(profiles: &[ColumnProfile], dataset_name: &str) -> Result<TableEmbedding, ProfileError> {
    let first = profiles.first().ok_or(ProfileError::NoColumns)?;
    let d = first.vector.len();
    let mut v = vec![0.0; d];
    for p in profiles {
        if p.vector.len() != d {
            return Err(ProfileError::DimensionMismatch(d, p.vector.len()));
        }
        for (a, b) in v.iter_mut().zip(&p.vector) {
            *a += b;
        }
    }
    v.iter_mut().for_each(|x| *x /= profiles.len() as f64);
    l2_normalize(&mut v);
    v.iter_mut().for_each(|x| *x = *x as f32 as f64);
    Ok(TableEmbedding {
        dataset_name: dataset_name.to_string(),
        vector: v,
        n_columns: profiles.len(),
    })
}

/// Row indices kept for profiling: all rows, or a seeded uniform sample of
/// `max_rows` in ascending order.
pub fn sample_rows(n_rows: usize, cfg: &ProfileConfig) -> Option<Vec<usize>> {
    if n_rows <= cfg.max_rows {
        return None;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut idx = rand::seq::index::sample(&mut rng, n_rows, cfg.max_rows).into_vec();
    idx.sort_unstable();
    Some(idx)
}

/// Profiles every column (in parallel) over the shared row sample.
pub fn profile_table(table: &Table, cfg: &ProfileConfig) -> Vec<ColumnProfile> {
    let rows = sample_rows(table.row_count(), cfg);
    table
        .headers
        .par_iter()
        .zip(table.columns.par_iter())
        .map(|(h, col)| match &rows {
            Some(idx) => {
                let sampled: Vec<String> = idx.iter().map(|&i| col[i].clone()).collect();
                profile_column(h, &sampled, cfg)
            }
            None => profile_column(h, col, cfg),
        })
        .collect()
}

pub fn embed_csv_table(table: &Table, dataset_name: &str, cfg: &ProfileConfig) -> Result<TableEmbedding, ProfileError> {
    embed_table(&profile_table(table, cfg), dataset_name)
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum();
    let nb: f64 = b.iter().map(|x| x * x).sum();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    if a == b {
        return 1.0;
    }
    dot / (na.sqrt() * nb.sqrt())
}
