//! Exact cosine search and the `PFIX` index file.

use super::TableEmbedding;
use std::io::{self, Read, Write};
use thiserror::Error;

pub const MAGIC: &[u8; 4] = b"PFIX";
pub const VERSION: u32 = 1;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum IndexError {
    #[error("index is empty")]
    EmptyIndex,
    #[error("dimension mismatch: index has {0}, got {1}")]
    DimensionMismatch(usize, usize),
    #[error("dataset {0:?} indexed twice")]
    DuplicateName(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingIndex {
    pub dim: usize,
    pub entries: Vec<TableEmbedding>,
}

/// `1 - cos(a, b)`; a zero vector is at distance 1 from everything.
pub fn cosine_distance(a: &[f64], b: &[f64]) -> f64 {
    1.0 - super::cosine(a, b)
}

impl EmbeddingIndex {
    pub fn build(dim: usize, entries: Vec<TableEmbedding>) -> Result<Self, IndexError> {
        let mut names = std::collections::HashSet::new();
        for e in &entries {
            if e.vector.len() != dim {
                return Err(IndexError::DimensionMismatch(dim, e.vector.len()));
            }
            if !names.insert(e.dataset_name.as_str()) {
                return Err(IndexError::DuplicateName(e.dataset_name.clone()));
            }
        }
        Ok(Self { dim, entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// The `min(k, len)` closest entries, ascending distance, ties by name.
    pub fn nearest(&self, query: &[f64], k: usize) -> Result<Vec<(String, f64)>, IndexError> {
        if self.entries.is_empty() {
            return Err(IndexError::EmptyIndex);
        }
        if query.len() != self.dim {
            return Err(IndexError::DimensionMismatch(self.dim, query.len()));
        }
        let mut scored: Vec<(String, f64)> = self
            .entries
            .iter()
            .map(|e| (e.dataset_name.clone(), cosine_distance(query, &e.vector)))
            .collect();
        scored.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
        scored.truncate(k);
        Ok(scored)
    }
}

fn put(w: &mut impl Write, x: u32) -> io::Result<()> {
    w.write_all(&x.to_le_bytes())
}

fn get(r: &mut impl Read) -> io::Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn bad(msg: impl Into<String>) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg.into())
}

pub fn write_index(ix: &EmbeddingIndex, mut w: impl Write) -> io::Result<()> {
    w.write_all(MAGIC)?;
    put(&mut w, VERSION)?;
    put(&mut w, ix.dim as u32)?;
    put(&mut w, ix.entries.len() as u32)?;
    for e in &ix.entries {
        put(&mut w, e.dataset_name.len() as u32)?;
        w.write_all(e.dataset_name.as_bytes())?;
        put(&mut w, e.n_columns as u32)?;
        for &x in &e.vector {
            w.write_all(&(x as f32).to_le_bytes())?;
        }
    }
    w.flush()
}

pub fn read_index(mut r: impl Read) -> io::Result<EmbeddingIndex> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(bad("not an index file"));
    }
    let version = get(&mut r)?;
    if version != VERSION {
        return Err(bad(format!("unsupported index version {version}")));
    }
    let dim = get(&mut r)? as usize;
    let count = get(&mut r)? as usize;
    let mut entries = Vec::with_capacity(count);
    for _ in 0..count {
        let len = get(&mut r)? as usize;
        let mut name = vec![0u8; len];
        r.read_exact(&mut name)?;
        let dataset_name = String::from_utf8(name).map_err(|_| bad("name is not UTF-8"))?;
        let n_columns = get(&mut r)? as usize;
        let mut buf = vec![0u8; dim * 4];
        r.read_exact(&mut buf)?;
        let vector = buf
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
            .collect();
        entries.push(TableEmbedding {
            dataset_name,
            vector,
            n_columns,
        });
    }
    EmbeddingIndex::build(dim, entries).map_err(|e| bad(e.to_string()))
}
