//! Binary model file: magic `PGEN`, then little-endian u32 fields
//! `version, |V|, h, R, n_datasets`, each dataset name as `len + bytes`,
//! `n_tensors`, and each tensor as `rows, cols` followed by f32 values.

use super::model::GeneratorModel;
use super::params::{shapes, Params, Tensor, N_TENSORS};
use std::io::{self, Read, Write};

pub const MAGIC: &[u8; 4] = b"PGEN";
pub const VERSION: u32 = 1;

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

pub fn write_model(m: &GeneratorModel, mut w: impl Write) -> io::Result<()> {
    w.write_all(MAGIC)?;
    put(&mut w, VERSION)?;
    put(&mut w, m.n_types() as u32)?;
    put(&mut w, m.hidden() as u32)?;
    put(&mut w, m.rounds as u32)?;
    put(&mut w, m.datasets.len() as u32)?;
    for name in &m.datasets {
        put(&mut w, name.len() as u32)?;
        w.write_all(name.as_bytes())?;
    }
    put(&mut w, m.params.tensors.len() as u32)?;
    for t in &m.params.tensors {
        put(&mut w, t.rows as u32)?;
        put(&mut w, t.cols as u32)?;
        let mut buf = Vec::with_capacity(t.data.len() * 4);
        for &x in &t.data {
            buf.extend_from_slice(&(x as f32).to_le_bytes());
        }
        w.write_all(&buf)?;
    }
    w.flush()
}

pub fn read_model(mut r: impl Read) -> io::Result<GeneratorModel> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(bad("not a model file"));
    }
    let version = get(&mut r)?;
    if version != VERSION {
        return Err(bad(format!("unsupported model version {version}")));
    }
    let n_types = get(&mut r)? as usize;
    let h = get(&mut r)? as usize;
    let rounds = get(&mut r)? as usize;
    let n_ds = get(&mut r)? as usize;
    let mut datasets = Vec::with_capacity(n_ds);
    for _ in 0..n_ds {
        let len = get(&mut r)? as usize;
        let mut b = vec![0u8; len];
        r.read_exact(&mut b)?;
        datasets.push(String::from_utf8(b).map_err(|_| bad("dataset name is not UTF-8"))?);
    }
    let count = get(&mut r)? as usize;
    let expected = shapes(n_types, n_ds, h);
    if count != N_TENSORS {
        return Err(bad(format!("expected {N_TENSORS} tensors, found {count}")));
    }
    let mut tensors = Vec::with_capacity(count);
    for (rows_cols, name) in expected.iter().zip(super::params::TENSOR_NAMES) {
        let rows = get(&mut r)? as usize;
        let cols = get(&mut r)? as usize;
        if (rows, cols) != *rows_cols {
            return Err(bad(format!("tensor {name} has shape {rows}x{cols}, expected {rows_cols:?}")));
        }
        let mut b = vec![0u8; rows * cols * 4];
        r.read_exact(&mut b)?;
        let data: Vec<f64> = b
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
            .collect();
        tensors.push(Tensor { rows, cols, data });
    }
    let params = Params { tensors };
    if !params.all_finite() {
        return Err(bad("model contains non-finite weights"));
    }
    Ok(GeneratorModel {
        rounds,
        datasets,
        params,
    })
}

/// Rounds every weight to f32, as a save/load cycle would.
pub fn quantize(m: &mut GeneratorModel) {
    for t in &mut m.params.tensors {
        for x in &mut t.data {
            *x = *x as f32 as f64;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_f32_exact() {
        let mut m = GeneratorModel::new(6, 4, 2, vec!["b".into(), "a".into()], 3);
        let mut buf = Vec::new();
        write_model(&m, &mut buf).unwrap();
        assert_eq!(&buf[..4], b"PGEN");
        let back = read_model(buf.as_slice()).unwrap();
        quantize(&mut m);
        assert_eq!(back, m);
        assert_eq!(back.datasets, ["a", "b"]);
    }

    #[test]
    fn truncated_file_is_an_error() {
        let m = GeneratorModel::new(6, 4, 2, vec![], 3);
        let mut buf = Vec::new();
        write_model(&m, &mut buf).unwrap();
        buf.truncate(buf.len() - 3);
        assert!(read_model(buf.as_slice()).is_err());
        assert!(read_model(&b"XXXX"[..]).is_err());
    }
}
