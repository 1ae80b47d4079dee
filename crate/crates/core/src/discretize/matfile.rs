//! Binary matrix export.
//!
//! Layout, all little-endian:
//!
//! ```text
//! b"CAPM" | version: u32 | n: u64 | meta_len: u64 | meta: UTF-8 JSON | n*n x (re: f64, im: f64)
//! ```
//!
//! Entries are row-major.

use std::io::{self, Read, Write};

use super::OperatorMatrix;
use crate::linalg::{CMatrix, C64};

pub const MAGIC: &[u8; 4] = b"CAPM";
pub const VERSION: u32 = 1;

pub fn write_matrix<W: Write>(out: &mut W, op: &OperatorMatrix) -> io::Result<()> {
    let meta = serde_json::json!({
        "meta": op.meta,
        "grid": op.grid,
    });
    write_raw(out, &op.entries, &meta.to_string())
}

pub fn write_raw<W: Write>(out: &mut W, m: &CMatrix, meta: &str) -> io::Result<()> {
    if !m.is_square() {
        return Err(io::Error::new(io::ErrorKind::InvalidInput, "matrix must be square"));
    }
    out.write_all(MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    out.write_all(&(m.rows() as u64).to_le_bytes())?;
    out.write_all(&(meta.len() as u64).to_le_bytes())?;
    out.write_all(meta.as_bytes())?;
    let mut buf = Vec::with_capacity(16 * m.rows() * m.cols());
    for z in m.as_slice() {
        buf.extend_from_slice(&z.re.to_le_bytes());
        buf.extend_from_slice(&z.im.to_le_bytes());
    }
    out.write_all(&buf)
}

fn bad(msg: &str) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg.to_string())
}

/// Reads a matrix and its metadata string.
pub fn read_matrix<R: Read>(input: &mut R) -> io::Result<(CMatrix, String)> {
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(bad("not a CAPM file"));
    }
    let mut b4 = [0u8; 4];
    input.read_exact(&mut b4)?;
    let version = u32::from_le_bytes(b4);
    if version != VERSION {
        return Err(bad(&format!("unsupported CAPM version {version}")));
    }
    let mut b8 = [0u8; 8];
    input.read_exact(&mut b8)?;
    let n = u64::from_le_bytes(b8) as usize;
    input.read_exact(&mut b8)?;
    let meta_len = u64::from_le_bytes(b8) as usize;
    let mut meta = vec![0u8; meta_len];
    input.read_exact(&mut meta)?;
    let meta = String::from_utf8(meta).map_err(|_| bad("metadata is not UTF-8"))?;
    let count = n.checked_mul(n).ok_or_else(|| bad("dimension overflow"))?;
    let mut raw = vec![0u8; count * 16];
    input.read_exact(&mut raw)?;
    let data = raw
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().unwrap());
            let im = f64::from_le_bytes(c[8..].try_into().unwrap());
            C64::new(re, im)
        })
        .collect();
    Ok((CMatrix::from_vec(n, n, data), meta))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let m = CMatrix::from_fn(3, 3, |i, j| C64::new(i as f64 + 0.25, -(j as f64) / 3.0));
        let mut buf = Vec::new();
        write_raw(&mut buf, &m, "{\"k\":1}").unwrap();
        assert_eq!(&buf[..4], MAGIC);
        let (back, meta) = read_matrix(&mut buf.as_slice()).unwrap();
        assert_eq!(back, m);
        assert_eq!(meta, "{\"k\":1}");
    }

    #[test]
    fn rejects_foreign_files() {
        let junk = b"NOPE\x01\x00\x00\x00".to_vec();
        assert!(read_matrix(&mut junk.as_slice()).is_err());
    }
}
