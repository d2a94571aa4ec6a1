//! Binary matrix files: the magic `GMDS1`, then rows, cols and element kind
//! (1 = f64) as little-endian u64, then the row-major little-endian payload.

use std::io::{Read, Write};
use std::path::Path;

use faer::{Mat, MatRef};

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 5] = b"GMDS1";
pub const KIND_F64: u64 = 1;
const HEADER_LEN: usize = 5 + 3 * 8;

pub fn encode(m: MatRef<'_, f64>) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * m.nrows() * m.ncols());
    out.extend_from_slice(MAGIC);
    for v in [m.nrows() as u64, m.ncols() as u64, KIND_F64] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.extend_from_slice(&m[(i, j)].to_le_bytes());
        }
    }
    out
}

pub fn decode(bytes: &[u8]) -> Result<Mat<f64>> {
    if bytes.len() < HEADER_LEN || &bytes[..5] != MAGIC {
        return Err(Error::MatrixFormat("missing GMDS1 header".into()));
    }
    let word = |k: usize| {
        let start = 5 + 8 * k;
        u64::from_le_bytes(bytes[start..start + 8].try_into().unwrap())
    };
    let (rows, cols, kind) = (word(0), word(1), word(2));
    if kind != KIND_F64 {
        return Err(Error::MatrixFormat(format!(
            "unsupported element kind {kind}"
        )));
    }
    let count = rows
        .checked_mul(cols)
        .and_then(|c| c.checked_mul(8))
        .ok_or_else(|| Error::MatrixFormat("dimensions overflow".into()))?;
    if (bytes.len() - HEADER_LEN) as u64 != count {
        return Err(Error::MatrixFormat(format!(
            "payload of {} bytes does not match {rows}x{cols}",
            bytes.len() - HEADER_LEN
        )));
    }
    let (rows, cols) = (rows as usize, cols as usize);
    let payload = &bytes[HEADER_LEN..];
    Ok(Mat::from_fn(rows, cols, |i, j| {
        let k = 8 * (i * cols + j);
        f64::from_le_bytes(payload[k..k + 8].try_into().unwrap())
    }))
}

pub fn write_matrix(w: &mut impl Write, m: MatRef<'_, f64>) -> std::io::Result<()> {
    w.write_all(&encode(m))
}

pub fn read_matrix(r: &mut impl Read) -> Result<Mat<f64>> {
    let mut buf = Vec::new();
    r.read_to_end(&mut buf)
        .map_err(|e| Error::MatrixFormat(e.to_string()))?;
    decode(&buf)
}

pub fn load(path: &Path) -> Result<Mat<f64>> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes)
}
