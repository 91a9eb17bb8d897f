//! Dense dumps: row-major, complex entries as interleaved `re, im`.
//!
//! Binary layout: the 8 magic bytes `TPBLKMAT`, then rows and cols as
//! little-endian `u64`, then `2·rows·cols` little-endian `f64`.

use std::io::{Read, Write};

use num_complex::Complex64;

use super::{AssemblyError, Result};
use crate::CMat;

const MAGIC: &[u8; 8] = b"TPBLKMAT";

pub fn write_binary<W: Write>(m: &CMat, mut w: W) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&(m.nrows() as u64).to_le_bytes())?;
    w.write_all(&(m.ncols() as u64).to_le_bytes())?;
    let mut buf = Vec::with_capacity(16 * m.ncols());
    for i in 0..m.nrows() {
        buf.clear();
        for j in 0..m.ncols() {
            let z = m[(i, j)];
            buf.extend_from_slice(&z.re.to_le_bytes());
            buf.extend_from_slice(&z.im.to_le_bytes());
        }
        w.write_all(&buf)?;
    }
    Ok(())
}

pub fn read_binary<R: Read>(mut r: R) -> Result<CMat> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(AssemblyError::Size("not a matrix dump (bad magic)".into()));
    }
    let mut word = [0u8; 8];
    r.read_exact(&mut word)?;
    let rows = u64::from_le_bytes(word) as usize;
    r.read_exact(&mut word)?;
    let cols = u64::from_le_bytes(word) as usize;
    let mut m = CMat::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            r.read_exact(&mut word)?;
            let re = f64::from_le_bytes(word);
            r.read_exact(&mut word)?;
            let im = f64::from_le_bytes(word);
            m[(i, j)] = Complex64::new(re, im);
        }
    }
    Ok(m)
}

/// One matrix row per line: `re_1,im_1,re_2,im_2,…`, shortest
/// round-trip float formatting.
pub fn write_csv<W: Write>(m: &CMat, mut w: W) -> Result<()> {
    let mut line = String::new();
    for i in 0..m.nrows() {
        line.clear();
        for j in 0..m.ncols() {
            if j > 0 {
                line.push(',');
            }
            let z = m[(i, j)];
            line.push_str(&format!("{:?},{:?}", z.re, z.im));
        }
        line.push('\n');
        w.write_all(line.as_bytes())?;
    }
    Ok(())
}
