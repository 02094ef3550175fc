//! Matrix file I/O.
//!
//! Binary format `SPM1`: 4 magic bytes `"SPM1"`, two little-endian u64 values
//! (rows, cols), then `rows * cols` little-endian IEEE-754 f64 values in
//! row-major order. Round-trips are bit-exact. Vectors are stored as `n x 1`
//! or `1 x n` matrices. A CSV export mirrors the same data for inspection.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::{Matrix, Vector};

const MAGIC: &[u8; 4] = b"SPM1";

pub fn write_matrix(path: impl AsRef<Path>, m: &Matrix) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&(m.nrows() as u64).to_le_bytes())?;
    w.write_all(&(m.ncols() as u64).to_le_bytes())?;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            w.write_all(&m[(i, j)].to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<Matrix> {
    let mut r = BufReader::new(File::open(&path)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)
        .map_err(|_| Error::Format("file too short for SPM1 header".into()))?;
    if &magic != MAGIC {
        return Err(Error::Format(format!(
            "bad magic bytes {:02x?}, expected \"SPM1\"",
            magic
        )));
    }
    let mut buf8 = [0u8; 8];
    r.read_exact(&mut buf8)
        .map_err(|_| Error::Format("truncated SPM1 header (rows)".into()))?;
    let rows = u64::from_le_bytes(buf8) as usize;
    r.read_exact(&mut buf8)
        .map_err(|_| Error::Format("truncated SPM1 header (cols)".into()))?;
    let cols = u64::from_le_bytes(buf8) as usize;
    let count = rows
        .checked_mul(cols)
        .ok_or_else(|| Error::Format("SPM1 dimensions overflow".into()))?;
    let mut data = Vec::with_capacity(count);
    for _ in 0..count {
        r.read_exact(&mut buf8)
            .map_err(|_| Error::Format("truncated SPM1 payload".into()))?;
        data.push(f64::from_le_bytes(buf8));
    }
    let mut trailing = [0u8; 1];
    if r.read(&mut trailing)? != 0 {
        return Err(Error::Format("trailing bytes after SPM1 payload".into()));
    }
    Ok(Matrix::from_row_slice(rows, cols, &data))
}

pub fn write_vector(path: impl AsRef<Path>, v: &Vector) -> Result<()> {
    let m = Matrix::from_column_slice(v.len(), 1, v.as_slice());
    write_matrix(path, &m)
}

pub fn read_vector(path: impl AsRef<Path>) -> Result<Vector> {
    let m = read_matrix(path)?;
    if m.nrows() != 1 && m.ncols() != 1 {
        return Err(Error::Format(format!(
            "expected a vector (1 x n or n x 1), got {} x {}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(Vector::from_iterator(m.len(), m.iter().copied()))
}

/// Plain CSV dump, one row per line. Uses the shortest round-trip float
/// formatting, so re-parsing recovers the exact values.
pub fn write_matrix_csv(path: impl AsRef<Path>, m: &Matrix) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format!("{}", m[(i, j)])).collect();
        writeln!(w, "{}", row.join(","))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    #[test]
    fn round_trip_identity_bit_exact() {
        let dir = tempdir().unwrap();
        let p = dir.path().join("i2.spm");
        let m = Matrix::identity(2, 2);
        write_matrix(&p, &m).unwrap();
        let back = read_matrix(&p).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn round_trip_rectangular() {
        let dir = tempdir().unwrap();
        let p = dir.path().join("r.spm");
        let m = Matrix::from_fn(3, 5, |i, j| (i as f64) * 0.1 + (j as f64) * 7.3 - 2.0);
        write_matrix(&p, &m).unwrap();
        assert_eq!(read_matrix(&p).unwrap(), m);
    }

    #[test]
    fn bad_magic_rejected() {
        let dir = tempdir().unwrap();
        let p = dir.path().join("bad.spm");
        std::fs::write(&p, b"NOPE\x01\x00\x00\x00\x00\x00\x00\x00\x01\x00\x00\x00\x00\x00\x00\x00").unwrap();
        assert!(matches!(read_matrix(&p), Err(Error::Format(_))));
    }

    #[test]
    fn truncated_payload_rejected() {
        let dir = tempdir().unwrap();
        let p = dir.path().join("trunc.spm");
        let mut bytes = Vec::new();
        bytes.extend_from_slice(b"SPM1");
        bytes.extend_from_slice(&2u64.to_le_bytes());
        bytes.extend_from_slice(&2u64.to_le_bytes());
        bytes.extend_from_slice(&1.0f64.to_le_bytes()); // only 1 of 4 values
        std::fs::write(&p, &bytes).unwrap();
        assert!(matches!(read_matrix(&p), Err(Error::Format(_))));
    }

    #[test]
    fn vector_round_trip() {
        let dir = tempdir().unwrap();
        let p = dir.path().join("v.spm");
        let v = Vector::from_vec(vec![1.0, -2.5, 3.25]);
        write_vector(&p, &v).unwrap();
        assert_eq!(read_vector(&p).unwrap(), v);
    }
}
