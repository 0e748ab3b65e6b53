//! Fixed binary snapshot layout:
//!
//! ```text
//! b"LAMENS01" | dim u32 | n u32 | ncomp u32 | t f64 | mu f64 | lambda f64 | samples f64...
//! ```
//!
//! All numbers little-endian. Samples are physical-space values, one
//! component after another, axis 0 fastest.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::spectral::{Grid, VectorField};

pub const MAGIC: &[u8; 8] = b"LAMENS01";
const HEADER_LEN: usize = 8 + 3 * 4 + 3 * 8;

#[derive(Debug, Clone)]
pub struct SnapshotData {
    pub field: VectorField,
    pub t: f64,
    pub mu: f64,
    /// `+∞` for incompressible runs.
    pub lambda: f64,
}

pub fn encode_snapshot(u: &VectorField, t: f64, mu: f64, lambda: f64) -> Vec<u8> {
    let g = u.grid();
    let mut out = Vec::with_capacity(HEADER_LEN + u.dim() * g.len() * 8);
    out.extend_from_slice(MAGIC);
    for v in [g.dim() as u32, g.n() as u32, u.dim() as u32] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for v in [t, mu, lambda] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for c in u.components() {
        for v in c.physical() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

pub fn write_snapshot(u: &VectorField, t: f64, mu: f64, lambda: f64, path: &Path) -> Result<()> {
    fs::write(path, encode_snapshot(u, t, mu, lambda)).map_err(|e| Error::io(path, e))
}

fn u32_at(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(b[at..at + 4].try_into().unwrap())
}

fn f64_at(b: &[u8], at: usize) -> f64 {
    f64::from_le_bytes(b[at..at + 8].try_into().unwrap())
}

pub fn decode_snapshot(bytes: &[u8], path: &Path, expect: Option<&Grid>) -> Result<SnapshotData> {
    if bytes.len() < MAGIC.len() || &bytes[..MAGIC.len()] != MAGIC {
        return Err(Error::BadMagic { path: path.into() });
    }
    if bytes.len() < HEADER_LEN {
        return Err(Error::TruncatedPayload {
            path: path.into(),
            expected: HEADER_LEN,
            found: bytes.len(),
        });
    }
    let (dim, n, ncomp) = (u32_at(bytes, 8) as usize, u32_at(bytes, 12) as usize, u32_at(bytes, 16) as usize);
    let (t, mu, lambda) = (f64_at(bytes, 20), f64_at(bytes, 28), f64_at(bytes, 36));
    if ncomp != dim {
        return Err(Error::DimensionMismatch(format!(
            "{ncomp} components stored for a {dim}-dimensional grid"
        )));
    }
    if let Some(g) = expect {
        if g.dim() != dim || g.n() != n {
            return Err(Error::DimensionMismatch(format!(
                "snapshot is {dim}D with N = {n}, current grid is {}D with N = {}",
                g.dim(),
                g.n()
            )));
        }
    }
    let grid = match expect {
        Some(g) => g.clone(),
        None => Grid::new(dim, n)?,
    };
    let len = grid.len();
    let expected = ncomp * len * 8;
    let payload = &bytes[HEADER_LEN..];
    if payload.len() != expected {
        return Err(Error::TruncatedPayload {
            path: path.into(),
            expected,
            found: payload.len(),
        });
    }
    let comps: Vec<Vec<f64>> = payload
        .chunks_exact(len * 8)
        .map(|c| c.chunks_exact(8).map(|b| f64::from_le_bytes(b.try_into().unwrap())).collect())
        .collect();
    Ok(SnapshotData {
        field: VectorField::from_physical(&grid, comps)?,
        t,
        mu,
        lambda,
    })
}

/// Read a snapshot, optionally checking it against the grid in use.
pub fn read_snapshot(path: &Path, expect: Option<&Grid>) -> Result<SnapshotData> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_snapshot(&bytes, path, expect)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(g: &Grid) -> VectorField {
        VectorField::from_fn(g, |x| [x[0].sin() * 1.0e-3 + 0.1, (x[1] * 3.0).cos(), x[0] * x[1]])
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.bin");
        let g = Grid::new(3, 8).unwrap();
        let u = field(&g);
        write_snapshot(&u, 0.125, 0.1, 1e4, &p).unwrap();
        let back = read_snapshot(&p, Some(&g)).unwrap();
        assert_eq!(back.t.to_bits(), 0.125f64.to_bits());
        assert_eq!(back.lambda, 1e4);
        for (a, b) in u.components().iter().zip(back.field.components()) {
            assert!(a.physical().iter().zip(b.physical()).all(|(x, y)| x.to_bits() == y.to_bits()));
        }
        assert_eq!(fs::read(&p).unwrap(), encode_snapshot(&back.field, 0.125, 0.1, 1e4));
    }

    #[test]
    fn corrupt_files() {
        let g = Grid::new(2, 8).unwrap();
        let bytes = encode_snapshot(&field(&g), 1.0, 1.0, 0.0);
        let p = Path::new("mem");
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(decode_snapshot(&bad, p, None), Err(Error::BadMagic { .. })));
        assert!(matches!(
            decode_snapshot(&bytes[..bytes.len() - 8], p, None),
            Err(Error::TruncatedPayload { .. })
        ));
        assert!(matches!(decode_snapshot(&bytes[..30], p, None), Err(Error::TruncatedPayload { .. })));
        let other = Grid::new(2, 16).unwrap();
        assert!(matches!(decode_snapshot(&bytes, p, Some(&other)), Err(Error::DimensionMismatch(_))));
    }
}
