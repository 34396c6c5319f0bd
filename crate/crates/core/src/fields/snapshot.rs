//! Binary field snapshots.
//!
//! Layout (all little-endian): 8-byte magic `SVLABBIN`, `u32` version, `u32`
//! kind, then `nx` and `ny` as `u64`, then the components as row-major `f64`.
//! Scalars store `ny x nx` values; vectors store the `u` block (`ny` rows of
//! `nx + 1`) followed by the `v` block (`ny + 1` rows of `nx`).

use std::io::{Read, Write};
use std::path::Path;

use super::field::{ScalarField, VectorField};
use super::grid::Grid;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"SVLABBIN";
pub const VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u32)]
pub enum SnapshotKind {
    Scalar = 0,
    Vector = 1,
    Particles = 2,
}

pub fn write_header(w: &mut impl Write, kind: SnapshotKind) -> std::io::Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(kind as u32).to_le_bytes())
}

pub fn read_header(r: &mut impl Read, path: &Path, kind: SnapshotKind) -> Result<()> {
    let mut h = [0u8; 16];
    r.read_exact(&mut h)?;
    let bad = |message: String| Error::Format { path: path.to_path_buf(), message };
    if &h[..8] != MAGIC {
        return Err(bad("bad magic".into()));
    }
    let version = u32::from_le_bytes(h[8..12].try_into().unwrap());
    if version != VERSION {
        return Err(bad(format!("unsupported version {version}")));
    }
    let k = u32::from_le_bytes(h[12..16].try_into().unwrap());
    if k != kind as u32 {
        return Err(bad(format!("expected kind {}, found {k}", kind as u32)));
    }
    Ok(())
}

pub fn write_f64s(w: &mut impl Write, data: &[f64]) -> std::io::Result<()> {
    let mut buf = Vec::with_capacity(8 * data.len());
    for v in data {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)
}

pub fn read_f64s(r: &mut impl Read, n: usize) -> std::io::Result<Vec<f64>> {
    let mut buf = vec![0u8; 8 * n];
    r.read_exact(&mut buf)?;
    Ok(buf.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
}

pub fn read_u64(r: &mut impl Read) -> std::io::Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn write_dims(w: &mut impl Write, grid: &Grid) -> std::io::Result<()> {
    w.write_all(&(grid.nx as u64).to_le_bytes())?;
    w.write_all(&(grid.ny as u64).to_le_bytes())
}

fn read_dims(r: &mut impl Read, path: &Path, lx: f64, ly: f64) -> Result<Grid> {
    let nx = read_u64(r)? as usize;
    let ny = read_u64(r)? as usize;
    Grid::new(nx, ny, lx, ly).map_err(|e| Error::Format { path: path.to_path_buf(), message: e.to_string() })
}

pub fn write_vector_field(path: &Path, u: &VectorField) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_header(&mut w, SnapshotKind::Vector)?;
    write_dims(&mut w, &u.grid)?;
    write_f64s(&mut w, &u.data)?;
    w.flush()?;
    Ok(())
}

/// Reads a vector snapshot onto a grid with extents `lx x ly`.
pub fn read_vector_field(path: &Path, lx: f64, ly: f64) -> Result<VectorField> {
    let mut r = std::io::BufReader::new(std::fs::File::open(path)?);
    read_header(&mut r, path, SnapshotKind::Vector)?;
    let grid = read_dims(&mut r, path, lx, ly)?;
    let n = (grid.nx + 1) * grid.ny + grid.nx * (grid.ny + 1);
    Ok(VectorField { grid, data: read_f64s(&mut r, n)? })
}

pub fn write_scalar_field(path: &Path, p: &ScalarField) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_header(&mut w, SnapshotKind::Scalar)?;
    write_dims(&mut w, &p.grid)?;
    write_f64s(&mut w, &p.data)?;
    w.flush()?;
    Ok(())
}

pub fn read_scalar_field(path: &Path, lx: f64, ly: f64) -> Result<ScalarField> {
    let mut r = std::io::BufReader::new(std::fs::File::open(path)?);
    read_header(&mut r, path, SnapshotKind::Scalar)?;
    let grid = read_dims(&mut r, path, lx, ly)?;
    Ok(ScalarField { grid, data: read_f64s(&mut r, grid.n_cells())? })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bad_magic_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.bin");
        std::fs::write(&p, [0u8; 40]).unwrap();
        assert!(matches!(read_vector_field(&p, 1.0, 1.0), Err(Error::Format { .. })));
    }

    #[test]
    fn scalar_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("p.bin");
        let g = Grid::new(5, 4, 1.0, 1.0).unwrap();
        let f = ScalarField::from_fn(g, |x| x[0] - 3.0 * x[1]);
        write_scalar_field(&p, &f).unwrap();
        assert_eq!(read_scalar_field(&p, 1.0, 1.0).unwrap(), f);
        assert_eq!(std::fs::metadata(&p).unwrap().len(), 16 + 16 + 8 * 20);
    }
}
