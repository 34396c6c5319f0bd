//! Binary particle dumps: snapshot header, `u64` count, then `(x, y, vx, vy, w)`
//! as little-endian `f64` per particle.

use std::io::Write;
use std::path::Path;

use super::ParticleEnsemble;
use crate::error::Result;
use crate::fields::snapshot::{read_f64s, read_header, read_u64, write_f64s, write_header, SnapshotKind};

pub fn write_particles(path: &Path, ens: &ParticleEnsemble) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_header(&mut w, SnapshotKind::Particles)?;
    w.write_all(&(ens.len() as u64).to_le_bytes())?;
    let mut rec = Vec::with_capacity(5 * ens.len());
    for k in 0..ens.len() {
        rec.extend_from_slice(&[ens.x[k][0], ens.x[k][1], ens.v[k][0], ens.v[k][1], ens.w[k]]);
    }
    write_f64s(&mut w, &rec)?;
    w.flush()?;
    Ok(())
}

pub fn read_particles(path: &Path) -> Result<ParticleEnsemble> {
    let mut r = std::io::BufReader::new(std::fs::File::open(path)?);
    read_header(&mut r, path, SnapshotKind::Particles)?;
    let n = read_u64(&mut r)? as usize;
    let rec = read_f64s(&mut r, 5 * n)?;
    let mut ens = ParticleEnsemble::default();
    for c in rec.chunks_exact(5) {
        ens.push([c[0], c[1]], [c[2], c[3]], c[4]);
    }
    Ok(ens)
}
