//! Run directories: every artifact goes through [`OutputDir`], which records
//! it in `manifest.txt` with its SHA-256 checksum.

use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use super::config::RunConfig;
use crate::error::{Error, Result};
use crate::fields::snapshot::{write_scalar_field, write_vector_field};
use crate::fields::{ScalarField, VectorField};
use crate::particles::io::write_particles;
use crate::particles::ParticleEnsemble;

pub const MANIFEST: &str = "manifest.txt";

#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    config_hash: String,
    entries: Vec<(String, String, u64)>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl OutputDir {
    /// Creates the directory and writes `config.txt`.
    pub fn create(root: &Path, cfg: &RunConfig) -> Result<Self> {
        std::fs::create_dir_all(root)?;
        let text = cfg.serialize();
        let mut out = Self { root: root.to_path_buf(), config_hash: sha256_hex(text.as_bytes()), entries: Vec::new() };
        out.write_text("config.txt", &text)?;
        Ok(out)
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn config_hash(&self) -> &str {
        &self.config_hash
    }

    fn path_for(&self, name: &str) -> Result<PathBuf> {
        if name.is_empty() || name.contains("..") || Path::new(name).is_absolute() || name == MANIFEST {
            return Err(Error::Validation(format!("invalid artifact name `{name}`")));
        }
        let p = self.root.join(name);
        if let Some(parent) = p.parent() {
            std::fs::create_dir_all(parent)?;
        }
        Ok(p)
    }

    fn record(&mut self, name: &str) -> Result<()> {
        let bytes = std::fs::read(self.root.join(name))?;
        let entry = (name.to_string(), sha256_hex(&bytes), bytes.len() as u64);
        match self.entries.iter_mut().find(|e| e.0 == name) {
            Some(e) => *e = entry,
            None => self.entries.push(entry),
        }
        self.write_manifest()
    }

    pub fn write_text(&mut self, name: &str, text: &str) -> Result<()> {
        std::fs::write(self.path_for(name)?, text)?;
        self.record(name)
    }

    /// Comma-separated rows under a header line; floats in shortest round-trip form.
    pub fn write_csv(&mut self, name: &str, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
        self.write_text(name, &csv(header, rows))
    }

    pub fn write_velocity(&mut self, name: &str, u: &VectorField) -> Result<()> {
        write_vector_field(&self.path_for(name)?, u)?;
        self.record(name)
    }

    pub fn write_scalar(&mut self, name: &str, p: &ScalarField) -> Result<()> {
        write_scalar_field(&self.path_for(name)?, p)?;
        self.record(name)
    }

    pub fn write_particles(&mut self, name: &str, ens: &ParticleEnsemble) -> Result<()> {
        write_particles(&self.path_for(name)?, ens)?;
        self.record(name)
    }

    /// Listed artifacts as `(name, sha256, bytes)`.
    pub fn entries(&self) -> &[(String, String, u64)] {
        &self.entries
    }

    fn write_manifest(&self) -> Result<()> {
        let mut s = format!("config_sha256 {}\n", self.config_hash);
        for (name, sum, len) in &self.entries {
            s.push_str(&format!("{sum} {len} {name}\n"));
        }
        std::fs::write(self.root.join(MANIFEST), s)?;
        Ok(())
    }
}

pub fn csv(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for r in rows {
        let cells: Vec<String> = r.iter().map(|v| format!("{v:?}")).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

/// Re-hashes every manifest entry; returns the names whose checksum no longer matches.
pub fn verify_manifest(root: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(root.join(MANIFEST))?;
    let mut bad = Vec::new();
    for line in text.lines().skip(1) {
        let mut it = line.splitn(3, ' ');
        let (Some(sum), Some(_), Some(name)) = (it.next(), it.next(), it.next()) else {
            return Err(Error::Format { path: root.join(MANIFEST), message: format!("bad line `{line}`") });
        };
        match std::fs::read(root.join(name)) {
            Ok(bytes) if sha256_hex(&bytes) == sum => {}
            _ => bad.push(name.to_string()),
        }
    }
    Ok(bad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::Grid;

    #[test]
    fn manifest_lists_every_artifact() {
        let dir = std::env::temp_dir().join(format!("svlab-out-{}", std::process::id()));
        let cfg = super::super::scenario::preset("constant").unwrap();
        let mut out = OutputDir::create(&dir, &cfg).unwrap();
        out.write_csv("series/energy.csv", &["t", "e"], &[vec![0.0, 1.5], vec![0.1, 1.25]]).unwrap();
        out.write_velocity("u.bin", &VectorField::zeros(Grid::unit(4).unwrap())).unwrap();
        let names: Vec<&str> = out.entries().iter().map(|e| e.0.as_str()).collect();
        assert_eq!(names, ["config.txt", "series/energy.csv", "u.bin"]);
        assert!(verify_manifest(&dir).unwrap().is_empty());
        std::fs::write(dir.join("u.bin"), b"tampered").unwrap();
        assert_eq!(verify_manifest(&dir).unwrap(), vec!["u.bin".to_string()]);
        assert!(out.write_text("../escape", "x").is_err());
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn csv_round_trips_floats() {
        let s = csv(&["a"], &[vec![0.1 + 0.2]]);
        let v: f64 = s.lines().nth(1).unwrap().parse().unwrap();
        assert_eq!(v, 0.1 + 0.2);
    }
}
