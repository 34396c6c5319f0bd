//! Flat `key = value` run configuration.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::fields::{check_eps, Grid, GridSpec};

pub const REQUIRED_KEYS: [&str; 10] =
    ["scenario", "nx", "ny", "dt", "t_final", "eps", "coeff_a0", "coeff_a1", "initial_data", "out_dir"];

const OPTIONAL_KEYS: [&str; 12] = [
    "lx",
    "ly",
    "vmax",
    "lambda",
    "snapshot_stride",
    "lattice_x",
    "lattice_v",
    "ny_cell",
    "coarse_n",
    "solver_tol",
    "workers",
    "mass",
];

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub scenario: String,
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
    pub dt: f64,
    pub t_final: f64,
    /// Strictly decreasing reciprocals of integers.
    pub eps: Vec<f64>,
    pub coeff_a0: String,
    pub coeff_a1: String,
    pub initial_data: String,
    pub vmax: f64,
    /// `0` runs the original system; positive values regularise.
    pub lambda: f64,
    /// `0` disables snapshots.
    pub snapshot_stride: usize,
    pub lattice_x: usize,
    pub lattice_v: usize,
    pub ny_cell: usize,
    /// Grid used to compare fields in the convergence study.
    pub coarse_n: usize,
    pub solver_tol: f64,
    pub workers: Option<usize>,
    /// Peak density of the particle cloud.
    pub mass: f64,
    pub out_dir: PathBuf,
}

impl RunConfig {
    /// Configuration with every optional key at its default.
    pub fn with_defaults(scenario: &str, n: usize, dt: f64, t_final: f64, eps: Vec<f64>) -> Self {
        Self {
            scenario: scenario.into(),
            nx: n,
            ny: n,
            lx: 1.0,
            ly: 1.0,
            dt,
            t_final,
            eps,
            coeff_a0: "constant:1".into(),
            coeff_a1: "zero".into(),
            initial_data: "vortex".into(),
            vmax: 4.0,
            lambda: 0.0,
            snapshot_stride: 0,
            lattice_x: 32,
            lattice_v: 32,
            ny_cell: 64,
            coarse_n: 32,
            solver_tol: 1e-10,
            workers: None,
            mass: 1.0,
            out_dir: PathBuf::from("out"),
        }
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.nx, self.ny, self.lx, self.ly)
    }

    /// Grid spec of the run at `eps[k]`.
    pub fn grid_spec(&self, k: usize) -> Result<GridSpec> {
        GridSpec::new(self.grid()?, self.dt, self.t_final, self.eps[k])
    }

    pub fn n_steps(&self) -> usize {
        (self.t_final / self.dt).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        self.grid().map_err(|e| Error::Validation(e.to_string()))?;
        if !(self.dt > 0.0 && self.t_final >= self.dt) {
            return Err(Error::Validation(format!("need 0 < dt <= t_final, got dt = {}, t_final = {}", self.dt, self.t_final)));
        }
        let steps = self.t_final / self.dt;
        if (steps - steps.round()).abs() > 1e-9 * steps {
            return Err(Error::Validation("t_final must be an integer multiple of dt".into()));
        }
        if self.eps.is_empty() {
            return Err(Error::Validation("eps list is empty".into()));
        }
        for &e in &self.eps {
            check_eps(e).map_err(|m| Error::Validation(format!("{m} (each eps must be the reciprocal of an integer)")))?;
            if self.nx as f64 * e < 8.0 - 1e-9 || self.ny as f64 * e < 8.0 - 1e-9 {
                return Err(Error::Validation(format!("eps = {e} violates the resolution constraint nx*eps >= 8")));
            }
        }
        if self.eps.windows(2).any(|p| p[1] >= p[0]) {
            return Err(Error::Validation("eps list must be strictly decreasing".into()));
        }
        if !(self.vmax > 0.0) || !(self.lambda >= 0.0 && self.lambda <= 1.0) {
            return Err(Error::Validation("need vmax > 0 and 0 <= lambda <= 1".into()));
        }
        if self.lattice_x < 2 || self.lattice_v < 2 || self.ny_cell < 4 || self.coarse_n < 4 {
            return Err(Error::Validation("lattice sizes must be >= 2 and ny_cell, coarse_n >= 4".into()));
        }
        if !self.nx.is_multiple_of(self.coarse_n) || !self.ny.is_multiple_of(self.coarse_n) {
            return Err(Error::Validation(format!("coarse_n = {} must divide nx and ny", self.coarse_n)));
        }
        if !(self.solver_tol > 0.0 && self.solver_tol < 1.0) || !(self.mass >= 0.0) {
            return Err(Error::Validation("need 0 < solver_tol < 1 and mass >= 0".into()));
        }
        if self.workers == Some(0) {
            return Err(Error::Validation("workers must be positive".into()));
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::with_defaults("", 0, 0.0, 0.0, Vec::new());
        let mut seen: Vec<&str> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| Error::Parse { line, message: format!("expected `key = value`, got `{content}`") })?;
            let (key, value) = (key.trim(), value.trim());
            let known = REQUIRED_KEYS.iter().chain(OPTIONAL_KEYS.iter()).find(|k| **k == key);
            let Some(known) = known else {
                return Err(Error::Parse { line, message: format!("unknown key `{key}`") });
            };
            if seen.contains(known) {
                return Err(Error::Parse { line, message: format!("duplicate key `{key}`") });
            }
            seen.push(known);
            cfg.set(key, value).map_err(|message| Error::Parse { line, message })?;
        }
        let missing: Vec<String> = REQUIRED_KEYS.iter().filter(|k| !seen.contains(k)).map(|k| k.to_string()).collect();
        if !missing.is_empty() {
            return Err(Error::MissingKeys(missing));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        fn num<T: std::str::FromStr>(key: &str, v: &str) -> std::result::Result<T, String> {
            v.parse().map_err(|_| format!("`{key}` expects a number, got `{v}`"))
        }
        match key {
            "scenario" => self.scenario = value.into(),
            "nx" => self.nx = num(key, value)?,
            "ny" => self.ny = num(key, value)?,
            "lx" => self.lx = num(key, value)?,
            "ly" => self.ly = num(key, value)?,
            "dt" => self.dt = parse_real(value)?,
            "t_final" => self.t_final = parse_real(value)?,
            "eps" => self.eps = value.split(',').map(|s| parse_real(s.trim())).collect::<std::result::Result<_, _>>()?,
            "coeff_a0" => self.coeff_a0 = value.into(),
            "coeff_a1" => self.coeff_a1 = value.into(),
            "initial_data" => self.initial_data = value.into(),
            "vmax" => self.vmax = num(key, value)?,
            "lambda" => self.lambda = num(key, value)?,
            "snapshot_stride" => self.snapshot_stride = num(key, value)?,
            "lattice_x" => self.lattice_x = num(key, value)?,
            "lattice_v" => self.lattice_v = num(key, value)?,
            "ny_cell" => self.ny_cell = num(key, value)?,
            "coarse_n" => self.coarse_n = num(key, value)?,
            "solver_tol" => self.solver_tol = num(key, value)?,
            "workers" => self.workers = Some(num(key, value)?),
            "mass" => self.mass = num(key, value)?,
            "out_dir" => self.out_dir = PathBuf::from(value),
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Text form that parses back to an identical configuration.
    pub fn serialize(&self) -> String {
        let mut s = String::new();
        let eps: Vec<String> = self.eps.iter().map(|e| format_real(*e)).collect();
        let _ = writeln!(s, "scenario = {}", self.scenario);
        let _ = writeln!(s, "nx = {}", self.nx);
        let _ = writeln!(s, "ny = {}", self.ny);
        let _ = writeln!(s, "lx = {:?}", self.lx);
        let _ = writeln!(s, "ly = {:?}", self.ly);
        let _ = writeln!(s, "dt = {}", format_real(self.dt));
        let _ = writeln!(s, "t_final = {}", format_real(self.t_final));
        let _ = writeln!(s, "eps = {}", eps.join(", "));
        let _ = writeln!(s, "coeff_a0 = {}", self.coeff_a0);
        let _ = writeln!(s, "coeff_a1 = {}", self.coeff_a1);
        let _ = writeln!(s, "initial_data = {}", self.initial_data);
        let _ = writeln!(s, "vmax = {:?}", self.vmax);
        let _ = writeln!(s, "lambda = {:?}", self.lambda);
        let _ = writeln!(s, "snapshot_stride = {}", self.snapshot_stride);
        let _ = writeln!(s, "lattice_x = {}", self.lattice_x);
        let _ = writeln!(s, "lattice_v = {}", self.lattice_v);
        let _ = writeln!(s, "ny_cell = {}", self.ny_cell);
        let _ = writeln!(s, "coarse_n = {}", self.coarse_n);
        let _ = writeln!(s, "solver_tol = {:?}", self.solver_tol);
        if let Some(w) = self.workers {
            let _ = writeln!(s, "workers = {w}");
        }
        let _ = writeln!(s, "mass = {:?}", self.mass);
        let _ = writeln!(s, "out_dir = {}", self.out_dir.display());
        s
    }
}

/// Decimal or `p/q`.
fn parse_real(s: &str) -> std::result::Result<f64, String> {
    let bad = || format!("expected a number or a fraction `p/q`, got `{s}`");
    match s.split_once('/') {
        Some((p, q)) => {
            let p: f64 = p.trim().parse().map_err(|_| bad())?;
            let q: f64 = q.trim().parse().map_err(|_| bad())?;
            Ok(p / q)
        }
        None => s.parse().map_err(|_| bad()),
    }
}

/// `1/k` when that reproduces the value exactly, else the shortest decimal.
fn format_real(x: f64) -> String {
    if x > 0.0 && x < 1.0 {
        let k = (1.0 / x).round();
        if k < 1e9 && 1.0 / k == x {
            return format!("1/{}", k as u64);
        }
    }
    format!("{x:?}")
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
# a comment
scenario = sinusoidal-A0
nx = 64   # trailing comment
ny = 64
dt = 1/100
t_final = 0.5
eps = 1/4, 1/8
coeff_a0 = sinusoidal:0.1
coeff_a1 = zero
initial_data = coupled-cloud
out_dir = runs/a
";

    #[test]
    fn parses_sample() {
        let c = RunConfig::parse(SAMPLE).unwrap();
        assert_eq!(c.nx, 64);
        assert_eq!(c.eps, vec![0.25, 0.125]);
        assert_eq!(c.dt, 0.01);
        assert_eq!(c.ny_cell, 64);
    }

    #[test]
    fn empty_file_lists_every_required_key() {
        match RunConfig::parse("") {
            Err(Error::MissingKeys(k)) => assert_eq!(k, REQUIRED_KEYS.map(String::from).to_vec()),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn round_trip() {
        let c = RunConfig::parse(SAMPLE).unwrap();
        let again = RunConfig::parse(&c.serialize()).unwrap();
        assert_eq!(c, again);
    }

    #[test]
    fn rejects_non_reciprocal_eps() {
        let text = SAMPLE.replace("eps = 1/4, 1/8", "eps = 0.3");
        match RunConfig::parse(&text) {
            Err(Error::Validation(m)) => assert!(m.contains("reciprocal of an integer"), "{m}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_key_reports_line() {
        let text = format!("{SAMPLE}colour = blue\n");
        match RunConfig::parse(&text) {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 12);
                assert!(message.contains("colour"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn resolution_and_ordering_constraints() {
        let text = SAMPLE.replace("eps = 1/4, 1/8", "eps = 1/16");
        assert!(RunConfig::parse(&text).is_err());
        let text = SAMPLE.replace("eps = 1/4, 1/8", "eps = 1/8, 1/4");
        assert!(RunConfig::parse(&text).is_err());
    }
}
