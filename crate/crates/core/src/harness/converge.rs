//! Refinement study in `eps`: fine-scale runs against the homogenized run,
//! compared on a common coarse grid.

use std::time::Instant;

use rayon::prelude::*;

use super::config::RunConfig;
use super::output::OutputDir;
use super::run::{coefficients, fine_run};
use super::scenario::{initial_data, sample_particles};
use crate::error::{Error, Result};
use crate::fields::interp::deposit_density;
use crate::fields::viscous::Tensor4;
use crate::fields::{Grid, ScalarField, VectorField};
use crate::homogenization::{CellProblemSpec, Corrector, EffectiveTensors};
use crate::homogenized::{corrector_reconstruction, HomogenizedRun};
use crate::particles::ParticleEnsemble;

pub const TABLE_HEADER: [&str; 5] = ["eps", "plain_error", "corrected_error", "moment_gap", "runtime_s"];

/// Averages the fine faces lying on each coarse face; the coarse field is
/// divergence free whenever the fine one is.
pub fn restrict_velocity(u: &VectorField, coarse: Grid) -> Result<VectorField> {
    let f = u.grid;
    if !f.nx.is_multiple_of(coarse.nx) || !f.ny.is_multiple_of(coarse.ny) || f.nx / coarse.nx != f.ny / coarse.ny {
        return Err(Error::Grid(format!("{}x{} does not refine {}x{} uniformly", f.nx, f.ny, coarse.nx, coarse.ny)));
    }
    let r = f.nx / coarse.nx;
    let inv = 1.0 / r as f64;
    let mut out = VectorField::zeros(coarse);
    let cm = out.mac();
    let fm = u.mac();
    for j in 0..coarse.ny {
        for i in 0..=coarse.nx {
            let s: f64 = (0..r).map(|k| u.data[fm.u_idx(r * i, r * j + k)]).sum();
            out.data[cm.u_idx(i, j)] = s * inv;
        }
    }
    for j in 0..=coarse.ny {
        for i in 0..coarse.nx {
            let s: f64 = (0..r).map(|k| u.data[fm.v_idx(r * i + k, r * j)]).sum();
            out.data[cm.v_idx(i, j)] = s * inv;
        }
    }
    Ok(out)
}

fn scalar_diff_sq(a: &ScalarField, b: &ScalarField) -> f64 {
    a.data.iter().zip(&b.data).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() * a.grid.cell_area()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub eps: f64,
    /// `||u_eps - u_0||` in `L2(Q)` on the coarse grid.
    pub plain_error: f64,
    /// Same against the first-order corrector reconstruction.
    pub corrected_error: f64,
    /// `||int f_eps dv - int f dv||` in `L2(Q)` on the coarse grid.
    pub moment_gap: f64,
    pub runtime_s: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
    pub c0: Tensor4,
    pub homogenized_runtime_s: f64,
}

impl ConvergenceTable {
    pub fn to_csv(&self) -> String {
        super::output::csv(&TABLE_HEADER, &self.csv_rows())
    }

    fn csv_rows(&self) -> Vec<Vec<f64>> {
        self.rows.iter().map(|r| vec![r.eps, r.plain_error, r.corrected_error, r.moment_gap, r.runtime_s]).collect()
    }

    pub fn plain_errors(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.plain_error).collect()
    }

    pub fn moment_gaps(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.moment_gap).collect()
    }
}

/// Fields of the homogenized run at every step.
struct Reference {
    fine: Vec<VectorField>,
    coarse: Vec<VectorField>,
    density: Vec<ScalarField>,
}

fn reference_run(
    u0: VectorField,
    particles: ParticleEnsemble,
    tensors: EffectiveTensors,
    n_steps: usize,
    coarse: Grid,
) -> Result<Reference> {
    let dt = tensors.dt;
    let mut run = HomogenizedRun::new(u0, particles, tensors, dt)?;
    let mut r = Reference { fine: Vec::new(), coarse: Vec::new(), density: Vec::new() };
    for _ in 0..n_steps {
        run.step()?;
        let u = run.fluid().u.clone();
        r.coarse.push(restrict_velocity(&u, coarse)?);
        r.fine.push(u);
        let p = run.particles();
        r.density.push(deposit_density(coarse, &p.x, &p.w)?);
    }
    Ok(r)
}

fn fine_row(
    cfg: &RunConfig,
    eps: f64,
    u0: &VectorField,
    particles: &ParticleEnsemble,
    reference: &Reference,
    corr: &Corrector,
    coarse: Grid,
) -> Result<ConvergenceRow> {
    let start = Instant::now();
    let (a0, a1) = coefficients(cfg)?;
    let mut run = fine_run(cfg, eps, &a0, &a1, u0.clone(), particles.clone())?;
    let dt = cfg.dt;
    let (mut plain, mut corrected, mut gap) = (0.0, 0.0, 0.0);
    for n in 0..cfg.n_steps() {
        run.step()?;
        let ue = restrict_velocity(&run.state.fluid.u, coarse)?;
        plain += dt * ue.sub(&reference.coarse[n]).l2_norm_sq();
        let rec = restrict_velocity(&corrector_reconstruction(&reference.fine[n], corr, eps), coarse)?;
        corrected += dt * ue.sub(&rec).l2_norm_sq();
        let p = &run.state.particles;
        gap += dt * scalar_diff_sq(&deposit_density(coarse, &p.x, &p.w)?, &reference.density[n]);
    }
    Ok(ConvergenceRow {
        eps,
        plain_error: plain.sqrt(),
        corrected_error: corrected.sqrt(),
        moment_gap: gap.sqrt(),
        runtime_s: start.elapsed().as_secs_f64(),
    })
}

/// Effective tensors, one homogenized run, then one fine run per `eps`
/// (in parallel). Rows of the runs that finished are written even when another fails.
pub fn run_convergence_study(cfg: &RunConfig, out: Option<&mut OutputDir>) -> Result<ConvergenceTable> {
    cfg.validate()?;
    let grid = cfg.grid()?;
    let coarse = Grid::new(cfg.coarse_n, cfg.coarse_n, cfg.lx, cfg.ly)?;
    let (a0, a1) = coefficients(cfg)?;
    let mut spec = CellProblemSpec::new(a0, a1, cfg.ny_cell)?;
    spec.tol = spec.tol.min(cfg.solver_tol);
    let start = Instant::now();
    let (tensors, corr) = EffectiveTensors::compute(&spec, cfg.dt, cfg.n_steps())?;
    let (u0, f0) = initial_data(&cfg.initial_data, grid, cfg.mass)?;
    let particles = sample_particles(cfg, grid, &f0)?;
    let c0 = tensors.c0;
    let reference = reference_run(u0.clone(), particles.clone(), tensors, cfg.n_steps(), coarse)?;
    let homogenized_runtime_s = start.elapsed().as_secs_f64();

    let results: Vec<Result<ConvergenceRow>> =
        cfg.eps.par_iter().map(|&eps| fine_row(cfg, eps, &u0, &particles, &reference, &corr, coarse)).collect();
    let mut rows = Vec::new();
    let mut first_err = None;
    for r in results {
        match r {
            Ok(row) => rows.push(row),
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    let table = ConvergenceTable { rows, c0, homogenized_runtime_s };
    if let Some(out) = out {
        out.write_text("convergence.csv", &table.to_csv())?;
    }
    match first_err {
        Some(e) => Err(e),
        None => Ok(table),
    }
}
