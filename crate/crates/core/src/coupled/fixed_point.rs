//! The solution map `S: w -> u` of the regularised problem and its Picard iteration.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fields::interp::{deposit, mollify, stencil};
use crate::fields::viscous::gradient;
use crate::fields::{Grid, Mac, VectorField};
use crate::particles::{push_with_velocities, ParticleEnsemble, RegularizationParams};
use crate::stokes::{MemoryHistory, MemoryKernel, StokesSolver, StokesState, Viscosity};

/// Velocity fields at `t_0, ..., t_N`.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub dt: f64,
    pub fields: Vec<VectorField>,
}

impl Trajectory {
    pub fn zeros(grid: Grid, dt: f64, n_steps: usize) -> Self {
        Self { dt, fields: vec![VectorField::zeros(grid); n_steps + 1] }
    }

    pub fn n_steps(&self) -> usize {
        self.fields.len().saturating_sub(1)
    }

    /// `(sum_{n >= 1} dt ||a^n - b^n||^2)^{1/2}`.
    pub fn distance(&self, other: &Self) -> f64 {
        let s: f64 = self.fields.iter().zip(&other.fields).skip(1).map(|(a, b)| self.dt * a.sub(b).l2_norm_sq()).sum();
        s.sqrt()
    }

    /// Discrete `L2(0, T; V)` norm `(sum_{n >= 1} dt ||grad u^n||^2)^{1/2}`.
    pub fn v_norm(&self) -> f64 {
        let s: f64 = self
            .fields
            .iter()
            .skip(1)
            .map(|u| self.dt * gradient(&Mac::no_slip(u.grid), &u.data).norm_sq())
            .sum();
        s.sqrt()
    }
}

/// Data of the regularised problem.
#[derive(Clone, Debug)]
pub struct SProblem {
    pub grid: Grid,
    pub dt: f64,
    pub n_steps: usize,
    pub eps: f64,
    pub viscosity: Viscosity,
    pub memory: MemoryKernel,
    pub params: RegularizationParams,
    pub u0: VectorField,
    /// Sampled regularised initial density.
    pub particles: ParticleEnsemble,
}

/// `S(w)`: push the particles in `w * theta_lambda`, build the truncated drag from
/// it and the memory stress from `grad w`, and step the Stokes system.
pub fn apply_operator_s(problem: &SProblem, w: &Trajectory) -> Result<Trajectory> {
    let (grid, dt) = (problem.grid, problem.dt);
    if w.n_steps() != problem.n_steps || (w.dt - dt).abs() > 1e-15 {
        return Err(Error::Precondition("input trajectory does not match the time grid".into()));
    }
    let mut solver = StokesSolver::new(grid, dt, problem.viscosity.clone(), problem.memory.clone());
    let mut state = StokesState::new(problem.u0.clone())?;
    let mut ens = problem.particles.clone();
    let mut hist = MemoryHistory::new(dt, !problem.memory.is_zero());
    let mac = Mac::no_slip(grid);
    let e1 = -(-dt).exp_m1();
    let mut out = Vec::with_capacity(problem.n_steps + 1);
    out.push(state.u.clone());
    for n in 0..problem.n_steps {
        let wn = &w.fields[n];
        hist.push(gradient(&mac, &wn.data));
        let drift = mollify(wn, problem.params.radius());
        let u_at: Vec<[f64; 2]> =
            ens.x.par_iter().map(|x| Ok(stencil(&grid, *x)?.eval(&drift.data))).collect::<Result<_>>()?;
        let q: Vec<[f64; 2]> = (0..ens.len())
            .map(|k| {
                let s = -ens.w[k] * problem.params.truncation(ens.v[k]) * e1 / dt;
                [s * (u_at[k][0] - ens.v[k][0]), s * (u_at[k][1] - ens.v[k][1])]
            })
            .collect();
        let forcing = deposit(grid, &ens.x, &q)?;
        push_with_velocities(&mut ens, &grid, &u_at, problem.eps, dt)?;
        solver.step(&mut state, &hist, Some(&forcing))?;
        out.push(state.u.clone());
    }
    Ok(Trajectory { dt, fields: out })
}

#[derive(Clone, Copy, Debug)]
pub struct FixedPointOptions {
    pub tol: f64,
    pub max_iter: usize,
}

/// Per-iteration record of the Picard iteration.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FixedPointLog {
    /// `(iteration, ||w^{k+1} - w^k||, ||w^{k+1}||_V)`.
    pub rows: Vec<(usize, f64, f64)>,
    pub converged: bool,
}

impl FixedPointLog {
    pub fn residuals(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.1).collect()
    }

    pub fn monotone(&self) -> bool {
        self.rows.windows(2).all(|p| p[1].1 < p[0].1 || p[1].1 == 0.0)
    }

    /// Columns `iter,residual,energy`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("iter,residual,energy\n");
        for (k, r, e) in &self.rows {
            s.push_str(&format!("{k},{r:.17e},{e:.17e}\n"));
        }
        s
    }
}

/// Picard iteration `w <- S(w)` from `w = 0`. Non-convergence is reported in the
/// log, not as an error.
pub fn fixed_point_solve(problem: &SProblem, opts: FixedPointOptions) -> Result<(Trajectory, FixedPointLog)> {
    if !(opts.tol > 0.0) {
        return Err(Error::Precondition("fixed-point tolerance must be positive".into()));
    }
    let mut w = Trajectory::zeros(problem.grid, problem.dt, problem.n_steps);
    let mut log = FixedPointLog::default();
    for k in 1..=opts.max_iter {
        let next = apply_operator_s(problem, &w)?;
        let r = next.distance(&w);
        log.rows.push((k, r, next.v_norm()));
        w = next;
        if r <= opts.tol {
            log.converged = true;
            break;
        }
    }
    Ok((w, log))
}
