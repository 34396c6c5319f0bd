//! Interleaved particle and fluid stepping for the full fine-scale problem,
//! with the energy, mass and drag ledgers.

mod fixed_point;
mod weak;

pub use fixed_point::{apply_operator_s, fixed_point_solve, FixedPointLog, FixedPointOptions, SProblem, Trajectory};
pub use weak::{TestFunction, WeakFormResidual};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fields::interp::{deposit, mollify, stencil};
use crate::fields::{Grid, VectorField};
use crate::particles::{push_with_velocities, ParticleEnsemble, PushReport, RegularizationParams};
use crate::stokes::{MemoryHistory, StepReport, StokesSolver, StokesState};

/// Fluid, particles and the fluid-gradient history at one time.
#[derive(Clone, Debug)]
pub struct CoupledState {
    pub fluid: StokesState,
    pub particles: ParticleEnsemble,
    pub hist: MemoryHistory,
    pub eps: f64,
    /// `None` runs the original system; `Some` mollifies the drift and truncates the drag.
    pub params: Option<RegularizationParams>,
}

impl CoupledState {
    pub fn new(
        fluid: StokesState,
        particles: ParticleEnsemble,
        dt: f64,
        eps: f64,
        params: Option<RegularizationParams>,
        retain_history: bool,
    ) -> Result<Self> {
        if !particles.all_inside(&fluid.u.grid) {
            return Err(Error::Precondition("particles outside the domain".into()));
        }
        if particles.min_weight() < 0.0 {
            return Err(Error::Precondition("negative particle weight".into()));
        }
        let mut hist = MemoryHistory::new(dt, retain_history);
        hist.push(fluid.gradient());
        Ok(Self { fluid, particles, hist, eps, params })
    }

    pub fn t(&self) -> f64 {
        self.fluid.t
    }
}

/// Cumulative ledger quantities; all entries are nonnegative.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EnergyReport {
    pub t: f64,
    /// `1/2 ||u||^2`.
    pub fluid_ke: f64,
    /// `1/2 sum w |v|^2`.
    pub particle_ke: f64,
    pub mass: f64,
    pub second_moment: f64,
    /// `int_0^t sum w |U - v|^2`, exact for the frozen-velocity relaxation.
    pub drag_dissipation_cum: f64,
    /// `int_0^t ||grad u||^2`.
    pub viscous_dissipation_cum: f64,
    /// `int_0^t sum w |U - v|`, an upper bound for the `L1(Q)` norm of the drag density.
    pub drag_l1_cum: f64,
    /// Right-hand side of the `L1` drag bound.
    pub drag_l1_bound: f64,
    /// Young-inequality bound on the work of the memory stress.
    pub memory_credit: f64,
}

impl EnergyReport {
    /// `int (1 + |v|^2) f + ||u||^2`.
    pub fn energy(&self) -> f64 {
        self.mass + self.second_moment + 2.0 * self.fluid_ke
    }

    /// `E(t) + 2 DragDiss + alpha ViscDiss`.
    pub fn dissipated_total(&self, alpha: f64) -> f64 {
        self.energy() + 2.0 * self.drag_dissipation_cum + alpha * self.viscous_dissipation_cum
    }

    pub fn is_valid(&self) -> bool {
        let v = [
            self.fluid_ke,
            self.particle_ke,
            self.mass,
            self.second_moment,
            self.drag_dissipation_cum,
            self.viscous_dissipation_cum,
            self.drag_l1_cum,
            self.drag_l1_bound,
            self.memory_credit,
        ];
        v.iter().all(|x| x.is_finite() && *x >= 0.0)
    }
}

#[derive(Clone, Copy, Debug, Default)]
struct Accumulators {
    drag_dissipation: f64,
    viscous_dissipation: f64,
    drag_l1: f64,
    moment_time: f64,
    weighted_drag: f64,
    memory_credit: f64,
}

/// Diagnostics of one coupled step.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CoupledStepReport {
    pub push: PushReport,
    pub stokes: StepReport,
    /// `||u^n||^2` and `||u^{n+1}||^2`.
    pub fluid_norm_sq: [f64; 2],
    /// `||grad u^{n+1}||^2`.
    pub gradient_norm_sq: f64,
    /// `|dt int F + (P^{n+1} - P^n)|` relative to `|P^{n+1} - P^n|`, with `P`
    /// the particle momentum before reflections.
    pub momentum_residual: f64,
    /// `1/2 (||u^{n+1}||^2 - ||u^n||^2) + dt <K u^{n+1}, u^{n+1}> - dt <F, u^{n+1}>`;
    /// nonpositive up to solver tolerance when the memory kernel vanishes.
    pub fluid_balance: f64,
}

/// Owner of a coupled run.
#[derive(Debug)]
pub struct CoupledRun {
    pub state: CoupledState,
    pub solver: StokesSolver,
    /// Coercivity constant of the instantaneous viscosity.
    pub alpha: f64,
    acc: Accumulators,
    initial: EnergyReport,
}

impl CoupledRun {
    pub fn new(state: CoupledState, solver: StokesSolver, alpha: f64) -> Result<Self> {
        if state.fluid.u.grid != solver.grid() {
            return Err(Error::State("fluid and solver grids differ".into()));
        }
        if (state.hist.dt - solver.dt()).abs() > 1e-15 {
            return Err(Error::State("history and solver time steps differ".into()));
        }
        let mut run = Self { state, solver, alpha, acc: Accumulators::default(), initial: EnergyReport::default() };
        run.initial = run.energy_ledger();
        Ok(run)
    }

    pub fn grid(&self) -> Grid {
        self.solver.grid()
    }

    pub fn dt(&self) -> f64 {
        self.solver.dt()
    }

    pub fn initial_report(&self) -> EnergyReport {
        self.initial
    }

    /// Fluid velocity seen by the particles: `u`, or `u * theta_lambda` when regularised.
    pub fn drift_field(&self) -> VectorField {
        match self.state.params {
            Some(p) => mollify(&self.state.fluid.u, p.radius()),
            None => self.state.fluid.u.clone(),
        }
    }

    /// One step: interpolate the drift at the particles, push them, deposit the
    /// step-averaged drag at the pre-push positions, then advance the fluid.
    pub fn step(&mut self) -> Result<CoupledStepReport> {
        let dt = self.dt();
        let grid = self.grid();
        let drift = self.drift_field();
        let ens = &self.state.particles;
        let u_at: Vec<[f64; 2]> =
            ens.x.par_iter().map(|x| Ok(stencil(&grid, *x)?.eval(&drift.data))).collect::<Result<_>>()?;

        let e1 = -(-dt).exp_m1();
        let e2 = -(-2.0 * dt).exp_m1();
        let params = self.state.params;
        let mut q = Vec::with_capacity(ens.len());
        let (mut diss, mut l1, mut weighted) = (0.0, 0.0, 0.0);
        let mut dp = [0.0; 2];
        for k in 0..ens.len() {
            let (w, v, u) = (ens.w[k], ens.v[k], u_at[k]);
            let d = [u[0] - v[0], u[1] - v[1]];
            let d2 = d[0] * d[0] + d[1] * d[1];
            let speed = (v[0] * v[0] + v[1] * v[1]).sqrt();
            diss += 0.5 * w * d2 * e2;
            l1 += dt * w * d2.sqrt();
            weighted += dt * w * d2 / ((1.0 + speed) * (1.0 + speed));
            let gamma = params.map_or(1.0, |p| p.truncation(v));
            let s = -w * gamma * e1 / dt;
            q.push([s * d[0], s * d[1]]);
            dp[0] += w * d[0] * e1;
            dp[1] += w * d[1] * e1;
        }
        let forcing = deposit(grid, &ens.x, &q)?;
        let m = ens.moments();

        let push = push_with_velocities(&mut self.state.particles, &grid, &u_at, self.state.eps, dt)?;

        let before = self.state.fluid.u.l2_norm_sq();
        let stokes = self.solver.step(&mut self.state.fluid, &self.state.hist, Some(&forcing))?;
        let after = self.state.fluid.u.l2_norm_sq();
        let work = dt * forcing.dot(&self.state.fluid.u);
        let visc = dt * self.solver.dissipation(&self.state.fluid.u, self.state.fluid.t);
        let grad = self.state.fluid.gradient();
        let grad_sq = grad.norm_sq();
        self.state.hist.push(grad);

        let fi = forcing.integral();
        let dp_norm = dp[0].hypot(dp[1]);
        let mismatch = (dt * fi[0] + dp[0]).hypot(dt * fi[1] + dp[1]);

        let a = &mut self.acc;
        a.drag_dissipation += diss;
        a.viscous_dissipation += dt * grad_sq;
        a.drag_l1 += l1;
        a.moment_time += dt * (m.mass + m.second_moment);
        a.weighted_drag += weighted;
        if self.alpha > 0.0 {
            a.memory_credit += dt * stokes.memory_stress_norm * stokes.memory_stress_norm / self.alpha;
        }

        Ok(CoupledStepReport {
            push,
            stokes,
            fluid_norm_sq: [before, after],
            gradient_norm_sq: grad_sq,
            momentum_residual: if dp_norm > 0.0 { mismatch / dp_norm } else { mismatch },
            fluid_balance: 0.5 * (after - before) + visc - work,
        })
    }

    /// Current ledger.
    pub fn energy_ledger(&self) -> EnergyReport {
        let m = self.state.particles.moments();
        let a = &self.acc;
        EnergyReport {
            t: self.state.t(),
            fluid_ke: 0.5 * self.state.fluid.u.l2_norm_sq(),
            particle_ke: m.kinetic_energy,
            mass: m.mass,
            second_moment: m.second_moment,
            drag_dissipation_cum: a.drag_dissipation,
            viscous_dissipation_cum: a.viscous_dissipation,
            drag_l1_cum: a.drag_l1,
            drag_l1_bound: std::f64::consts::SQRT_2 * (a.moment_time * a.weighted_drag).sqrt(),
            memory_credit: a.memory_credit,
        }
    }

    /// `E(t) + 2 DragDiss + alpha ViscDiss <= E(0) (1 + tol) + MemoryCredit`.
    pub fn energy_inequality_holds(&self, tol: f64) -> bool {
        let r = self.energy_ledger();
        r.dissipated_total(self.alpha) <= self.initial.energy() * (1.0 + tol) + r.memory_credit
    }
}
