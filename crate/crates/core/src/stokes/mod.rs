//! Time-dependent Stokes flow with an oscillating instantaneous viscosity and a
//! Volterra memory stress.
//!
//! One step solves `(u - u^n)/dt - div(C0 grad u) + grad p = F + div(sigma_mem)`
//! with `u` discretely divergence free. The memory stress `sigma_mem` and the
//! force `F` are explicit; the viscous term is implicit at the new time.

mod memory;

pub use memory::{memory_convolution, KernelSampler, LagSample, MemoryHistory, MemoryKernel};

use crate::error::{Error, Result};
use crate::fields::projection::solve_neumann_poisson;
use crate::fields::stream::{curl, curl_transpose, laplace_solver, n_stream};
use crate::fields::viscous::{gradient, stress_divergence, Tensor4};
use crate::fields::{GradientField, Grid, Mac, OscillatoryCoefficient, ScalarField, VectorField, ViscosityField, ViscousOperator};
use crate::linalg::{CgOptions, SpectralSolver};

/// Velocity, zero-mean pressure and clock.
#[derive(Clone, Debug, PartialEq)]
pub struct StokesState {
    pub u: VectorField,
    pub p: ScalarField,
    pub t: f64,
}

impl StokesState {
    pub fn zeros(grid: Grid) -> Self {
        Self { u: VectorField::zeros(grid), p: ScalarField::zeros(grid), t: 0.0 }
    }

    /// Initial state; `u0` must vanish on the walls and be divergence free.
    pub fn new(u0: VectorField) -> Result<Self> {
        if u0.max_abs_boundary() != 0.0 {
            return Err(Error::Precondition("initial velocity does not vanish on the walls".into()));
        }
        let div = u0.max_abs_divergence();
        if div > 1e-8 {
            return Err(Error::Precondition(format!("initial velocity has divergence {div:.3e}")));
        }
        let grid = u0.grid;
        Ok(Self { u: u0, p: ScalarField::zeros(grid), t: 0.0 })
    }

    pub fn gradient(&self) -> GradientField {
        gradient(&Mac::no_slip(self.u.grid), &self.u.data)
    }
}

/// Source of the instantaneous viscosity.
#[derive(Clone, Debug)]
pub enum Viscosity {
    /// `A0(t, x, x / eps)` sampled at the cell centres.
    Fine { coeff: OscillatoryCoefficient, eps: f64 },
    /// The same tensor everywhere.
    Uniform(Tensor4),
}

impl Viscosity {
    fn field(&self, grid: Grid, t: f64) -> ViscosityField {
        match self {
            Viscosity::Fine { coeff, eps } => ViscosityField::from_coefficient(grid, coeff, t, *eps),
            Viscosity::Uniform(c) => ViscosityField::uniform(grid, *c),
        }
    }

    fn time_dependent(&self) -> bool {
        matches!(self, Viscosity::Fine { coeff, .. } if coeff.dependence == crate::fields::coefficient::Dependence::Full)
    }
}

/// Diagnostics of one step.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StepReport {
    pub iterations: usize,
    pub pressure_iterations: usize,
    /// `L2` norm of the memory stress used in the step.
    pub memory_stress_norm: f64,
    pub max_divergence: f64,
}

/// Solver tolerances.
#[derive(Clone, Copy, Debug)]
pub struct StokesOptions {
    pub velocity: CgOptions,
    pub pressure: CgOptions,
}

impl StokesOptions {
    pub fn for_grid(grid: &Grid) -> Self {
        Self {
            velocity: CgOptions::relative(1e-12, 10 * grid.n_cells()),
            pressure: CgOptions::relative(1e-10, 10 * grid.n_cells()),
        }
    }
}

/// Stepper for one run; caches the operator, the spectral preconditioner and
/// the memory-kernel samples.
pub struct StokesSolver {
    mac: Mac,
    dt: f64,
    viscosity: Viscosity,
    op: ViscousOperator,
    op_time: f64,
    lap: SpectralSolver,
    nu_bar: f64,
    sampler: KernelSampler,
    psi: Vec<f64>,
    pub options: StokesOptions,
}

impl std::fmt::Debug for StokesSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("StokesSolver").field("grid", &self.mac.grid).field("dt", &self.dt).finish()
    }
}

impl StokesSolver {
    pub fn new(grid: Grid, dt: f64, viscosity: Viscosity, memory: MemoryKernel) -> Self {
        let mac = Mac::no_slip(grid);
        let field = viscosity.field(grid, dt);
        let nu_bar = field.mean_scalar();
        Self {
            mac,
            dt,
            op: ViscousOperator::new(mac, field),
            op_time: dt,
            viscosity,
            lap: laplace_solver(&mac),
            nu_bar,
            sampler: KernelSampler::new(memory, grid, dt),
            psi: vec![0.0; n_stream(&mac)],
            options: StokesOptions::for_grid(&grid),
        }
    }

    pub fn grid(&self) -> Grid {
        self.mac.grid
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn kernel(&self) -> &MemoryKernel {
        self.sampler.kernel()
    }

    /// Viscous operator at time `t` (resampled only for time-dependent coefficients).
    pub fn operator_at(&mut self, t: f64) -> &ViscousOperator {
        if self.viscosity.time_dependent() && (t - self.op_time).abs() > 1e-14 {
            self.op = ViscousOperator::new(self.mac, self.viscosity.field(self.mac.grid, t));
            self.op_time = t;
        }
        &self.op
    }

    /// Memory stress at the last time of `hist`.
    pub fn memory_stress(&mut self, hist: &MemoryHistory) -> Result<Option<Vec<[f64; 4]>>> {
        if self.sampler.kernel().is_zero() {
            return Ok(None);
        }
        let t = (hist.len() as f64 - 1.0) * self.dt;
        let s = memory_convolution(hist, &mut self.sampler, t)?;
        Ok(Some(s.data))
    }

    /// Solves `(I + dt K) u = rhs` on the divergence-free subspace, with `K`
    /// the viscous operator at `t`. Returns the velocity dofs and CG iterations.
    pub fn solve_implicit(&mut self, rhs: &[f64], t: f64) -> Result<(Vec<f64>, usize)> {
        let dt = self.dt;
        let mac = self.mac;
        let nu = self.nu_bar;
        let opts = self.options.velocity;
        let mut b = vec![0.0; n_stream(&mac)];
        curl_transpose(&mac, rhs, &mut b);
        let op = self.operator_at(t).clone();
        let lap = &self.lap;
        let n_dofs = mac.n_dofs();
        let apply = |psi: &[f64], out: &mut [f64]| {
            let mut u = vec![0.0; n_dofs];
            let mut ku = vec![0.0; n_dofs];
            curl(&mac, psi, &mut u);
            op.apply(&u, &mut ku);
            for k in 0..n_dofs {
                u[k] += dt * ku[k];
            }
            curl_transpose(&mac, &u, out);
        };
        let precond = |r: &[f64], z: &mut [f64]| lap.apply_fn(r, z, |l| 1.0 / (l + dt * nu * l * l));
        let stats = crate::linalg::pcg("Stokes velocity CG", apply, precond, &b, &mut self.psi, opts)?;
        let mut u = vec![0.0; n_dofs];
        curl(&mac, &self.psi, &mut u);
        Ok((u, stats.iterations))
    }

    /// Advances `state` by one step using `memory` for the Volterra term and
    /// `forcing` as the body force. The history is not modified.
    pub fn step(
        &mut self,
        state: &mut StokesState,
        memory: &MemoryHistory,
        forcing: Option<&VectorField>,
    ) -> Result<StepReport> {
        let dt = self.dt;
        let grid = self.mac.grid;
        if state.u.grid != grid {
            return Err(Error::State("state and solver grids differ".into()));
        }
        let mut rhs = state.u.data.clone();
        if let Some(f) = forcing {
            if f.grid != grid {
                return Err(Error::State("forcing grid differs from solver grid".into()));
            }
            for (r, fv) in rhs.iter_mut().zip(&f.data) {
                *r += dt * fv;
            }
        }
        let mut report = StepReport::default();
        if let Some(sigma) = self.memory_stress(memory)? {
            let mut div = vec![0.0; self.mac.n_dofs()];
            stress_divergence(&self.mac, &sigma, &mut div);
            let scale = dt / grid.cell_area();
            for (r, d) in rhs.iter_mut().zip(&div) {
                *r -= scale * d;
            }
            report.memory_stress_norm =
                (sigma.iter().flatten().map(|v| v * v).sum::<f64>() * 0.25 * grid.cell_area()).sqrt();
        }
        for (k, r) in rhs.iter_mut().enumerate() {
            if self.mac.is_pinned(k) {
                *r = 0.0;
            }
        }
        let t_new = state.t + dt;
        let (u, iterations) = self.solve_implicit(&rhs, t_new)?;
        report.iterations = iterations;

        // pressure from the residual, which is a discrete gradient
        let mut ku = vec![0.0; u.len()];
        self.op.apply(&u, &mut ku);
        let mut res = VectorField::zeros(grid);
        for k in 0..u.len() {
            if !self.mac.is_pinned(k) {
                res.data[k] = (rhs[k] - u[k] - dt * ku[k]) / dt;
            }
        }
        let (p, pstats) = solve_neumann_poisson(&res.divergence(), Some(&state.p), self.options.pressure)?;
        report.pressure_iterations = pstats.iterations;

        state.u = VectorField { grid, data: u };
        state.p = p;
        state.t = t_new;
        report.max_divergence = state.u.max_abs_divergence();
        Ok(report)
    }

    /// `<K u, u>` in the area-weighted inner product at time `t`.
    pub fn dissipation(&mut self, u: &VectorField, t: f64) -> f64 {
        2.0 * self.operator_at(t).energy(&u.data)
    }

}

/// One step followed by appending the new velocity gradient to `hist`.
pub fn stokes_step(
    solver: &mut StokesSolver,
    state: &mut StokesState,
    hist: &mut MemoryHistory,
    forcing: Option<&VectorField>,
) -> Result<StepReport> {
    let expected = (state.t / solver.dt()).round() as usize + 1;
    if hist.len() != expected {
        return Err(Error::State(format!("history holds {} snapshots, expected {expected}", hist.len())));
    }
    let report = solver.step(state, hist, forcing)?;
    hist.push(state.gradient());
    Ok(report)
}
