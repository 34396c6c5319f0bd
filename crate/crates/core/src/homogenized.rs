//! The limit system: Stokes flow with the effective tensors coupled to the
//! position-frozen limit kinetic equation, and first-order corrector reconstruction.

use crate::coupled::{CoupledRun, CoupledState, CoupledStepReport, EnergyReport};
use crate::error::{Error, Result};
use crate::fields::coefficient::fast_variable;
use crate::fields::viscous::gradient;
use crate::fields::{Grid, Mac, VectorField};
use crate::homogenization::{Corrector, EffectiveTensors};
use crate::particles::ParticleEnsemble;
use crate::stokes::{MemoryKernel, StokesSolver, StokesState, Viscosity};

/// Exact velocity relaxation `v <- u(x) + (v - u(x)) e^{-dt}` with positions frozen.
pub fn mean_vlasov_step(ens: &mut ParticleEnsemble, u: &VectorField, dt: f64) -> Result<()> {
    let e = (-dt).exp();
    for k in 0..ens.len() {
        let uk = crate::fields::interp::stencil(&u.grid, ens.x[k])?.eval(&u.data);
        if !(uk[0].is_finite() && uk[1].is_finite()) {
            return Err(Error::Integration("non-finite fluid velocity at a particle".into()));
        }
        for a in 0..2 {
            ens.v[k][a] = uk[a] + (ens.v[k][a] - uk[a]) * e;
        }
    }
    Ok(())
}

/// Homogenized run: the coupled stepper with the effective tensors and no
/// particle transport.
#[derive(Debug)]
pub struct HomogenizedRun {
    pub run: CoupledRun,
    pub tensors: EffectiveTensors,
}

impl HomogenizedRun {
    /// The run can take as many steps as `tensors.c1` has lags beyond the first.
    pub fn new(u0: VectorField, particles: ParticleEnsemble, tensors: EffectiveTensors, dt: f64) -> Result<Self> {
        if (tensors.dt - dt).abs() > 1e-15 {
            return Err(Error::Precondition("effective memory kernel sampled with a different step".into()));
        }
        let grid = u0.grid;
        let memory = if tensors.c1.iter().all(|c| c.iter().all(|v| *v == 0.0)) {
            MemoryKernel::Zero
        } else {
            MemoryKernel::Effective(tensors.c1.clone())
        };
        let retain = !memory.is_zero();
        let solver = StokesSolver::new(grid, dt, Viscosity::Uniform(tensors.c0), memory);
        let state = CoupledState::new(StokesState::new(u0)?, particles, dt, 0.0, None, retain)?;
        let alpha = tensors.alpha();
        Ok(Self { run: CoupledRun::new(state, solver, alpha)?, tensors })
    }

    pub fn step(&mut self) -> Result<CoupledStepReport> {
        let x_before = self.run.state.particles.x.clone();
        let report = self.run.step()?;
        if self.run.state.particles.x != x_before {
            return Err(Error::State("limit particles moved in space".into()));
        }
        Ok(report)
    }

    pub fn fluid(&self) -> &StokesState {
        &self.run.state.fluid
    }

    pub fn particles(&self) -> &ParticleEnsemble {
        &self.run.state.particles
    }

    pub fn energy_ledger(&self) -> EnergyReport {
        self.run.energy_ledger()
    }
}

/// Bilinear sample of one component of a periodic corrector field at `y` in the unit cell.
fn sample_periodic(mac: &Mac, data: &[f64], comp: usize, y: [f64; 2]) -> f64 {
    let g = mac.grid;
    let (nx, ny) = (g.nx, g.ny);
    // u lives at (i h, (j + 1/2) h), v at ((i + 1/2) h, j h)
    let (sx, sy) = if comp == 0 { (y[0] / g.dx(), y[1] / g.dy() - 0.5) } else { (y[0] / g.dx() - 0.5, y[1] / g.dy()) };
    let (fx, fy) = (sx.floor(), sy.floor());
    let (tx, ty) = (sx - fx, sy - fy);
    let i0 = (fx as i64).rem_euclid(nx as i64) as usize;
    let j0 = (fy as i64).rem_euclid(ny as i64) as usize;
    let at = |i: usize, j: usize| if comp == 0 { data[mac.u_idx(i, j)] } else { data[mac.v_idx(i, j)] };
    (1.0 - tx) * (1.0 - ty) * at(i0, j0) + tx * (1.0 - ty) * at(i0 + 1, j0) + (1.0 - tx) * ty * at(i0, j0 + 1)
        + tx * ty * at(i0 + 1, j0 + 1)
}

/// `u0(x) + eps chi_{grad u0(x)}(x / eps)` at the faces of the grid of `u0`;
/// wall-normal faces stay zero.
pub fn corrector_reconstruction(u0: &VectorField, corr: &Corrector, eps: f64) -> VectorField {
    let grid: Grid = u0.grid;
    let mac = Mac::no_slip(grid);
    let grad = gradient(&mac, &u0.data).to_tensor();
    let cell_grad: Vec<[f64; 4]> = (0..grid.n_cells()).map(|c| grad.cell_mean(c)).collect();
    let mut out = u0.clone();
    let nx = grid.nx;
    for k in 0..mac.n_dofs() {
        if mac.is_pinned(k) {
            continue;
        }
        let x = mac.dof_position(k);
        let (comp, cells) = if k < mac.n_u() {
            let (i, j) = (k % (nx + 1), k / (nx + 1));
            (0, [grid.cell_index(i - 1, j), grid.cell_index(i, j)])
        } else {
            let r = k - mac.n_u();
            let (i, j) = (r % nx, r / nx);
            (1, [grid.cell_index(i, j - 1), grid.cell_index(i, j)])
        };
        let mut g = [0.0; 4];
        for c in cells {
            for q in 0..4 {
                g[q] += 0.5 * cell_grad[c][q];
            }
        }
        let y = fast_variable(x, eps);
        let mut corr_val = 0.0;
        for (q, sol) in corr.basis.iter().enumerate() {
            if g[q] != 0.0 {
                corr_val += g[q] * sample_periodic(&corr.mac, &sol.chi, comp, y);
            }
        }
        out.data[k] += eps * corr_val;
    }
    out
}
