//! Weighted phase-space particles carrying the kinetic density.

pub mod io;
pub mod push;
pub mod regularize;

use std::fmt;
use std::sync::Arc;

use crate::error::Result;
use crate::fields::interp::{deposit, stencil};
use crate::fields::{Grid, VectorField};

pub use push::{push_particles, push_with_velocities, specular_reflect, PushReport, Wall};
pub use regularize::{regularize_initial, RegularizationParams};

/// Density `f(x, v) >= 0` in phase space.
pub type Density = Arc<dyn Fn([f64; 2], [f64; 2]) -> f64 + Send + Sync>;

/// Particles as parallel arrays.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ParticleEnsemble {
    pub x: Vec<[f64; 2]>,
    pub v: Vec<[f64; 2]>,
    pub w: Vec<f64>,
}

/// Zeroth, first and second velocity moments.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Moments {
    pub mass: f64,
    pub momentum: [f64; 2],
    pub kinetic_energy: f64,
    pub second_moment: f64,
}

impl ParticleEnsemble {
    pub fn new(x: Vec<[f64; 2]>, v: Vec<[f64; 2]>, w: Vec<f64>) -> Self {
        assert!(x.len() == v.len() && v.len() == w.len(), "particle arrays differ in length");
        Self { x, v, w }
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    pub fn push(&mut self, x: [f64; 2], v: [f64; 2], w: f64) {
        self.x.push(x);
        self.v.push(v);
        self.w.push(w);
    }

    pub fn total_mass(&self) -> f64 {
        self.w.iter().sum()
    }

    pub fn min_weight(&self) -> f64 {
        self.w.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_speed(&self) -> f64 {
        self.v.iter().fold(0.0, |m, v| m.max((v[0] * v[0] + v[1] * v[1]).sqrt()))
    }

    pub fn all_inside(&self, grid: &Grid) -> bool {
        self.x.iter().all(|x| x[0] >= 0.0 && x[0] <= grid.lx && x[1] >= 0.0 && x[1] <= grid.ly)
    }

    pub fn moments(&self) -> Moments {
        moments(self)
    }

    /// Keeps every `stride`-th particle and rescales weights so that the mass is unchanged.
    pub fn thinned(&self, stride: usize) -> Self {
        let stride = stride.max(1);
        let mut out = Self::default();
        for k in (0..self.len()).step_by(stride) {
            out.push(self.x[k], self.v[k], self.w[k]);
        }
        let (m0, m1) = (self.total_mass(), out.total_mass());
        if m1 > 0.0 {
            let s = m0 / m1;
            out.w.iter_mut().for_each(|w| *w *= s);
        }
        out
    }
}

pub fn moments(ens: &ParticleEnsemble) -> Moments {
    let mut m = Moments::default();
    for k in 0..ens.len() {
        let (w, v) = (ens.w[k], ens.v[k]);
        let s = v[0] * v[0] + v[1] * v[1];
        m.mass += w;
        m.momentum[0] += w * v[0];
        m.momentum[1] += w * v[1];
        m.second_moment += w * s;
    }
    m.kinetic_energy = 0.5 * m.second_moment;
    m
}

/// Particle counts per phase-space dimension.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Lattice {
    pub nx: usize,
    pub ny: usize,
    pub nvx: usize,
    pub nvy: usize,
}

impl Lattice {
    pub fn uniform(nx: usize, nv: usize) -> Self {
        Self { nx, ny: nx, nvx: nv, nvy: nv }
    }

    pub fn size(&self) -> usize {
        self.nx * self.ny * self.nvx * self.nvy
    }
}

/// Initial kinetic density and fluid velocity.
#[derive(Clone)]
pub struct InitialData {
    pub f0: Density,
    pub u0: VectorField,
    pub vmax: f64,
}

impl fmt::Debug for InitialData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("InitialData").field("grid", &self.u0.grid).field("vmax", &self.vmax).finish()
    }
}

impl InitialData {
    pub fn zero_density() -> Density {
        Arc::new(|_, _| 0.0)
    }
}

/// Samples `f0` at the midpoints of a tensor lattice on `domain x [-vmax, vmax]^2`
/// with weights `f0 * dx * dy * dvx * dvy`; zero-weight particles are dropped.
pub fn init_from_density(f0: &Density, domain: &Grid, lattice: Lattice, vmax: f64) -> ParticleEnsemble {
    assert!(vmax > 0.0, "vmax must be positive");
    assert!(lattice.nx >= 2 && lattice.ny >= 2 && lattice.nvx >= 2 && lattice.nvy >= 2, "lattice too coarse");
    let hx = domain.lx / lattice.nx as f64;
    let hy = domain.ly / lattice.ny as f64;
    let hvx = 2.0 * vmax / lattice.nvx as f64;
    let hvy = 2.0 * vmax / lattice.nvy as f64;
    let vol = hx * hy * hvx * hvy;
    let mut ens = ParticleEnsemble::default();
    for j in 0..lattice.ny {
        let y = (j as f64 + 0.5) * hy;
        for i in 0..lattice.nx {
            let x = (i as f64 + 0.5) * hx;
            for b in 0..lattice.nvy {
                let vy = -vmax + (b as f64 + 0.5) * hvy;
                for a in 0..lattice.nvx {
                    let vx = -vmax + (a as f64 + 0.5) * hvx;
                    let w = f0([x, y], [vx, vy]) * vol;
                    if w > 0.0 {
                        ens.push([x, y], [vx, vy], w);
                    }
                }
            }
        }
    }
    ens
}

/// Face density of the drag `-sum_k w_k (u(x_k) - v_k) delta(x - x_k)`.
pub fn deposit_drag(ens: &ParticleEnsemble, u: &VectorField) -> Result<VectorField> {
    let mut q = Vec::with_capacity(ens.len());
    for k in 0..ens.len() {
        let uk = stencil(&u.grid, ens.x[k])?.eval(&u.data);
        q.push([-ens.w[k] * (uk[0] - ens.v[k][0]), -ens.w[k] * (uk[1] - ens.v[k][1])]);
    }
    deposit(u.grid, &ens.x, &q)
}

/// Absolute 4-volume of the simplex spanned by five phase-space points.
pub fn phase_volume(p: &[[f64; 4]; 5]) -> f64 {
    let mut m = [[0.0; 4]; 4];
    for r in 0..4 {
        for c in 0..4 {
            m[r][c] = p[r + 1][c] - p[0][c];
        }
    }
    det4(&m).abs() / 24.0
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn det4(m: &[[f64; 4]; 4]) -> f64 {
    let mut a = *m;
    let mut det = 1.0;
    for c in 0..4 {
        let piv = (c..4).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        if a[piv][c] == 0.0 {
            return 0.0;
        }
        if piv != c {
            a.swap(piv, c);
            det = -det;
        }
        det *= a[c][c];
        for r in c + 1..4 {
            let f = a[r][c] / a[c][c];
            for k in c..4 {
                a[r][k] -= f * a[c][k];
            }
        }
    }
    det
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments_of_single_particle() {
        let ens = ParticleEnsemble::new(vec![[0.5, 0.5]], vec![[3.0, 4.0]], vec![2.0]);
        let m = ens.moments();
        assert_eq!(m.mass, 2.0);
        assert_eq!(m.momentum, [6.0, 8.0]);
        assert_eq!(m.kinetic_energy, 25.0);
        assert_eq!(m.second_moment, 50.0);
        assert_eq!(ParticleEnsemble::default().moments(), Moments::default());
    }

    #[test]
    fn zero_density_gives_empty_ensemble() {
        let g = Grid::unit(8).unwrap();
        let ens = init_from_density(&InitialData::zero_density(), &g, Lattice::uniform(4, 4), 4.0);
        assert!(ens.is_empty());
        assert_eq!(ens.total_mass(), 0.0);
    }

    #[test]
    fn indicator_mass_is_phase_volume() {
        let g = Grid::unit(8).unwrap();
        let f: Density = Arc::new(|_, v| if v[0].abs() <= 1.0 && v[1].abs() <= 1.0 { 1.0 } else { 0.0 });
        let ens = init_from_density(&f, &g, Lattice::uniform(6, 10), 1.0);
        assert!((ens.total_mass() - 4.0).abs() <= 0.04);
    }

    #[test]
    fn unit_simplex_volume() {
        let mut p = [[0.0; 4]; 5];
        for k in 0..4 {
            p[k + 1][k] = 1.0;
        }
        assert!((phase_volume(&p) - 1.0 / 24.0).abs() < 1e-15);
        let degenerate = [[0.0; 4]; 5];
        assert_eq!(phase_volume(&degenerate), 0.0);
    }

    #[test]
    fn drag_deposits() {
        let g = Grid::unit(8).unwrap();
        assert_eq!(deposit_drag(&ParticleEnsemble::default(), &VectorField::zeros(g)).unwrap(), VectorField::zeros(g));
        let pair = ParticleEnsemble::new(vec![[0.4, 0.4]; 2], vec![[1.0, 0.0], [-1.0, 0.0]], vec![0.5, 0.5]);
        let f = deposit_drag(&pair, &VectorField::zeros(g)).unwrap();
        assert!(f.max_abs() < 1e-15);
        let c = [0.3, -0.7];
        let single = ParticleEnsemble::new(vec![[0.61, 0.27]], vec![[1.0, 2.0]], vec![1.7]);
        let f = deposit_drag(&single, &VectorField::constant(g, c)).unwrap();
        let total = f.integral();
        let expect = [-1.7 * (c[0] - 1.0), -1.7 * (c[1] - 2.0)];
        for a in 0..2 {
            assert!((total[a] - expect[a]).abs() <= 1e-12 * expect[a].abs());
        }
    }

    #[test]
    fn thinning_preserves_mass() {
        let ens = ParticleEnsemble::new(vec![[0.1, 0.1]; 5], vec![[0.0; 2]; 5], vec![1.0, 2.0, 3.0, 4.0, 5.0]);
        let t = ens.thinned(2);
        assert_eq!(t.len(), 3);
        assert!((t.total_mass() - 15.0).abs() < 1e-13);
    }
}
