//! Characteristics `x' = eps v`, `v' = u - v` with the fluid velocity frozen over
//! a step, integrated exactly, plus specular reflection at the walls.

use rayon::prelude::*;

use super::ParticleEnsemble;
use crate::error::{Error, Result};
use crate::fields::interp::stencil;
use crate::fields::{Grid, VectorField};

/// An axis-aligned wall of the rectangle.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Wall {
    Left,
    Right,
    Bottom,
    Top,
}

impl Wall {
    fn axis(self) -> usize {
        match self {
            Wall::Left | Wall::Right => 0,
            Wall::Bottom | Wall::Top => 1,
        }
    }

    fn plane(self, grid: &Grid) -> f64 {
        match self {
            Wall::Left | Wall::Bottom => 0.0,
            Wall::Right => grid.lx,
            Wall::Top => grid.ly,
        }
    }
}

/// Mirrors `x` across `wall` and negates the wall-normal velocity component.
#[inline]
pub fn specular_reflect(grid: &Grid, x: [f64; 2], v: [f64; 2], wall: Wall) -> ([f64; 2], [f64; 2]) {
    let a = wall.axis();
    let mut x = x;
    let mut v = v;
    x[a] = 2.0 * wall.plane(grid) - x[a];
    v[a] = -v[a];
    (x, v)
}

/// Folds a position back into the domain by repeated mirroring, reflecting the
/// velocity each time. Returns the number of reflections.
#[inline]
pub fn fold_into_domain(grid: &Grid, x: &mut [f64; 2], v: &mut [f64; 2]) -> usize {
    let mut n = 0;
    loop {
        let wall = if x[0] < 0.0 {
            Wall::Left
        } else if x[0] > grid.lx {
            Wall::Right
        } else if x[1] < 0.0 {
            Wall::Bottom
        } else if x[1] > grid.ly {
            Wall::Top
        } else {
            return n;
        };
        let (nx, nv) = specular_reflect(grid, *x, *v, wall);
        *x = nx;
        *v = nv;
        n += 1;
    }
}

/// Diagnostics of one push.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PushReport {
    pub reflections: usize,
    /// `eps * max|v| * dt / min(dx, dy)`; values above 1 violate the CFL audit.
    pub cfl: f64,
}

impl PushReport {
    pub fn cfl_ok(&self) -> bool {
        self.cfl <= 1.0
    }
}

/// Exact frozen-velocity update of one particle, without reflection.
#[inline]
pub fn relax(x: [f64; 2], v: [f64; 2], u: [f64; 2], eps: f64, dt: f64) -> ([f64; 2], [f64; 2]) {
    let e = (-dt).exp();
    let em1 = -(-dt).exp_m1();
    let mut xn = x;
    let mut vn = v;
    for a in 0..2 {
        xn[a] = x[a] + eps * (u[a] * dt + (v[a] - u[a]) * em1);
        vn[a] = u[a] + (v[a] - u[a]) * e;
    }
    (xn, vn)
}

/// Pushes every particle with its own frozen fluid velocity `u_at[k]`.
pub fn push_with_velocities(
    ens: &mut ParticleEnsemble,
    grid: &Grid,
    u_at: &[[f64; 2]],
    eps: f64,
    dt: f64,
) -> Result<PushReport> {
    if u_at.iter().any(|u| !u[0].is_finite() || !u[1].is_finite()) {
        return Err(Error::Integration("non-finite fluid velocity at a particle".into()));
    }
    let cfl = eps * ens.max_speed() * dt / grid.min_spacing();
    let reflections: usize = ens
        .x
        .par_iter_mut()
        .zip(ens.v.par_iter_mut())
        .zip(u_at.par_iter())
        .map(|((x, v), u)| {
            let (mut xn, mut vn) = relax(*x, *v, *u, eps, dt);
            let n = fold_into_domain(grid, &mut xn, &mut vn);
            *x = xn;
            *v = vn;
            n
        })
        .sum();
    Ok(PushReport { reflections, cfl })
}

/// Interpolates `u` at the particles and pushes them over `dt`.
pub fn push_particles(ens: &mut ParticleEnsemble, u: &VectorField, eps: f64, dt: f64) -> Result<PushReport> {
    let u_at = ens.x.iter().map(|x| Ok(stencil(&u.grid, *x)?.eval(&u.data))).collect::<Result<Vec<_>>>()?;
    push_with_velocities(ens, &u.grid, &u_at, eps, dt)
}

/// Analytic Jacobian of one reflection-free step in a uniform field, ordered
/// `(x1, x2, v1, v2)`.
pub fn step_jacobian(eps: f64, dt: f64) -> [[f64; 4]; 4] {
    let e = (-dt).exp();
    let s = eps * -(-dt).exp_m1();
    [[1.0, 0.0, s, 0.0], [0.0, 1.0, 0.0, s], [0.0, 0.0, e, 0.0], [0.0, 0.0, 0.0, e]]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::particles::{det4, phase_volume};

    fn one(x: [f64; 2], v: [f64; 2]) -> ParticleEnsemble {
        ParticleEnsemble::new(vec![x], vec![v], vec![1.0])
    }

    #[test]
    fn relaxation_halves_velocity_after_ln2() {
        let g = Grid::unit(8).unwrap();
        let mut ens = one([0.5, 0.5], [1.0, 0.0]);
        push_particles(&mut ens, &VectorField::zeros(g), 0.1, std::f64::consts::LN_2).unwrap();
        assert!((ens.v[0][0] - 0.5).abs() < 1e-15 && ens.v[0][1] == 0.0);
    }

    #[test]
    fn zero_eps_freezes_positions() {
        let g = Grid::unit(8).unwrap();
        let mut ens = one([0.3, 0.6], [2.0, -1.0]);
        push_particles(&mut ens, &VectorField::constant(g, [1.0, 1.0]), 0.0, 0.5).unwrap();
        assert_eq!(ens.x[0], [0.3, 0.6]);
        let e = (-0.5f64).exp();
        assert!((ens.v[0][0] - (1.0 + e)).abs() < 1e-15);
    }

    #[test]
    fn equilibrium_velocity_moves_in_straight_line() {
        let g = Grid::unit(8).unwrap();
        let c = [0.3, -0.2];
        let mut ens = one([0.5, 0.5], c);
        push_particles(&mut ens, &VectorField::constant(g, c), 0.5, 0.1).unwrap();
        assert!((ens.x[0][0] - (0.5 + 0.05 * 0.3)).abs() < 1e-15);
        assert!((ens.x[0][1] - (0.5 - 0.05 * 0.2)).abs() < 1e-15);
        assert_eq!(ens.v[0], c);
    }

    #[test]
    fn reflection_formula_and_involution() {
        let g = Grid::unit(4).unwrap();
        let (x, v) = specular_reflect(&g, [0.2, -0.1], [1.0, -2.0], Wall::Bottom);
        assert_eq!(v, [1.0, 2.0]);
        assert!((x[1] - 0.1).abs() < 1e-16);
        let (_, v2) = specular_reflect(&g, x, v, Wall::Bottom);
        assert_eq!(v2, [1.0, -2.0]);
    }

    #[test]
    fn corner_exit_reverses_velocity() {
        let g = Grid::unit(4).unwrap();
        let mut x = [-0.01, 1.02];
        let mut v = [-1.0, 2.0];
        assert_eq!(fold_into_domain(&g, &mut x, &mut v), 2);
        assert_eq!(v, [1.0, -2.0]);
        assert!(g.contains(x));
    }

    #[test]
    fn phase_volume_contracts_like_jacobian() {
        let g = Grid::unit(8).unwrap();
        let u = VectorField::constant(g, [0.2, -0.1]);
        let base = [0.5, 0.5, 0.1, 0.2];
        let mut p = [base; 5];
        for k in 0..4 {
            p[k + 1][k] += 0.01;
        }
        let mut ens = ParticleEnsemble::default();
        for q in &p {
            ens.push([q[0], q[1]], [q[2], q[3]], 1.0);
        }
        let v0 = phase_volume(&p);
        let (eps, dt) = (0.05, 0.01);
        for _ in 0..10 {
            push_particles(&mut ens, &u, eps, dt).unwrap();
        }
        for k in 0..5 {
            p[k] = [ens.x[k][0], ens.x[k][1], ens.v[k][0], ens.v[k][1]];
        }
        let expect = det4(&step_jacobian(eps, dt)).powi(10);
        assert!((phase_volume(&p) / v0 - expect).abs() < 1e-9 * expect);
        assert!((expect - (-0.2f64).exp()).abs() < 1e-14);
    }
}
