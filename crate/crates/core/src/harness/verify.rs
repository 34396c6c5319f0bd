//! Verification studies with independent reference solutions: manufactured
//! Stokes solutions, a scalar Volterra reduction, phase-volume tracking and
//! reflection symmetry.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::fields::coefficient::{scale, Dependence, IDENTITY};
use crate::fields::projection::gradient as pressure_gradient;
use crate::fields::viscous::IDENTITY4;
use crate::fields::{Grid, OscillatoryCoefficient, ScalarField, VectorField};
use crate::particles::push::step_jacobian;
use crate::particles::{phase_volume, push_particles, specular_reflect, ParticleEnsemble, Wall};
use crate::stokes::{stokes_step, MemoryHistory, MemoryKernel, StokesSolver, StokesState, Viscosity};

/// `s(z) = sin^2(pi z)` and its first three derivatives.
fn s_derivs(z: f64) -> [f64; 4] {
    let (s2, c2) = (2.0 * PI * z).sin_cos();
    [(PI * z).sin().powi(2), PI * s2, 2.0 * PI * PI * c2, -4.0 * PI.powi(3) * s2]
}

/// Curl of `s(x) s(y)` and its Laplacian.
pub fn manufactured_velocity(x: [f64; 2]) -> ([f64; 2], [f64; 2]) {
    let a = s_derivs(x[0]);
    let b = s_derivs(x[1]);
    let u = [a[0] * b[1], -a[1] * b[0]];
    let lap = [a[2] * b[1] + a[0] * b[3], -(a[3] * b[0] + a[1] * b[2])];
    (u, lap)
}

/// Gradient of `cos(pi x) cos(pi y)`.
fn manufactured_pressure_gradient(x: [f64; 2]) -> [f64; 2] {
    [-PI * (PI * x[0]).sin() * (PI * x[1]).cos(), -PI * (PI * x[0]).cos() * (PI * x[1]).sin()]
}

fn face_field(grid: Grid, f: impl Fn([f64; 2]) -> [f64; 2]) -> VectorField {
    VectorField::from_fn(grid, |x| f(x)[0], |x| f(x)[1])
}

/// One refinement level of a convergence study.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StudyLevel {
    /// `h` or `dt`.
    pub size: f64,
    pub error: f64,
}

/// Observed orders `log2(e_k / e_{k+1})` between successive halvings.
pub fn observed_orders(levels: &[StudyLevel]) -> Vec<f64> {
    levels.windows(2).map(|p| (p[0].error / p[1].error).ln() / (p[0].size / p[1].size).ln()).collect()
}

/// Spatial study with `u = (1 + t) U(x)`, `A0 = I`, `A1 = 0` and
/// `p = (1 + t) cos(pi x) cos(pi y)`. The velocity is linear in time, so
/// backward Euler adds no temporal error and the `L2(Q)` error is spatial.
pub fn mms_spatial(resolutions: &[usize], dt: f64, t_final: f64) -> Result<Vec<StudyLevel>> {
    let n_steps = (t_final / dt).round() as usize;
    let mut levels = Vec::new();
    for &n in resolutions {
        let grid = Grid::unit(n)?;
        let exact = face_field(grid, |x| manufactured_velocity(x).0);
        let base = face_field(grid, |x| {
            let (u, lap) = manufactured_velocity(x);
            let gp = manufactured_pressure_gradient(x);
            [u[0] - lap[0] + gp[0], u[1] - lap[1] + gp[1]]
        });
        let lap_part = face_field(grid, |x| {
            let (_, lap) = manufactured_velocity(x);
            let gp = manufactured_pressure_gradient(x);
            [-lap[0] + gp[0], -lap[1] + gp[1]]
        });
        let mut solver = StokesSolver::new(grid, dt, Viscosity::Uniform(IDENTITY4), MemoryKernel::Zero);
        let mut state = StokesState::new(VectorField::from_stream_function(grid, |x| s_derivs(x[0])[0] * s_derivs(x[1])[0]))?;
        let mut hist = MemoryHistory::new(dt, false);
        hist.push(state.gradient());
        let mut err = 0.0;
        for k in 1..=n_steps {
            let t = k as f64 * dt;
            // F = g' U + g (-Lap U + grad p) with g = 1 + t
            let mut f = base.sub(&lap_part);
            f.axpy(1.0 + t, &lap_part);
            stokes_step(&mut solver, &mut state, &mut hist, Some(&f))?;
            err += dt * state.u.sub(&exact.scaled(1.0 + t)).l2_norm_sq();
        }
        levels.push(StudyLevel { size: grid.dx(), error: err.sqrt() });
    }
    Ok(levels)
}

/// Temporal study against the semi-discrete solution `e^{-t} U_h` on a fixed
/// grid, `U_h` the discrete curl of the stream function, with the forcing built
/// from the discrete operator so that the spatial error vanishes identically.
pub fn mms_temporal(n: usize, steps: &[usize], t_final: f64) -> Result<Vec<StudyLevel>> {
    let grid = Grid::unit(n)?;
    let uh = VectorField::from_stream_function(grid, |x| s_derivs(x[0])[0] * s_derivs(x[1])[0]);
    let mut probe = StokesSolver::new(grid, 1.0, Viscosity::Uniform(IDENTITY4), MemoryKernel::Zero);
    let mut ku = vec![0.0; uh.data.len()];
    probe.operator_at(1.0).apply(&uh.data, &mut ku);
    let ku = VectorField { grid, data: ku };
    let gp = pressure_gradient(&ScalarField::from_fn(grid, |x| (PI * x[0]).cos() * (PI * x[1]).cos()));
    let mut levels = Vec::new();
    for &m in steps {
        let dt = t_final / m as f64;
        let mut solver = StokesSolver::new(grid, dt, Viscosity::Uniform(IDENTITY4), MemoryKernel::Zero);
        let mut state = StokesState::new(uh.clone())?;
        let mut hist = MemoryHistory::new(dt, false);
        hist.push(state.gradient());
        let mut err = 0.0;
        for k in 1..=m {
            let g = (-(k as f64) * dt).exp();
            // F = g' U_h + g K U_h + g grad p
            let mut f = uh.scaled(-g);
            f.axpy(g, &ku);
            f.axpy(g, &gp);
            stokes_step(&mut solver, &mut state, &mut hist, Some(&f))?;
            err += dt * state.u.sub(&uh.scaled(g)).l2_norm_sq();
        }
        levels.push(StudyLevel { size: dt, error: err.sqrt() });
    }
    Ok(levels)
}

/// Lowest discrete Stokes mode of `K` (for `A0 = I`) by inverse iteration, with
/// its Rayleigh quotient.
pub fn lowest_stokes_mode(grid: Grid, iterations: usize) -> Result<(VectorField, f64)> {
    let big = 1e6;
    let mut solver = StokesSolver::new(grid, big, Viscosity::Uniform(IDENTITY4), MemoryKernel::Zero);
    let mut phi = VectorField::from_stream_function(grid, |x| s_derivs(x[0])[0] * s_derivs(x[1])[0]);
    for _ in 0..iterations {
        let (u, _) = solver.solve_implicit(&phi.data, big)?;
        phi = VectorField { grid, data: u };
        let norm = phi.l2_norm();
        phi = phi.scaled(1.0 / norm);
    }
    let mu = solver.dissipation(&phi, big) / phi.l2_norm_sq();
    Ok((phi, mu))
}

/// Dense product-trapezoid integrator for
/// `y' = -a y - b int_0^t e^{-(t - s)} y(s) ds`, `y(0) = 1`, on `n` uniform steps.
pub fn dense_volterra(a: f64, b: f64, t_final: f64, n: usize) -> Vec<f64> {
    let h = t_final / n as f64;
    let mut y = vec![1.0; n + 1];
    let mut f = vec![-a; n + 1];
    for j in 0..n {
        let t1 = (j + 1) as f64 * h;
        // memory at t_{j+1} without its own endpoint
        let mut mem = 0.0;
        for i in 0..=j {
            let w = if i == 0 { 0.5 * h } else { h };
            mem += w * (-(t1 - i as f64 * h)).exp() * y[i];
        }
        // y1 = y_j + h/2 (f_j - a y1 - b (mem + h/2 y1))
        let y1 = (y[j] + 0.5 * h * (f[j] - b * mem)) / (1.0 + 0.5 * h * (a + 0.5 * h * b));
        y[j + 1] = y1;
        f[j + 1] = -a * y1 - b * (mem + 0.5 * h * y1);
    }
    y
}

#[derive(Clone, Debug, PartialEq)]
pub struct VolterraComparison {
    pub dt: f64,
    /// `max_n |y_n - y(t_n)| / max_n |y(t_n)|`.
    pub relative_error: f64,
    pub mode_eigenvalue: f64,
    /// Largest component of the discrete solution orthogonal to the mode.
    pub leakage: f64,
}

/// Reduces `A0 = a0 I`, `A1 = kappa e^{-t} I` on the lowest Stokes mode to a
/// scalar Volterra equation and compares the full solver with [`dense_volterra`].
pub fn volterra_oracle(n: usize, a0: f64, kappa: f64, dt: f64, t_final: f64) -> Result<VolterraComparison> {
    let grid = Grid::unit(n)?;
    let (phi, mu) = lowest_stokes_mode(grid, 60)?;
    let kernel = OscillatoryCoefficient::new("exp kernel", 0.0, kappa, Dependence::Full, move |t, _, _| {
        scale(IDENTITY, kappa * (-t).exp())
    });
    let mut solver = StokesSolver::new(
        grid,
        dt,
        Viscosity::Fine { coeff: OscillatoryCoefficient::constant(a0), eps: 1.0 },
        MemoryKernel::Fine { coeff: kernel, eps: 1.0 },
    );
    let mut state = StokesState::new(phi.clone())?;
    let mut hist = MemoryHistory::new(dt, true);
    hist.push(state.gradient());
    let m = (t_final / dt).round() as usize;
    let sub = 50;
    let reference = dense_volterra(a0 * mu, kappa * mu, t_final, m * sub);
    let scale_ref = reference.iter().fold(0.0f64, |s, y| s.max(y.abs()));
    let (mut err, mut leakage) = (0.0f64, 0.0f64);
    for k in 1..=m {
        stokes_step(&mut solver, &mut state, &mut hist, None)?;
        let y = state.u.dot(&phi);
        err = err.max((y - reference[k * sub]).abs());
        leakage = leakage.max(state.u.sub(&phi.scaled(y)).l2_norm());
    }
    Ok(VolterraComparison { dt, relative_error: err / scale_ref, mode_eigenvalue: mu, leakage })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseVolumeCheck {
    /// Relative deviation of the tracked 4-volume from `det(J)^n`.
    pub volume_error: f64,
    /// Relative deviation of the tracked velocity-triangle area from `e^{-2t}`.
    pub velocity_error: f64,
}

/// Tracks a phase-space simplex and a velocity triangle through `n_steps`
/// reflection-free steps in a uniform fluid velocity.
pub fn phase_volume_check(n_steps: usize, dt: f64, eps: f64) -> Result<PhaseVolumeCheck> {
    let grid = Grid::unit(8)?;
    let u = VectorField::constant(grid, [0.1, -0.05]);
    let base = [0.5, 0.5, 0.2, -0.1];
    let h = 0.01;
    let pts: Vec<[f64; 4]> = (0..5)
        .map(|k| {
            let mut p = base;
            if k > 0 {
                p[k - 1] += h;
            }
            p
        })
        .collect();
    let mut ens = ParticleEnsemble::new(
        pts.iter().map(|p| [p[0], p[1]]).collect(),
        pts.iter().map(|p| [p[2], p[3]]).collect(),
        vec![1.0; 5],
    );
    let as_points = |e: &ParticleEnsemble| -> [[f64; 4]; 5] {
        std::array::from_fn(|k| [e.x[k][0], e.x[k][1], e.v[k][0], e.v[k][1]])
    };
    let tri = |e: &ParticleEnsemble| {
        let (a, b, c) = (e.v[0], e.v[3], e.v[4]);
        0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])).abs()
    };
    let vol0 = phase_volume(&as_points(&ens));
    let area0 = tri(&ens);
    for _ in 0..n_steps {
        let rep = push_particles(&mut ens, &u, eps, dt)?;
        if rep.reflections > 0 {
            return Err(crate::error::Error::State("phase-volume simplex reached a wall".into()));
        }
    }
    let j = step_jacobian(eps, dt);
    let det_step = crate::particles::det4(&j);
    let expected = det_step.powi(n_steps as i32);
    let t = n_steps as f64 * dt;
    Ok(PhaseVolumeCheck {
        volume_error: (phase_volume(&as_points(&ens)) / vol0 - expected).abs() / expected,
        velocity_error: (tri(&ens) / area0 - (-2.0 * t).exp()).abs() / (-2.0 * t).exp(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ReflectionCheck {
    pub cases: usize,
    pub speed_mismatches: usize,
    pub involution_failures: usize,
}

/// Random positions near the walls and random velocities, each reflected across
/// a random wall: checks `|v*| = |v|` and `(v*)* = v` bitwise.
pub fn reflection_check(cases: usize, seed: u64) -> ReflectionCheck {
    let grid = Grid::new(4, 4, 1.0, 1.5).expect("valid grid");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let walls = [Wall::Left, Wall::Right, Wall::Bottom, Wall::Top];
    let (mut speed, mut inv) = (0, 0);
    for _ in 0..cases {
        let x = [rng.gen_range(-0.1..1.1), rng.gen_range(-0.1..1.6)];
        let v = [rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0)];
        let wall = walls[rng.gen_range(0..4)];
        let (x1, v1) = specular_reflect(&grid, x, v, wall);
        if (v1[0] * v1[0] + v1[1] * v1[1]).sqrt().to_bits() != (v[0] * v[0] + v[1] * v[1]).sqrt().to_bits() {
            speed += 1;
        }
        let (_, v2) = specular_reflect(&grid, x1, v1, wall);
        if v2[0].to_bits() != v[0].to_bits() || v2[1].to_bits() != v[1].to_bits() {
            inv += 1;
        }
    }
    ReflectionCheck { cases, speed_mismatches: speed, involution_failures: inv }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manufactured_derivatives_match_differences() {
        let x = [0.31, 0.67];
        let h = 1e-4;
        let (_, lap) = manufactured_velocity(x);
        for c in 0..2 {
            let f = |p: [f64; 2]| manufactured_velocity(p).0[c];
            let fd = (f([x[0] + h, x[1]]) + f([x[0] - h, x[1]]) + f([x[0], x[1] + h]) + f([x[0], x[1] - h]) - 4.0 * f(x))
                / (h * h);
            assert!((fd - lap[c]).abs() < 1e-4 * lap[c].abs().max(1.0), "{fd} {}", lap[c]);
        }
        let u = face_field(Grid::unit(64).unwrap(), |p| manufactured_velocity(p).0);
        let d = u.max_abs_divergence();
        assert!(d < 1e-2, "{d}");
    }

    #[test]
    fn dense_volterra_matches_ode_reduction() {
        // y' = -a y - b z, z' = y - z has the same solution
        let (a, b, t) = (2.0, 3.0, 1.5);
        let y = dense_volterra(a, b, t, 3000);
        let (mut yy, mut zz) = (1.0f64, 0.0f64);
        let n = 300_000;
        let h = t / n as f64;
        let rhs = |y: f64, z: f64| (-a * y - b * z, y - z);
        for _ in 0..n {
            let (k1y, k1z) = rhs(yy, zz);
            let (k2y, k2z) = rhs(yy + 0.5 * h * k1y, zz + 0.5 * h * k1z);
            let (k3y, k3z) = rhs(yy + 0.5 * h * k2y, zz + 0.5 * h * k2z);
            let (k4y, k4z) = rhs(yy + h * k3y, zz + h * k3z);
            yy += h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
            zz += h / 6.0 * (k1z + 2.0 * k2z + 2.0 * k3z + k4z);
        }
        assert!((y[3000] - yy).abs() < 1e-6, "{} {}", y[3000], yy);
    }

    #[test]
    fn observed_order_of_exact_power_law() {
        let lv: Vec<StudyLevel> = [0.1, 0.05, 0.025].iter().map(|&h| StudyLevel { size: h, error: 3.0 * h * h }).collect();
        for o in observed_orders(&lv) {
            assert!((o - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn reflection_check_is_clean() {
        let r = reflection_check(1000, 1);
        assert_eq!((r.speed_mismatches, r.involution_failures), (0, 0));
    }
}
