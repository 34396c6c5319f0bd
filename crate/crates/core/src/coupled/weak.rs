//! Particle quadrature of the weak form of the kinetic equation.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fields::interp::stencil;
use crate::fields::{Grid, VectorField};
use crate::particles::ParticleEnsemble;

type Spatial = dyn Fn([f64; 2]) -> (f64, [f64; 2]) + Send + Sync;

/// Test function `phi(t, x, v) = (T - t) a(x) b(v)`; `a` and `b` return their
/// value and gradient.
#[derive(Clone)]
pub struct TestFunction {
    pub t_final: f64,
    a: Arc<Spatial>,
    b: Arc<Spatial>,
}

impl std::fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TestFunction").field("t_final", &self.t_final).finish()
    }
}

impl TestFunction {
    pub fn new(
        t_final: f64,
        a: impl Fn([f64; 2]) -> (f64, [f64; 2]) + Send + Sync + 'static,
        b: impl Fn([f64; 2]) -> (f64, [f64; 2]) + Send + Sync + 'static,
    ) -> Self {
        Self { t_final, a: Arc::new(a), b: Arc::new(b) }
    }

    /// `a(x) = sin^2(pi x / lx) sin^2(pi y / ly)` and `b(v) = (1 - |v|^2 / r^2)^3_+`.
    pub fn standard(grid: &Grid, t_final: f64, r: f64) -> Self {
        use std::f64::consts::PI;
        let (lx, ly) = (grid.lx, grid.ly);
        Self::new(
            t_final,
            move |x| {
                let (sx, cx) = (PI * x[0] / lx).sin_cos();
                let (sy, cy) = (PI * x[1] / ly).sin_cos();
                let val = sx * sx * sy * sy;
                (val, [2.0 * PI / lx * sx * cx * sy * sy, 2.0 * PI / ly * sy * cy * sx * sx])
            },
            move |v| {
                let s = 1.0 - (v[0] * v[0] + v[1] * v[1]) / (r * r);
                if s <= 0.0 {
                    (0.0, [0.0; 2])
                } else {
                    let d = -6.0 * s * s / (r * r);
                    (s * s * s, [d * v[0], d * v[1]])
                }
            },
        )
    }

    /// Value and the integrand `d_t phi + eps v . grad_x phi + (u - v) . grad_v phi`.
    pub fn evaluate(&self, t: f64, x: [f64; 2], v: [f64; 2], u: [f64; 2], eps: f64) -> (f64, f64) {
        let (a, ga) = (self.a)(x);
        let (b, gb) = (self.b)(v);
        let s = self.t_final - t;
        let dt = -a * b;
        let transport = eps * s * b * (v[0] * ga[0] + v[1] * ga[1]);
        let drift = s * a * ((u[0] - v[0]) * gb[0] + (u[1] - v[1]) * gb[1]);
        (s * a * b, dt + transport + drift)
    }

    /// Checks `phi(t, x, v) = phi(t, x, v*)` at sampled wall points and velocities.
    pub fn check_compatible(&self, grid: &Grid) -> Result<()> {
        let n = 16;
        for k in 0..=n {
            let s = k as f64 / n as f64;
            let walls = [
                ([0.0, s * grid.ly], 0),
                ([grid.lx, s * grid.ly], 0),
                ([s * grid.lx, 0.0], 1),
                ([s * grid.lx, grid.ly], 1),
            ];
            for (x, axis) in walls {
                for m in 0..12 {
                    let th = m as f64 * 0.5235987755982988 + 0.1;
                    for r in [0.3, 1.1, 2.7] {
                        let v = [r * th.cos(), r * th.sin()];
                        let mut vs = v;
                        vs[axis] = -vs[axis];
                        let (a, _) = (self.a)(x);
                        let (b1, _) = (self.b)(v);
                        let (b2, _) = (self.b)(vs);
                        if (a * (b1 - b2)).abs() > 1e-13 {
                            return Err(Error::Precondition(format!(
                                "test function is not invariant under specular reflection at ({:.3}, {:.3})",
                                x[0], x[1]
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// Running weak-form sum `sum_n dt sum_k w_k [...] + sum_k w_k^0 phi(0)`.
#[derive(Clone, Debug)]
pub struct WeakFormResidual {
    test: TestFunction,
    eps: f64,
    sum: f64,
    /// Sum of absolute values of all terms, for scale.
    magnitude: f64,
}

impl WeakFormResidual {
    /// Starts the sum with the initial-data term.
    pub fn new(test: TestFunction, grid: &Grid, eps: f64, initial: &ParticleEnsemble) -> Result<Self> {
        test.check_compatible(grid)?;
        let mut sum = 0.0;
        let mut magnitude = 0.0;
        for k in 0..initial.len() {
            let (phi, _) = test.evaluate(0.0, initial.x[k], initial.v[k], [0.0; 2], eps);
            sum += initial.w[k] * phi;
            magnitude += (initial.w[k] * phi).abs();
        }
        Ok(Self { test, eps, sum, magnitude })
    }

    /// Adds the rectangle-rule contribution of `[t, t + dt)` using the state at `t`
    /// and the drift field the particles see.
    pub fn accumulate(&mut self, t: f64, dt: f64, ens: &ParticleEnsemble, drift: &VectorField) -> Result<()> {
        for k in 0..ens.len() {
            let u = stencil(&drift.grid, ens.x[k])?.eval(&drift.data);
            let (_, r) = self.test.evaluate(t, ens.x[k], ens.v[k], u, self.eps);
            self.sum += dt * ens.w[k] * r;
            self.magnitude += (dt * ens.w[k] * r).abs();
        }
        Ok(())
    }

    pub fn residual(&self) -> f64 {
        self.sum.abs()
    }

    pub fn magnitude(&self) -> f64 {
        self.magnitude
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_test_function_and_empty_cloud_give_zero() {
        let g = Grid::unit(8).unwrap();
        let zero = TestFunction::new(1.0, |_| (0.0, [0.0; 2]), |_| (0.0, [0.0; 2]));
        let ens = ParticleEnsemble::new(vec![[0.3, 0.3]], vec![[0.1, 0.2]], vec![1.0]);
        let mut w = WeakFormResidual::new(zero, &g, 0.5, &ens).unwrap();
        w.accumulate(0.0, 0.1, &ens, &VectorField::zeros(g)).unwrap();
        assert_eq!(w.residual(), 0.0);
        let w = WeakFormResidual::new(TestFunction::standard(&g, 1.0, 3.0), &g, 0.5, &ParticleEnsemble::default()).unwrap();
        assert_eq!(w.residual(), 0.0);
    }

    #[test]
    fn non_radial_velocity_profile_is_rejected() {
        let g = Grid::unit(8).unwrap();
        let bad = TestFunction::new(1.0, |_| (1.0, [0.0; 2]), |v| (v[0], [1.0, 0.0]));
        assert!(matches!(WeakFormResidual::new(bad, &g, 0.5, &ParticleEnsemble::default()), Err(Error::Precondition(_))));
    }

    #[test]
    fn standard_gradients_match_differences() {
        let g = Grid::unit(8).unwrap();
        let tf = TestFunction::standard(&g, 1.0, 3.0);
        let (x, v) = ([0.31, 0.72], [0.4, -1.1]);
        let h = 1e-6;
        let (_, ga) = (tf.a)(x);
        let (_, gb) = (tf.b)(v);
        for d in 0..2 {
            let (mut xp, mut xm, mut vp, mut vm) = (x, x, v, v);
            xp[d] += h;
            xm[d] -= h;
            vp[d] += h;
            vm[d] -= h;
            assert!((((tf.a)(xp).0 - (tf.a)(xm).0) / (2.0 * h) - ga[d]).abs() < 1e-7);
            assert!((((tf.b)(vp).0 - (tf.b)(vm).0) / (2.0 * h) - gb[d]).abs() < 1e-7);
        }
    }
}
