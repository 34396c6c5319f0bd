//! Symmetric matrix coefficients `A(t, x, y)`, periodic in the fast variable `y`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

/// Symmetric 2x2 matrix stored row-major `[a11, a12, a21, a22]`.
pub type Mat2 = [f64; 4];

pub const IDENTITY: Mat2 = [1.0, 0.0, 0.0, 1.0];

type Evaluator = dyn Fn(f64, [f64; 2], [f64; 2]) -> Mat2 + Send + Sync;

/// How a coefficient depends on its arguments; used to skip resampling.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dependence {
    /// Identically zero.
    Zero,
    /// Independent of `t` and `x`.
    CellOnly,
    /// General.
    Full,
}

/// Oscillating viscosity `A(t, x, y)`; `y` ranges over the unit cell.
#[derive(Clone)]
pub struct OscillatoryCoefficient {
    name: String,
    eval: Arc<Evaluator>,
    /// Coercivity constant: `xi . A xi >= alpha |xi|^2`.
    pub alpha: f64,
    /// Uniform bound on the largest entry.
    pub bound: f64,
    pub dependence: Dependence,
}

impl fmt::Debug for OscillatoryCoefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OscillatoryCoefficient")
            .field("name", &self.name)
            .field("alpha", &self.alpha)
            .field("bound", &self.bound)
            .field("dependence", &self.dependence)
            .finish()
    }
}

impl OscillatoryCoefficient {
    pub fn new(
        name: impl Into<String>,
        alpha: f64,
        bound: f64,
        dependence: Dependence,
        eval: impl Fn(f64, [f64; 2], [f64; 2]) -> Mat2 + Send + Sync + 'static,
    ) -> Self {
        Self { name: name.into(), eval: Arc::new(eval), alpha, bound, dependence }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    #[inline]
    pub fn eval(&self, t: f64, x: [f64; 2], y: [f64; 2]) -> Mat2 {
        (self.eval)(t, x, y)
    }

    pub fn is_zero(&self) -> bool {
        self.dependence == Dependence::Zero
    }

    pub fn zero() -> Self {
        Self::new("zero", 0.0, 0.0, Dependence::Zero, |_, _, _| [0.0; 4])
    }

    /// `alpha * I`.
    pub fn constant(alpha: f64) -> Self {
        Self::new("constant", alpha, alpha, Dependence::CellOnly, move |_, _, _| scale(IDENTITY, alpha))
    }

    /// Constant (possibly anisotropic) symmetric matrix.
    pub fn matrix(m: Mat2) -> Self {
        let alpha = min_eigenvalue(m);
        let bound = m.iter().fold(0.0f64, |b, v| b.max(v.abs()));
        Self::new("matrix", alpha, bound, Dependence::CellOnly, move |_, _, _| m)
    }

    /// `nu * (2 + sin(2 pi y1)) * I`.
    pub fn sinusoidal(nu: f64) -> Self {
        Self::new("sinusoidal", nu, 3.0 * nu, Dependence::CellOnly, move |_, _, y| {
            scale(IDENTITY, nu * (2.0 + (2.0 * PI * y[0]).sin()))
        })
    }

    /// Scalar checkerboard with `lo` on the cells where `floor(2 y1) + floor(2 y2)`
    /// is even and `hi` elsewhere; symmetric under `y1 <-> y2`.
    pub fn checkerboard(lo: f64, hi: f64) -> Self {
        Self::new("checkerboard", lo.min(hi), lo.max(hi), Dependence::CellOnly, move |_, _, y| {
            let q = (2.0 * y[0]).floor() as i64 + (2.0 * y[1]).floor() as i64;
            scale(IDENTITY, if q.rem_euclid(2) == 0 { lo } else { hi })
        })
    }

    /// `e^{-t} * b * (1 + cos(2 pi y2) / 2) * I`.
    pub fn exp_memory(b: f64) -> Self {
        Self::new("exp-memory", 0.5 * b, 1.5 * b, Dependence::Full, move |t, _, y| {
            scale(IDENTITY, (-t).exp() * b * (1.0 + 0.5 * (2.0 * PI * y[1]).cos()))
        })
    }

    /// `k(t) * base(t, x, y)`.
    pub fn time_scaled(base: &Self, k: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        let b = base.clone();
        let dependence = if base.is_zero() { Dependence::Zero } else { Dependence::Full };
        Self::new(format!("time-scaled {}", base.name), 0.0, base.bound, dependence, move |t, x, y| {
            scale(b.eval(t, x, y), k(t))
        })
    }
}

/// Evaluates `coeff` at `(t, x, frac(x / eps))`.
pub fn sample_coefficient(coeff: &OscillatoryCoefficient, t: f64, x: [f64; 2], eps: f64) -> Mat2 {
    coeff.eval(t, x, fast_variable(x, eps))
}

/// Componentwise fractional part of `x / eps`.
#[inline]
pub fn fast_variable(x: [f64; 2], eps: f64) -> [f64; 2] {
    let f = |s: f64| {
        let q = s / eps;
        let r = q - q.floor();
        if r >= 1.0 {
            0.0
        } else {
            r
        }
    };
    [f(x[0]), f(x[1])]
}

#[inline]
pub fn scale(m: Mat2, a: f64) -> Mat2 {
    [a * m[0], a * m[1], a * m[2], a * m[3]]
}

pub fn min_eigenvalue(m: Mat2) -> f64 {
    let tr = 0.5 * (m[0] + m[3]);
    let off = 0.5 * (m[1] + m[2]);
    let d = (0.25 * (m[0] - m[3]).powi(2) + off * off).sqrt();
    tr - d
}

/// Operator norm of a symmetric 2x2 matrix.
pub fn spectral_norm(m: Mat2) -> f64 {
    let tr = 0.5 * (m[0] + m[3]);
    let off = 0.5 * (m[1] + m[2]);
    let d = (0.25 * (m[0] - m[3]).powi(2) + off * off).sqrt();
    (tr + d).abs().max((tr - d).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn constant_coefficient_is_alpha_identity() {
        let c = OscillatoryCoefficient::constant(0.7);
        assert_eq!(sample_coefficient(&c, 1.3, [0.2, 0.9], 0.125), [0.7, 0.0, 0.0, 0.7]);
    }

    #[test]
    fn sinusoidal_at_lattice_point() {
        let c = OscillatoryCoefficient::sinusoidal(1.0);
        let m = sample_coefficient(&c, 0.0, [0.5, 0.5], 0.25);
        assert!((m[0] - 2.0).abs() < 1e-14 && (m[3] - 2.0).abs() < 1e-14);
        assert_eq!(m[1], 0.0);
    }

    #[test]
    fn checkerboard_is_eps_periodic() {
        let c = OscillatoryCoefficient::checkerboard(1.0, 3.0);
        let eps = 0.125;
        for k in 0..50 {
            let x = [0.013 * k as f64, 0.37 + 0.011 * k as f64];
            let a = sample_coefficient(&c, 0.0, x, eps);
            let b = sample_coefficient(&c, 0.0, [x[0] + eps, x[1]], eps);
            let d = sample_coefficient(&c, 0.0, [x[0], x[1] + eps], eps);
            assert_eq!(a, b);
            assert_eq!(a, d);
        }
    }

    #[test]
    fn builtins_are_symmetric_coercive_and_periodic() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let coeffs = [
            OscillatoryCoefficient::constant(0.3),
            OscillatoryCoefficient::sinusoidal(0.1),
            OscillatoryCoefficient::checkerboard(0.1, 0.3),
            OscillatoryCoefficient::matrix([2.0, 0.5, 0.5, 1.0]),
        ];
        for c in &coeffs {
            for _ in 0..1000 {
                let t: f64 = rng.gen_range(0.0..2.0);
                let x = [rng.gen::<f64>(), rng.gen::<f64>()];
                let y = [rng.gen::<f64>(), rng.gen::<f64>()];
                let xi = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
                let m = c.eval(t, x, y);
                assert!((m[1] - m[2]).abs() <= 1e-14);
                let q = xi[0] * (m[0] * xi[0] + m[1] * xi[1]) + xi[1] * (m[2] * xi[0] + m[3] * xi[1]);
                assert!(q >= c.alpha * (xi[0] * xi[0] + xi[1] * xi[1]) - 1e-12, "{}", c.name());
                assert!(m.iter().all(|v| v.abs() <= c.bound + 1e-14));
                let shifted = c.eval(t, x, [y[0] + 1.0, y[1]]);
                let shifted2 = c.eval(t, x, [y[0], y[1] - 1.0]);
                for k in 0..4 {
                    assert!((shifted[k] - m[k]).abs() < 1e-12);
                    assert!((shifted2[k] - m[k]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn eigen_helpers() {
        assert!((min_eigenvalue([2.0, 1.0, 1.0, 2.0]) - 1.0).abs() < 1e-14);
        assert!((spectral_norm([2.0, 1.0, 1.0, 2.0]) - 3.0).abs() < 1e-14);
    }
}
