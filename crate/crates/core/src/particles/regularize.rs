//! Velocity truncation and phase-space mollification of the initial density.

use std::sync::Arc;

use super::Density;
use crate::error::{Error, Result};
use crate::fields::interp::bump;
use crate::fields::Grid;

/// Regularisation strength `lambda` in `(0, 1]`; `quad` is the number of
/// quadrature nodes per phase-space dimension for the mollifier.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegularizationParams {
    pub lambda: f64,
    pub quad: usize,
}

impl RegularizationParams {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda <= 1.0) {
            return Err(Error::Precondition(format!("lambda must lie in (0, 1], got {lambda}")));
        }
        Ok(Self { lambda, quad: 6 })
    }

    pub fn with_quadrature(mut self, quad: usize) -> Self {
        self.quad = quad.max(1);
        self
    }

    /// `1` for `|v| <= 1/lambda`, `0` for `|v| >= 2/lambda`, smooth and monotone between.
    pub fn truncation(&self, v: [f64; 2]) -> f64 {
        truncation_profile(self.lambda * (v[0] * v[0] + v[1] * v[1]).sqrt())
    }

    /// Mollifier radius in both position and velocity.
    pub fn radius(&self) -> f64 {
        self.lambda
    }
}

fn smooth_step_piece(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else {
        (-1.0 / s).exp()
    }
}

/// Smooth cutoff in `r`: 1 below 1, 0 above 2.
pub fn truncation_profile(r: f64) -> f64 {
    if r <= 1.0 {
        1.0
    } else if r >= 2.0 {
        0.0
    } else {
        let a = smooth_step_piece(2.0 - r);
        let b = smooth_step_piece(r - 1.0);
        a / (a + b)
    }
}

/// Returns `(x, v) -> truncation(v) * (f0 * Theta)(x, v)` where `Theta` is a
/// product bump of radius `lambda` in all four variables and `f0` is extended
/// by zero outside `domain`. The convolution uses a midpoint rule with
/// weights normalised to unit mass.
pub fn regularize_initial(f0: &Density, domain: Grid, params: RegularizationParams) -> Density {
    let q = params.quad;
    let r = params.radius();
    let nodes: Vec<(f64, f64)> = (0..q)
        .map(|i| {
            let s = -1.0 + (2 * i + 1) as f64 / q as f64;
            (s * r, bump(s))
        })
        .collect();
    let total: f64 = nodes.iter().map(|n| n.1).sum();
    let nodes: Vec<(f64, f64)> = nodes.into_iter().map(|(z, w)| (z, w / total)).collect();
    let f0 = f0.clone();
    Arc::new(move |x, v| {
        let gamma = params.truncation(v);
        if gamma == 0.0 {
            return 0.0;
        }
        let mut acc = 0.0;
        for &(a, wa) in &nodes {
            let x1 = x[0] - a;
            if x1 < 0.0 || x1 > domain.lx {
                continue;
            }
            for &(b, wb) in &nodes {
                let x2 = x[1] - b;
                if x2 < 0.0 || x2 > domain.ly {
                    continue;
                }
                for &(c, wc) in &nodes {
                    for &(d, wd) in &nodes {
                        acc += wa * wb * wc * wd * f0([x1, x2], [v[0] - c, v[1] - d]);
                    }
                }
            }
        }
        gamma * acc
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lambda_range_is_enforced() {
        assert!(RegularizationParams::new(0.0).is_err());
        assert!(RegularizationParams::new(1.5).is_err());
        assert!(RegularizationParams::new(1.0).is_ok());
    }

    #[test]
    fn truncation_profile_is_monotone_in_unit_interval() {
        let mut prev = 1.0;
        for k in 0..=400 {
            let r = 0.8 + 1.4 * k as f64 / 400.0;
            let g = truncation_profile(r);
            assert!((0.0..=1.0).contains(&g));
            assert!(g <= prev);
            prev = g;
        }
        assert_eq!(truncation_profile(1.0), 1.0);
        assert_eq!(truncation_profile(2.0), 0.0);
    }

    #[test]
    fn zero_density_stays_zero() {
        let g = Grid::unit(8).unwrap();
        let f = regularize_initial(&crate::particles::InitialData::zero_density(), g, RegularizationParams::new(0.5).unwrap());
        assert_eq!(f([0.5, 0.5], [0.1, 0.0]), 0.0);
    }

    #[test]
    fn locally_constant_density_is_preserved() {
        let g = Grid::unit(8).unwrap();
        let f0: Density = Arc::new(|x, v| {
            let dx = (x[0] - 0.5).powi(2) + (x[1] - 0.5).powi(2);
            let dv = v[0] * v[0] + v[1] * v[1];
            if dx < 0.16 && dv < 4.0 {
                3.0
            } else {
                0.0
            }
        });
        let p = RegularizationParams::new(0.1).unwrap();
        let f = regularize_initial(&f0, g, p);
        assert!((f([0.5, 0.5], [0.2, 0.1]) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn large_speeds_are_cut_off() {
        let g = Grid::unit(8).unwrap();
        let f0: Density = Arc::new(|x, v| (1.0 + x[0]) / (1.0 + v[0] * v[0] + v[1] * v[1]));
        let f = regularize_initial(&f0, g, RegularizationParams::new(0.5).unwrap());
        assert_eq!(f([0.5, 0.5], [4.0, 0.0]), 0.0);
        assert!(f([0.5, 0.5], [1.0, 0.0]) > 0.0);
    }
}
