//! Conjugate gradients and the fast spectral solvers used as preconditioners.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Stopping rule shared by every CG solve in the crate.
#[derive(Clone, Copy, Debug)]
pub struct CgOptions {
    /// Relative tolerance on the Euclidean residual norm.
    pub rel_tol: f64,
    /// Absolute tolerance on the max-norm of the residual; both must hold.
    pub abs_tol: f64,
    pub max_iter: usize,
}

impl CgOptions {
    pub fn new(rel_tol: f64, abs_tol: f64, max_iter: usize) -> Self {
        Self { rel_tol, abs_tol, max_iter }
    }

    /// Relative criterion only.
    pub fn relative(rel_tol: f64, max_iter: usize) -> Self {
        Self { rel_tol, abs_tol: f64::INFINITY, max_iter }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CgStats {
    pub iterations: usize,
    pub residual: f64,
}

/// Preconditioned conjugate gradients for a symmetric positive (semi)definite
/// operator. `x` holds the initial guess and receives the solution. For singular
/// operators the caller supplies right-hand sides in the range and a
/// preconditioner that maps into it.
pub fn pcg(
    name: &'static str,
    apply: impl Fn(&[f64], &mut [f64]),
    precond: impl Fn(&[f64], &mut [f64]),
    b: &[f64],
    x: &mut [f64],
    opts: CgOptions,
) -> Result<CgStats> {
    let n = b.len();
    if b.iter().all(|v| *v == 0.0) {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(CgStats::default());
    }
    let mut r = vec![0.0; n];
    let mut ap = vec![0.0; n];
    apply(x, &mut ap);
    for k in 0..n {
        r[k] = b[k] - ap[k];
    }
    let b_norm = dot(b, b).sqrt();
    let done = |r: &[f64]| {
        let rn = dot(r, r).sqrt();
        (rn <= opts.rel_tol * b_norm || rn == 0.0) && norm_inf(r) <= opts.abs_tol
    };
    if done(&r) {
        return Ok(CgStats { iterations: 0, residual: norm_inf(&r) });
    }
    let mut z = vec![0.0; n];
    precond(&r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    for it in 1..=opts.max_iter {
        apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::Solver { solver: name, residual: norm_inf(&r), iterations: it });
        }
        let a = rz / pap;
        for k in 0..n {
            x[k] += a * p[k];
            r[k] -= a * ap[k];
        }
        if done(&r) {
            return Ok(CgStats { iterations: it, residual: norm_inf(&r) });
        }
        precond(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for k in 0..n {
            p[k] = z[k] + beta * p[k];
        }
    }
    Err(Error::Solver { solver: name, residual: norm_inf(&r), iterations: opts.max_iter })
}

/// Boundary condition of a [`SpectralSolver`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpectralKind {
    /// Interior vertices of an `nx x ny` grid with homogeneous Dirichlet data,
    /// i.e. `(nx - 1) x (ny - 1)` unknowns diagonalised by the sine transform.
    Dirichlet,
    /// `nx x ny` unknowns on a torus, diagonalised by the Fourier transform.
    Periodic,
}

/// Solves `f(L) x = b` for the standard 5-point Laplacian `L` (positive sign
/// convention) and any scalar function `f` of its eigenvalues.
pub struct SpectralSolver {
    kind: SpectralKind,
    mx: usize,
    my: usize,
    eig_x: Vec<f64>,
    eig_y: Vec<f64>,
    fft_x: Arc<dyn Fft<f64>>,
    fft_y: Arc<dyn Fft<f64>>,
    ifft_x: Arc<dyn Fft<f64>>,
    ifft_y: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for SpectralSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralSolver").field("kind", &self.kind).field("mx", &self.mx).field("my", &self.my).finish()
    }
}

impl SpectralSolver {
    pub fn new(kind: SpectralKind, nx: usize, ny: usize, dx: f64, dy: f64) -> Self {
        let mut planner = FftPlanner::new();
        let (mx, my, lx, ly) = match kind {
            SpectralKind::Dirichlet => (nx - 1, ny - 1, 2 * nx, 2 * ny),
            SpectralKind::Periodic => (nx, ny, nx, ny),
        };
        let eig = |m: usize, n: usize, h: f64| -> Vec<f64> {
            (0..m)
                .map(|k| {
                    let theta = match kind {
                        SpectralKind::Dirichlet => std::f64::consts::PI * (k + 1) as f64 / (2 * n) as f64,
                        SpectralKind::Periodic => std::f64::consts::PI * k as f64 / n as f64,
                    };
                    4.0 / (h * h) * theta.sin().powi(2)
                })
                .collect()
        };
        Self {
            kind,
            mx,
            my,
            eig_x: eig(mx, nx, dx),
            eig_y: eig(my, ny, dy),
            fft_x: planner.plan_fft_forward(lx),
            fft_y: planner.plan_fft_forward(ly),
            ifft_x: planner.plan_fft_inverse(lx),
            ifft_y: planner.plan_fft_inverse(ly),
        }
    }

    pub fn len(&self) -> usize {
        self.mx * self.my
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Eigenvalue of the Laplacian for mode `(kx, ky)`.
    #[inline]
    pub fn eigenvalue(&self, kx: usize, ky: usize) -> f64 {
        self.eig_x[kx] + self.eig_y[ky]
    }

    /// `x = g(L) b` where `g` maps a Laplacian eigenvalue to a multiplier. Row-major
    /// input of length `mx * my`.
    pub fn apply_fn(&self, b: &[f64], x: &mut [f64], g: impl Fn(f64) -> f64) {
        match self.kind {
            SpectralKind::Dirichlet => self.apply_dirichlet(b, x, g),
            SpectralKind::Periodic => self.apply_periodic(b, x, g),
        }
    }

    fn dst_rows(&self, data: &mut [f64], m: usize, rows: usize, fft: &Arc<dyn Fft<f64>>) {
        let n = m + 1;
        let mut buf = vec![Complex64::new(0.0, 0.0); 2 * n];
        for r in 0..rows {
            let row = &mut data[r * m..(r + 1) * m];
            buf.iter_mut().for_each(|c| *c = Complex64::new(0.0, 0.0));
            for j in 1..n {
                buf[j] = Complex64::new(row[j - 1], 0.0);
                buf[2 * n - j] = Complex64::new(-row[j - 1], 0.0);
            }
            fft.process(&mut buf);
            for k in 1..n {
                row[k - 1] = -0.5 * buf[k].im;
            }
        }
    }

    fn transpose(data: &[f64], rows: usize, cols: usize) -> Vec<f64> {
        let mut out = vec![0.0; data.len()];
        for r in 0..rows {
            for c in 0..cols {
                out[c * rows + r] = data[r * cols + c];
            }
        }
        out
    }

    fn apply_dirichlet(&self, b: &[f64], x: &mut [f64], g: impl Fn(f64) -> f64) {
        let (mx, my) = (self.mx, self.my);
        let mut d = b.to_vec();
        self.dst_rows(&mut d, mx, my, &self.fft_x);
        let mut t = Self::transpose(&d, my, mx);
        self.dst_rows(&mut t, my, mx, &self.fft_y);
        let scale = (2.0 / (mx + 1) as f64) * (2.0 / (my + 1) as f64);
        for kx in 0..mx {
            for ky in 0..my {
                t[kx * my + ky] *= scale * g(self.eigenvalue(kx, ky));
            }
        }
        self.dst_rows(&mut t, my, mx, &self.fft_y);
        let d = Self::transpose(&t, mx, my);
        x.copy_from_slice(&d);
        self.dst_rows(x, mx, my, &self.fft_x);
    }

    fn apply_periodic(&self, b: &[f64], x: &mut [f64], g: impl Fn(f64) -> f64) {
        let (mx, my) = (self.mx, self.my);
        let mut c: Vec<Complex64> = b.iter().map(|v| Complex64::new(*v, 0.0)).collect();
        for row in c.chunks_mut(mx) {
            self.fft_x.process(row);
        }
        let mut t = vec![Complex64::new(0.0, 0.0); mx * my];
        for r in 0..my {
            for col in 0..mx {
                t[col * my + r] = c[r * mx + col];
            }
        }
        for col in t.chunks_mut(my) {
            self.fft_y.process(col);
        }
        let scale = 1.0 / (mx * my) as f64;
        for kx in 0..mx {
            for ky in 0..my {
                let lam = self.eigenvalue(kx, ky);
                let m = if kx == 0 && ky == 0 { 0.0 } else { g(lam) };
                t[kx * my + ky] *= scale * m;
            }
        }
        for col in t.chunks_mut(my) {
            self.ifft_y.process(col);
        }
        for r in 0..my {
            for col in 0..mx {
                c[r * mx + col] = t[col * my + r];
            }
        }
        for row in c.chunks_mut(mx) {
            self.ifft_x.process(row);
        }
        for (xi, ci) in x.iter_mut().zip(&c) {
            *xi = ci.re;
        }
    }
}
