//! Trapezoidal quadrature of the memory stress
//! `sigma(t_n) = int_0^{t_n} A1(t_n - s) grad u(s) ds`.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::fields::coefficient::{sample_coefficient, spectral_norm, Mat2};
use crate::fields::viscous::{tensor_apply, Tensor4};
use crate::fields::{GradientField, Grid, OscillatoryCoefficient, TensorField};

/// Velocity-gradient history `grad u^0, grad u^1, ...` on a uniform time grid.
///
/// With `retain == false` only the count is kept, which is all a zero kernel needs.
#[derive(Clone, Debug)]
pub struct MemoryHistory {
    pub dt: f64,
    snapshots: Vec<GradientField>,
    count: usize,
    retain: bool,
}

impl MemoryHistory {
    pub fn new(dt: f64, retain: bool) -> Self {
        Self { dt, snapshots: Vec::new(), count: 0, retain }
    }

    pub fn push(&mut self, g: GradientField) {
        if self.retain {
            self.snapshots.push(g);
        }
        self.count += 1;
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn retains(&self) -> bool {
        self.retain
    }

    pub fn get(&self, m: usize) -> Option<&GradientField> {
        self.snapshots.get(m)
    }

    pub fn last(&self) -> Option<&GradientField> {
        self.snapshots.last()
    }

    /// `sum_{m <= n} dt * ||grad u^m||^2` over the stored snapshots.
    pub fn gradient_energy(&self) -> f64 {
        self.snapshots.iter().map(|g| self.dt * g.norm_sq()).sum()
    }
}

/// Memory kernel acting on the velocity gradient.
#[derive(Clone, Debug)]
pub enum MemoryKernel {
    Zero,
    /// `A1(t, x, x / eps)` sampled at the cell centres.
    Fine { coeff: OscillatoryCoefficient, eps: f64 },
    /// Spatially uniform tensors at lags `0, dt, 2 dt, ...`.
    Effective(Vec<Tensor4>),
}

impl MemoryKernel {
    pub fn is_zero(&self) -> bool {
        match self {
            MemoryKernel::Zero => true,
            MemoryKernel::Fine { coeff, .. } => coeff.is_zero(),
            MemoryKernel::Effective(seq) => seq.iter().all(|c| c.iter().all(|v| *v == 0.0)),
        }
    }

    /// Upper bound on the pointwise operator norm of the kernel over all lags.
    pub fn operator_bound(&self) -> f64 {
        match self {
            MemoryKernel::Zero => 0.0,
            MemoryKernel::Fine { coeff, .. } => 2.0 * coeff.bound,
            MemoryKernel::Effective(seq) => seq.iter().map(tensor_norm_bound).fold(0.0, f64::max),
        }
    }
}

/// Frobenius norm of a tensor, an upper bound on its operator norm.
fn tensor_norm_bound(c: &Tensor4) -> f64 {
    c.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Kernel values at one lag.
#[derive(Clone, Debug, PartialEq)]
pub enum LagSample {
    Zero,
    Cells(Vec<Mat2>),
    Uniform(Tensor4),
}

/// Samples the kernel on a grid with a per-lag cache.
#[derive(Clone, Debug)]
pub struct KernelSampler {
    kernel: MemoryKernel,
    grid: Grid,
    dt: f64,
    cache: HashMap<usize, LagSample>,
}

impl KernelSampler {
    pub fn new(kernel: MemoryKernel, grid: Grid, dt: f64) -> Self {
        Self { kernel, grid, dt, cache: HashMap::new() }
    }

    pub fn kernel(&self) -> &MemoryKernel {
        &self.kernel
    }

    /// Kernel at lag `k * dt`.
    pub fn lag(&mut self, k: usize) -> Result<&LagSample> {
        if !self.cache.contains_key(&k) {
            let s = self.sample(k)?;
            self.cache.insert(k, s);
        }
        Ok(&self.cache[&k])
    }

    fn sample(&self, k: usize) -> Result<LagSample> {
        let t = k as f64 * self.dt;
        Ok(match &self.kernel {
            MemoryKernel::Zero => LagSample::Zero,
            MemoryKernel::Fine { coeff, eps } => {
                if coeff.is_zero() {
                    LagSample::Zero
                } else {
                    let g = self.grid;
                    let mut cells = Vec::with_capacity(g.n_cells());
                    for j in 0..g.ny {
                        for i in 0..g.nx {
                            cells.push(sample_coefficient(coeff, t, g.cell_center(i, j), *eps));
                        }
                    }
                    LagSample::Cells(cells)
                }
            }
            MemoryKernel::Effective(seq) => match seq.get(k) {
                Some(c) => LagSample::Uniform(*c),
                None => {
                    return Err(Error::State(format!("effective memory kernel has {} lags, lag {k} requested", seq.len())))
                }
            },
        })
    }

    /// Largest spectral norm of the sampled kernel at lag `k`.
    pub fn lag_norm(&mut self, k: usize) -> Result<f64> {
        Ok(match self.lag(k)? {
            LagSample::Zero => 0.0,
            LagSample::Cells(c) => c.iter().map(|m| spectral_norm(*m)).fold(0.0, f64::max),
            LagSample::Uniform(c) => tensor_norm_bound(c),
        })
    }
}

/// Row-wise action `G -> G A` of a symmetric matrix on `[g11, g12, g21, g22]`.
#[inline]
fn row_apply(a: &Mat2, g: &[f64; 4]) -> [f64; 4] {
    [a[0] * g[0] + a[1] * g[1], a[2] * g[0] + a[3] * g[1], a[0] * g[2] + a[1] * g[3], a[2] * g[2] + a[3] * g[3]]
}

/// `sigma_n = sum_{m=0}^{n} c_m dt A1(t_n - t_m) grad u^m` with trapezoid
/// weights `c_0 = c_n = 1/2`, at corner samples. `t` must equal `(len - 1) dt`.
pub fn memory_convolution(hist: &MemoryHistory, sampler: &mut KernelSampler, t: f64) -> Result<TensorField> {
    if hist.is_empty() {
        return Err(Error::State("memory history is empty".into()));
    }
    let n = hist.len() - 1;
    if (t - n as f64 * hist.dt).abs() > 1e-9 * hist.dt.max(t.abs()) {
        return Err(Error::State(format!("memory requested at t = {t} but history ends at {}", n as f64 * hist.dt)));
    }
    if (sampler.dt - hist.dt).abs() > 1e-15 * hist.dt {
        return Err(Error::State("kernel sampler and history use different time steps".into()));
    }
    let grid = sampler.grid;
    let mut out = TensorField::zeros(grid);
    if n == 0 || sampler.kernel.is_zero() {
        return Ok(out);
    }
    if !hist.retains() {
        return Err(Error::State("memory history was not retained for a nonzero kernel".into()));
    }
    for m in 0..=n {
        let w = if m == 0 || m == n { 0.5 * hist.dt } else { hist.dt };
        let g = hist.get(m).expect("retained history");
        if g.mac.grid != grid {
            return Err(Error::State("history grid differs from kernel grid".into()));
        }
        let lag = sampler.lag(n - m)?;
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                let c = grid.cell_index(i, j);
                for s in 0..4 {
                    let gs = g.corner(i, j, s);
                    let sig = match lag {
                        LagSample::Zero => continue,
                        LagSample::Cells(a) => row_apply(&a[c], &gs),
                        LagSample::Uniform(ct) => tensor_apply(ct, &gs),
                    };
                    let o = &mut out.data[4 * c + s];
                    for k in 0..4 {
                        o[k] += w * sig[k];
                    }
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::viscous::row_action;
    use crate::fields::Mac;

    #[test]
    fn row_apply_matches_tensor() {
        let a = [1.3, -0.4, -0.4, 2.1];
        let g = [0.2, -1.0, 0.7, 0.5];
        let x = row_apply(&a, &g);
        let y = tensor_apply(&row_action(a), &g);
        for k in 0..4 {
            assert!((x[k] - y[k]).abs() < 1e-15);
        }
    }

    #[test]
    fn constant_kernel_and_gradient_integrates_exactly() {
        let grid = Grid::unit(4).unwrap();
        let mac = Mac::no_slip(grid);
        let dt = 0.1;
        let g = [1.0, 2.0, -3.0, 0.5];
        let mut hist = MemoryHistory::new(dt, true);
        let mut sampler =
            KernelSampler::new(MemoryKernel::Fine { coeff: OscillatoryCoefficient::constant(2.0), eps: 0.5 }, grid, dt);
        for _ in 0..6 {
            hist.push(GradientField::uniform(mac, g));
        }
        let s = memory_convolution(&hist, &mut sampler, 0.5).unwrap();
        for v in &s.data {
            for k in 0..4 {
                assert!((v[k] - 2.0 * 0.5 * g[k]).abs() < 1e-13);
            }
        }
        assert!(memory_convolution(&hist, &mut sampler, 0.4).is_err());
    }

    #[test]
    fn elided_history_only_counts() {
        let grid = Grid::unit(4).unwrap();
        let mut hist = MemoryHistory::new(0.1, false);
        hist.push(GradientField::zeros(Mac::no_slip(grid)));
        hist.push(GradientField::zeros(Mac::no_slip(grid)));
        assert_eq!(hist.len(), 2);
        assert!(hist.get(0).is_none());
        let mut zero = KernelSampler::new(MemoryKernel::Zero, grid, 0.1);
        assert_eq!(memory_convolution(&hist, &mut zero, 0.1).unwrap().max_abs(), 0.0);
        let mut nonzero = KernelSampler::new(MemoryKernel::Effective(vec![row_action([1.0, 0.0, 0.0, 1.0]); 2]), grid, 0.1);
        assert!(matches!(memory_convolution(&hist, &mut nonzero, 0.1), Err(Error::State(_))));
    }
}
