//! Periodic cell problem, effective viscosity tensors and their audits.
//!
//! The corrector `chi_xi` minimises `1/2 mean (xi + grad chi) : C (xi + grad chi)`
//! over mean-free, discretely divergence-free periodic fields, written as
//! `chi = curl psi` with a periodic vertex stream function.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fields::coefficient::Dependence;
use crate::fields::stream::{curl, curl_transpose, laplace_solver};
use crate::fields::viscous::{frobenius, gradient, stress_divergence, tensor_apply, Tensor4};
use crate::fields::{GradientField, Grid, Mac, OscillatoryCoefficient, ScalarField, ViscosityField, ViscousOperator};
use crate::linalg::{pcg, CgOptions, SpectralKind, SpectralSolver};

/// The four matrices `e_q` with a single unit entry, ordered `[g11, g12, g21, g22]`.
pub const BASIS: [[f64; 4]; 4] = [[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0]];

/// Unit-cell coefficients and resolution.
#[derive(Clone, Debug)]
pub struct CellProblemSpec {
    pub a0: OscillatoryCoefficient,
    pub a1: OscillatoryCoefficient,
    pub ny_cell: usize,
    pub alpha: f64,
    /// Macroscopic point at which `A(t, x, y)` is frozen.
    pub x: [f64; 2],
    /// Relative tolerance of the stream-function solve.
    pub tol: f64,
}

impl CellProblemSpec {
    pub fn new(a0: OscillatoryCoefficient, a1: OscillatoryCoefficient, ny_cell: usize) -> Result<Self> {
        if ny_cell < 4 {
            return Err(Error::Grid(format!("cell resolution {ny_cell} is below 4")));
        }
        if !(a0.alpha > 0.0) {
            return Err(Error::Precondition(format!("instantaneous viscosity '{}' is not coercive", a0.name())));
        }
        let alpha = a0.alpha;
        Ok(Self { a0, a1, ny_cell, alpha, x: [0.0; 2], tol: 1e-12 })
    }

    pub fn grid(&self) -> Grid {
        Grid::unit(self.ny_cell).expect("validated resolution")
    }

    pub fn mac(&self) -> Mac {
        Mac::periodic(self.grid())
    }

    pub fn viscosity(&self) -> ViscosityField {
        ViscosityField::on_cell(self.grid(), &self.a0, 0.0, self.x)
    }

    /// Smallest eigenvalue of the sampled `A0` over the cell centres.
    pub fn sampled_alpha(&self) -> f64 {
        let g = self.grid();
        let mut m = f64::INFINITY;
        for j in 0..g.ny {
            for i in 0..g.nx {
                m = m.min(crate::fields::coefficient::min_eigenvalue(self.a0.eval(0.0, self.x, g.cell_center(i, j))));
            }
        }
        m
    }
}

/// Corrector for one right-hand side.
#[derive(Clone, Debug)]
pub struct CellSolution {
    /// Periodic MAC velocity dofs.
    pub chi: Vec<f64>,
    pub p: ScalarField,
    pub grad: GradientField,
    pub iterations: usize,
    /// Max-norm momentum residual left after the pressure solve.
    pub residual: f64,
}

/// Solver for `-div(C grad chi + S) + grad p = 0`, `div chi = 0` on the periodic cell.
pub struct CellSolver {
    mac: Mac,
    op: ViscousOperator,
    lap: SpectralSolver,
    cells: SpectralSolver,
    nu_bar: f64,
    tol: f64,
}

impl std::fmt::Debug for CellSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CellSolver").field("grid", &self.mac.grid).finish()
    }
}

impl CellSolver {
    pub fn new(mac: Mac, visc: ViscosityField, tol: f64) -> Self {
        let g = mac.grid;
        let nu_bar = visc.mean_scalar();
        Self {
            mac,
            op: ViscousOperator::new(mac, visc),
            lap: laplace_solver(&mac),
            cells: SpectralSolver::new(SpectralKind::Periodic, g.nx, g.ny, g.dx(), g.dy()),
            nu_bar,
            tol,
        }
    }

    pub fn for_spec(spec: &CellProblemSpec) -> Self {
        Self::new(spec.mac(), spec.viscosity(), spec.tol)
    }

    pub fn mac(&self) -> Mac {
        self.mac
    }

    pub fn viscosity(&self) -> &ViscosityField {
        &self.op.visc
    }

    /// Corrector balancing the corner stress field `stress`.
    pub fn solve_stress(&self, stress: &[[f64; 4]]) -> Result<CellSolution> {
        let mac = self.mac;
        let g = mac.grid;
        let n = mac.n_dofs();
        let area = g.cell_area();
        let mut b = vec![0.0; n];
        stress_divergence(&mac, stress, &mut b);
        b.iter_mut().for_each(|v| *v = -*v / area);
        let mut rhs = vec![0.0; g.n_cells()];
        curl_transpose(&mac, &b, &mut rhs);
        let op = &self.op;
        let apply = |psi: &[f64], out: &mut [f64]| {
            let mut u = vec![0.0; n];
            let mut ku = vec![0.0; n];
            curl(&mac, psi, &mut u);
            op.apply(&u, &mut ku);
            curl_transpose(&mac, &ku, out);
        };
        let nu = self.nu_bar;
        let precond = |r: &[f64], z: &mut [f64]| self.lap.apply_fn(r, z, |l| 1.0 / (nu * l * l));
        let mut psi = vec![0.0; g.n_cells()];
        let opts = CgOptions::relative(self.tol, 20 * g.n_cells());
        let stats = pcg("cell-problem CG", apply, precond, &rhs, &mut psi, opts)?;
        let mut chi = vec![0.0; n];
        curl(&mac, &psi, &mut chi);

        // the unbalanced momentum is a discrete gradient; recover the pressure from it
        let mut kchi = vec![0.0; n];
        self.op.apply(&chi, &mut kchi);
        let r: Vec<f64> = (0..n).map(|k| b[k] - kchi[k]).collect();
        let div = periodic_divergence(&mac, &r);
        let mut p = vec![0.0; g.n_cells()];
        self.cells.apply_fn(&div, &mut p, |l| -1.0 / l);
        let p = ScalarField { grid: g, data: p };
        let gp = periodic_gradient(&mac, &p);
        let residual = r.iter().zip(&gp).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        let grad = gradient(&mac, &chi);
        Ok(CellSolution { chi, p, grad, iterations: stats.iterations, residual })
    }

    /// Corrector of the macroscopic gradient `xi`.
    pub fn solve(&self, xi: [f64; 4]) -> Result<CellSolution> {
        let g = self.mac.grid;
        let mut stress = Vec::with_capacity(4 * g.n_cells());
        for c in &self.op.visc.data {
            let s = tensor_apply(c, &xi);
            stress.extend_from_slice(&[s; 4]);
        }
        self.solve_stress(&stress)
    }
}

/// Cell divergence of a periodic MAC field.
pub fn periodic_divergence(mac: &Mac, u: &[f64]) -> Vec<f64> {
    let g = mac.grid;
    let mut out = vec![0.0; g.n_cells()];
    for j in 0..g.ny {
        for i in 0..g.nx {
            out[g.cell_index(i, j)] = (u[mac.u_idx(i + 1, j)] - u[mac.u_idx(i, j)]) / g.dx()
                + (u[mac.v_idx(i, j + 1)] - u[mac.v_idx(i, j)]) / g.dy();
        }
    }
    out
}

/// Face gradient of a periodic cell scalar.
pub fn periodic_gradient(mac: &Mac, p: &ScalarField) -> Vec<f64> {
    let g = mac.grid;
    let (nx, ny) = (g.nx, g.ny);
    let mut out = vec![0.0; mac.n_dofs()];
    for j in 0..ny {
        for i in 0..nx {
            let c = p.data[g.cell_index(i, j)];
            out[mac.u_idx(i, j)] = (c - p.data[g.cell_index((i + nx - 1) % nx, j)]) / g.dx();
            out[mac.v_idx(i, j)] = (c - p.data[g.cell_index(i, (j + ny - 1) % ny)]) / g.dy();
        }
    }
    out
}

/// Correctors of the four basis matrices.
#[derive(Clone, Debug)]
pub struct Corrector {
    pub mac: Mac,
    pub basis: Vec<CellSolution>,
}

impl Corrector {
    /// `chi_xi` by linearity.
    pub fn combine(&self, xi: [f64; 4]) -> Vec<f64> {
        let mut out = vec![0.0; self.mac.n_dofs()];
        for (q, sol) in self.basis.iter().enumerate() {
            if xi[q] != 0.0 {
                for (o, c) in out.iter_mut().zip(&sol.chi) {
                    *o += xi[q] * c;
                }
            }
        }
        out
    }

    pub fn max_residual(&self) -> f64 {
        self.basis.iter().map(|s| s.residual).fold(0.0, f64::max)
    }

    /// Largest cell mean of any corrector component.
    pub fn max_mean(&self) -> f64 {
        let nu = self.mac.n_u();
        let mut m = 0.0f64;
        for s in &self.basis {
            let mu = s.chi[..nu].iter().sum::<f64>() / nu as f64;
            let mv = s.chi[nu..].iter().sum::<f64>() / (s.chi.len() - nu) as f64;
            m = m.max(mu.abs()).max(mv.abs());
        }
        m
    }

    pub fn max_divergence(&self) -> f64 {
        self.basis
            .iter()
            .map(|s| periodic_divergence(&self.mac, &s.chi).iter().fold(0.0f64, |m, d| m.max(d.abs())))
            .fold(0.0, f64::max)
    }
}

/// Solves the four basis cell problems in parallel.
pub fn solve_correctors(spec: &CellProblemSpec) -> Result<(CellSolver, Corrector)> {
    let solver = CellSolver::for_spec(spec);
    let basis = BASIS.par_iter().map(|xi| solver.solve(*xi)).collect::<Result<Vec<_>>>()?;
    let mac = solver.mac();
    Ok((solver, Corrector { mac, basis }))
}

/// Single-corrector entry point.
pub fn solve_cell_problem(spec: &CellProblemSpec, xi: [f64; 4]) -> Result<CellSolution> {
    CellSolver::for_spec(spec).solve(xi)
}

/// `mean over corners of C (e_q + grad chi_q)` as column `q`.
fn cell_average(visc: &ViscosityField, corr: &Corrector) -> Tensor4 {
    let g = corr.mac.grid;
    let mut out = [0.0; 16];
    let inv = 1.0 / (4 * g.n_cells()) as f64;
    for (q, sol) in corr.basis.iter().enumerate() {
        let mut acc = [0.0; 4];
        for j in 0..g.ny {
            for i in 0..g.nx {
                let c = &visc.data[g.cell_index(i, j)];
                for s in 0..4 {
                    let mut e = sol.grad.corner(i, j, s);
                    e[q] += 1.0;
                    let sig = tensor_apply(c, &e);
                    for p in 0..4 {
                        acc[p] += sig[p];
                    }
                }
            }
        }
        for p in 0..4 {
            out[4 * p + q] = acc[p] * inv;
        }
    }
    out
}

/// Effective instantaneous viscosity.
pub fn effective_c0(spec: &CellProblemSpec, corr: &Corrector) -> Tensor4 {
    cell_average(&spec.viscosity(), corr)
}

/// Effective memory kernel at `t_n = n dt`, `n = 0..=n_steps`, from the
/// corrector of the instantaneous problem.
pub fn effective_c1(spec: &CellProblemSpec, corr: &Corrector, dt: f64, n_steps: usize) -> Vec<Tensor4> {
    if spec.a1.is_zero() {
        return vec![[0.0; 16]; n_steps + 1];
    }
    (0..=n_steps)
        .into_par_iter()
        .map(|n| cell_average(&ViscosityField::on_cell(spec.grid(), &spec.a1, n as f64 * dt, spec.x), corr))
        .collect()
}

/// Effective tensors and the lag spacing of the memory sequence.
#[derive(Clone, Debug, PartialEq)]
pub struct EffectiveTensors {
    pub c0: Tensor4,
    pub c1: Vec<Tensor4>,
    pub dt: f64,
}

impl EffectiveTensors {
    pub fn compute(spec: &CellProblemSpec, dt: f64, n_steps: usize) -> Result<(Self, Corrector)> {
        let (_, corr) = solve_correctors(spec)?;
        let c0 = effective_c0(spec, &corr);
        let c1 = effective_c1(spec, &corr, dt, n_steps);
        Ok((Self { c0, c1, dt }, corr))
    }

    /// Coercivity constant `min_xi <C0 xi, xi> / |xi|^2` of the symmetric part.
    pub fn alpha(&self) -> f64 {
        min_eigenvalue_sym4(&self.c0)
    }
}

/// `<C xi, eta>`.
pub fn quadratic_form(c: &Tensor4, xi: &[f64; 4], eta: &[f64; 4]) -> f64 {
    frobenius(&tensor_apply(c, xi), eta)
}

/// Largest `|C[p][q] - C[q][p]|`, the asymmetry of the quadratic form.
pub fn asymmetry(c: &Tensor4) -> f64 {
    let mut m = 0.0f64;
    for p in 0..4 {
        for q in 0..4 {
            m = m.max((c[4 * p + q] - c[4 * q + p]).abs());
        }
    }
    m
}

/// Smallest eigenvalue of the symmetric part of `c` by Jacobi rotations.
pub fn min_eigenvalue_sym4(c: &Tensor4) -> f64 {
    let mut a = [[0.0; 4]; 4];
    for p in 0..4 {
        for q in 0..4 {
            a[p][q] = 0.5 * (c[4 * p + q] + c[4 * q + p]);
        }
    }
    for _ in 0..50 {
        let mut off = 0.0;
        for p in 0..4 {
            for q in p + 1..4 {
                off += a[p][q] * a[p][q];
            }
        }
        if off < 1e-30 {
            break;
        }
        for p in 0..4 {
            for q in p + 1..4 {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = 0.5 * (a[q][q] - a[p][p]) / a[p][q];
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let (cs, sn) = (1.0 / (t * t + 1.0).sqrt(), t / (t * t + 1.0).sqrt());
                for k in 0..4 {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = cs * akp - sn * akq;
                    a[k][q] = sn * akp + cs * akq;
                }
                for k in 0..4 {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = cs * apk - sn * aqk;
                    a[q][k] = sn * apk + cs * aqk;
                }
            }
        }
    }
    (0..4).map(|k| a[k][k]).fold(f64::INFINITY, f64::min)
}

/// Cell average of the sampled `A0` tensor (the Voigt bound).
pub fn voigt_bound(spec: &CellProblemSpec) -> Tensor4 {
    let v = spec.viscosity();
    let mut out = [0.0; 16];
    for c in &v.data {
        for k in 0..16 {
            out[k] += c[k];
        }
    }
    let n = v.data.len() as f64;
    out.iter_mut().for_each(|x| *x /= n);
    out
}

/// Outcome of the symmetry, coercivity and Voigt audits.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TensorAudit {
    pub asymmetry: f64,
    /// `min <C0 xi, xi> - alpha |xi|^2` over the samples (nonnegative when coercive).
    pub coercivity_margin: f64,
    /// `min <M(A0) xi, xi> - <C0 xi, xi>` over the samples (nonnegative under the bound).
    pub voigt_margin: f64,
    pub samples: usize,
}

impl TensorAudit {
    pub fn passes(&self, asym_tol: f64) -> bool {
        self.asymmetry <= asym_tol && self.coercivity_margin >= 0.0 && self.voigt_margin >= 0.0
    }
}

/// Audits `c0` against the coercivity constant `alpha` and the Voigt tensor at
/// the given matrices.
pub fn audit_c0(c0: &Tensor4, alpha: f64, voigt: &Tensor4, samples: &[[f64; 4]]) -> TensorAudit {
    let mut coercivity_margin = f64::INFINITY;
    let mut voigt_margin = f64::INFINITY;
    for xi in samples {
        let q = quadratic_form(c0, xi, xi);
        let n2 = frobenius(xi, xi);
        // relative slack for roundoff in the averaged sums
        coercivity_margin = coercivity_margin.min(q - alpha * n2 + 1e-12 * q.abs());
        let qv = quadratic_form(voigt, xi, xi);
        voigt_margin = voigt_margin.min(qv - q + 1e-12 * qv.abs());
    }
    TensorAudit { asymmetry: asymmetry(c0), coercivity_margin, voigt_margin, samples: samples.len() }
}

/// Effective stresses `sigma^n` of the memory-coupled cell problem driven by a
/// gradient impulse `xi` at `t = 0`: at step `n` the corrector balances the
/// explicit trapezoidal memory sum over the previous steps.
pub fn volterra_impulse_response(spec: &CellProblemSpec, xi: [f64; 4], dt: f64, n_steps: usize) -> Result<Vec<[f64; 4]>> {
    let solver = CellSolver::for_spec(spec);
    let g = spec.grid();
    let nc = g.n_cells();
    let inv = 1.0 / (4 * nc) as f64;
    let a0 = spec.viscosity();
    let kernel_fields: Vec<ViscosityField> = if spec.a1.is_zero() {
        Vec::new()
    } else {
        (0..=n_steps).map(|k| ViscosityField::on_cell(g, &spec.a1, k as f64 * dt, spec.x)).collect()
    };
    let mut grads: Vec<GradientField> = Vec::with_capacity(n_steps + 1);
    let mut out = Vec::with_capacity(n_steps + 1);
    for n in 0..=n_steps {
        let xin = if n == 0 { xi } else { [0.0; 4] };
        let mut mem = vec![[0.0; 4]; 4 * nc];
        if !kernel_fields.is_empty() {
            for (m, gm) in grads.iter().enumerate() {
                let w = if m == 0 { 0.5 * dt } else { dt };
                let a1 = &kernel_fields[n - m];
                let xim = if m == 0 { xi } else { [0.0; 4] };
                for j in 0..g.ny {
                    for i in 0..g.nx {
                        let c = g.cell_index(i, j);
                        for s in 0..4 {
                            let mut e = gm.corner(i, j, s);
                            for k in 0..4 {
                                e[k] += xim[k];
                            }
                            let sig = tensor_apply(&a1.data[c], &e);
                            for k in 0..4 {
                                mem[4 * c + s][k] += w * sig[k];
                            }
                        }
                    }
                }
            }
        }
        let mut stress = mem.clone();
        for c in 0..nc {
            let s0 = tensor_apply(&a0.data[c], &xin);
            for s in 0..4 {
                for k in 0..4 {
                    stress[4 * c + s][k] += s0[k];
                }
            }
        }
        let sol = solver.solve_stress(&stress)?;
        let mut sigma = [0.0; 4];
        for j in 0..g.ny {
            for i in 0..g.nx {
                let c = g.cell_index(i, j);
                for s in 0..4 {
                    let sg = tensor_apply(&a0.data[c], &sol.grad.corner(i, j, s));
                    for k in 0..4 {
                        sigma[k] += (sg[k] + stress[4 * c + s][k]) * inv;
                    }
                }
            }
        }
        out.push(sigma);
        grads.push(sol.grad);
    }
    Ok(out)
}

/// Successive differences of `C0` at increasing cell resolutions and their ratios.
#[derive(Clone, Debug, PartialEq)]
pub struct GridStudy {
    pub resolutions: Vec<usize>,
    pub c0: Vec<Tensor4>,
    pub gaps: Vec<f64>,
    pub ratios: Vec<f64>,
}

pub fn c0_grid_study(a0: &OscillatoryCoefficient, resolutions: &[usize]) -> Result<GridStudy> {
    let mut c0 = Vec::new();
    for &n in resolutions {
        let spec = CellProblemSpec::new(a0.clone(), OscillatoryCoefficient::zero(), n)?;
        let (_, corr) = solve_correctors(&spec)?;
        c0.push(effective_c0(&spec, &corr));
    }
    let gaps: Vec<f64> = c0
        .windows(2)
        .map(|w| w[0].iter().zip(&w[1]).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())))
        .collect();
    let ratios = gaps.windows(2).map(|w| w[1] / w[0]).collect();
    Ok(GridStudy { resolutions: resolutions.to_vec(), c0, gaps, ratios })
}

/// True when the coefficient needs no resampling in time.
pub fn is_stationary(coeff: &OscillatoryCoefficient) -> bool {
    coeff.dependence != Dependence::Full
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::viscous::{row_action, IDENTITY4};

    #[test]
    fn constant_coefficient_has_zero_corrector() {
        let spec = CellProblemSpec::new(OscillatoryCoefficient::constant(0.7), OscillatoryCoefficient::zero(), 16).unwrap();
        let (_, corr) = solve_correctors(&spec).unwrap();
        for s in &corr.basis {
            assert!(s.chi.iter().all(|v| v.abs() <= 1e-12));
            assert!(s.p.max_abs() <= 1e-12);
        }
        let c0 = effective_c0(&spec, &corr);
        for k in 0..16 {
            assert!((c0[k] - 0.7 * IDENTITY4[k]).abs() <= 1e-10);
        }
    }

    #[test]
    fn laminate_matches_arithmetic_and_harmonic_means() {
        let nu = 0.1;
        let spec = CellProblemSpec::new(OscillatoryCoefficient::sinusoidal(nu), OscillatoryCoefficient::zero(), 64).unwrap();
        let (_, corr) = solve_correctors(&spec).unwrap();
        assert!(corr.max_residual() < 1e-8);
        assert!(corr.max_mean() < 1e-12);
        assert!(corr.max_divergence() < 1e-8);
        let c0 = effective_c0(&spec, &corr);
        // a(y1) = nu (2 + sin 2 pi y1): arithmetic mean 2 nu, harmonic mean sqrt(3) nu
        let arith = 2.0 * nu;
        let harm = 3f64.sqrt() * nu;
        let expect = [arith, arith, harm, arith];
        for p in 0..4 {
            assert!((c0[5 * p] - expect[p]).abs() < 2e-3 * nu, "{p}: {} vs {}", c0[5 * p], expect[p]);
        }
        assert!(asymmetry(&c0) < 1e-8);
    }

    #[test]
    fn correctors_are_linear() {
        let spec =
            CellProblemSpec::new(OscillatoryCoefficient::checkerboard(1.0, 3.0), OscillatoryCoefficient::zero(), 16).unwrap();
        let (solver, corr) = solve_correctors(&spec).unwrap();
        let xi = [0.3, -1.2, 0.5, 2.0];
        let direct = solver.solve(xi).unwrap();
        let combined = corr.combine(xi);
        let scale = direct.chi.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (a, b) in direct.chi.iter().zip(&combined) {
            assert!((a - b).abs() <= 1e-9 * scale.max(1.0));
        }
    }

    #[test]
    fn checkerboard_swap_symmetry_and_bounds() {
        let spec =
            CellProblemSpec::new(OscillatoryCoefficient::checkerboard(1.0, 3.0), OscillatoryCoefficient::zero(), 32).unwrap();
        let (t, _) = EffectiveTensors::compute(&spec, 0.1, 0).unwrap();
        let c = t.c0;
        // y1 <-> y2 maps [g11, g12, g21, g22] to [g22, g21, g12, g11]
        let perm = [3, 2, 1, 0];
        for p in 0..4 {
            for q in 0..4 {
                assert!((c[4 * p + q] - c[4 * perm[p] + perm[q]]).abs() < 1e-8);
            }
        }
        let samples: Vec<[f64; 4]> =
            (0..20).map(|k| { let s = k as f64; [s.sin(), (1.3 * s).cos(), (0.7 * s + 1.0).sin(), (2.1 * s).cos()] }).collect();
        assert!(audit_c0(&c, spec.alpha, &voigt_bound(&spec), &samples).passes(1e-8));
        assert!(t.alpha() >= spec.alpha);
    }

    #[test]
    fn c1_of_proportional_kernel_is_scaled_c0() {
        let a0 = OscillatoryCoefficient::sinusoidal(0.2);
        let a1 = OscillatoryCoefficient::time_scaled(&a0, |t| (-t).exp());
        let spec = CellProblemSpec::new(a0, a1, 16).unwrap();
        let (t, _) = EffectiveTensors::compute(&spec, 0.1, 5).unwrap();
        for (n, c1) in t.c1.iter().enumerate() {
            let k = (-(n as f64) * 0.1).exp();
            for i in 0..16 {
                assert!((c1[i] - k * t.c0[i]).abs() <= 1e-10);
            }
        }
        let iso = CellProblemSpec::new(
            OscillatoryCoefficient::sinusoidal(0.2),
            OscillatoryCoefficient::time_scaled(&OscillatoryCoefficient::constant(1.0), |t| 1.0 + t),
            16,
        )
        .unwrap();
        let (t, _) = EffectiveTensors::compute(&iso, 0.5, 2).unwrap();
        for (n, c1) in t.c1.iter().enumerate() {
            for i in 0..16 {
                assert!((c1[i] - (1.0 + 0.5 * n as f64) * IDENTITY4[i]).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn impulse_response_trivial_cases() {
        let xi = [0.2, 1.0, -0.4, 0.3];
        let spec = CellProblemSpec::new(OscillatoryCoefficient::sinusoidal(0.1), OscillatoryCoefficient::zero(), 16).unwrap();
        let (t, _) = EffectiveTensors::compute(&spec, 0.1, 0).unwrap();
        let r = volterra_impulse_response(&spec, xi, 0.1, 3).unwrap();
        let s0 = tensor_apply(&t.c0, &xi);
        for k in 0..4 {
            assert!((r[0][k] - s0[k]).abs() < 1e-10);
        }
        assert!(r[1..].iter().all(|s| s.iter().all(|v| *v == 0.0)));

        let m1 = [0.3, 0.1, 0.1, 0.2];
        let spec =
            CellProblemSpec::new(OscillatoryCoefficient::constant(1.0), OscillatoryCoefficient::matrix(m1), 8).unwrap();
        let r = volterra_impulse_response(&spec, xi, 0.1, 3).unwrap();
        let expect = tensor_apply(&row_action(m1), &xi);
        for s in &r[1..] {
            for k in 0..4 {
                assert!((s[k] - 0.05 * expect[k]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn symmetric_eigenvalue_of_diagonal() {
        let mut c = [0.0; 16];
        for (p, d) in [3.0, 1.5, 2.0, 0.5].iter().enumerate() {
            c[5 * p] = *d;
        }
        c[1] = 0.1;
        c[4] = 0.1;
        let lam = min_eigenvalue_sym4(&c);
        assert!((lam - 0.5).abs() < 1e-12);
    }
}
