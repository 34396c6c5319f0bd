//! Variable-coefficient viscous operator `-div(C grad u)` on the MAC layout.
//!
//! The operator is the gradient of the discrete energy
//! `E(u) = 1/2 sum_cells area/4 sum_corners g_s : C_cell g_s`, where `g_s` is the
//! velocity gradient sampled at corner `s` (cell-centred `du/dx`, `dv/dy`, vertex
//! `du/dy`, `dv/dx`). Next to a wall the tangential derivative uses the mirrored
//! ghost value, which enforces no-slip. For a scalar coefficient this reduces to
//! the classical MAC stencil with vertex coefficients averaged from the adjacent
//! cells.

use rayon::prelude::*;

use super::coefficient::{sample_coefficient, Mat2, OscillatoryCoefficient};
use super::field::{Boundary, GradientField, Mac};
use super::grid::Grid;

/// Fourth-order tensor as a 4x4 row-major matrix acting on
/// `vec(G) = [g11, g12, g21, g22]`.
pub type Tensor4 = [f64; 16];

/// The tensor `G -> G A`, i.e. row `i` of the stress is `A` applied to row `i`
/// of the gradient: `sigma_ij = sum_l A_jl g_il`.
pub fn row_action(a: Mat2) -> Tensor4 {
    let mut c = [0.0; 16];
    for i in 0..2 {
        for j in 0..2 {
            for l in 0..2 {
                c[(2 * i + j) * 4 + 2 * i + l] = a[2 * j + l];
            }
        }
    }
    c
}

#[inline]
pub fn tensor_apply(c: &Tensor4, g: &[f64; 4]) -> [f64; 4] {
    let mut s = [0.0; 4];
    for p in 0..4 {
        s[p] = c[4 * p] * g[0] + c[4 * p + 1] * g[1] + c[4 * p + 2] * g[2] + c[4 * p + 3] * g[3];
    }
    s
}

#[inline]
pub fn frobenius(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3]
}

pub fn tensor_scale(c: &Tensor4, a: f64) -> Tensor4 {
    let mut out = *c;
    out.iter_mut().for_each(|v| *v *= a);
    out
}

pub const IDENTITY4: Tensor4 = [1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0];

/// Per-cell viscosity tensors.
#[derive(Clone, Debug, PartialEq)]
pub struct ViscosityField {
    pub data: Vec<Tensor4>,
}

impl ViscosityField {
    pub fn uniform(grid: Grid, c: Tensor4) -> Self {
        Self { data: vec![c; grid.n_cells()] }
    }

    /// `delta (x) A(t, x_c, frac(x_c / eps))` at every cell centre of a physical grid.
    pub fn from_coefficient(grid: Grid, coeff: &OscillatoryCoefficient, t: f64, eps: f64) -> Self {
        let mut data = Vec::with_capacity(grid.n_cells());
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                data.push(row_action(sample_coefficient(coeff, t, grid.cell_center(i, j), eps)));
            }
        }
        Self { data }
    }

    /// `delta (x) A(t, x, y_c)` at every cell centre of a unit-cell grid.
    pub fn on_cell(grid: Grid, coeff: &OscillatoryCoefficient, t: f64, x: [f64; 2]) -> Self {
        let mut data = Vec::with_capacity(grid.n_cells());
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                data.push(row_action(coeff.eval(t, x, grid.cell_center(i, j))));
            }
        }
        Self { data }
    }

    /// Average of `trace(C) / 4`, a scalar viscosity scale for preconditioning.
    pub fn mean_scalar(&self) -> f64 {
        let s: f64 = self.data.iter().map(|c| 0.25 * (c[0] + c[5] + c[10] + c[15])).sum();
        s / self.data.len() as f64
    }
}

/// Discrete velocity gradient of a MAC vector (raw dof vector of `mac`).
pub fn gradient(mac: &Mac, u: &[f64]) -> GradientField {
    let g = mac.grid;
    let (nx, ny) = (g.nx, g.ny);
    let (dx, dy) = (g.dx(), g.dy());
    let periodic = mac.bc == Boundary::Periodic;
    let mut out = GradientField::zeros(*mac);
    for j in 0..ny {
        for i in 0..nx {
            out.cell[g.cell_index(i, j)] = [
                (u[mac.u_idx(i + 1, j)] - u[mac.u_idx(i, j)]) / dx,
                (u[mac.v_idx(i, j + 1)] - u[mac.v_idx(i, j)]) / dy,
            ];
        }
    }
    let (vx_max, vy_max) = if periodic { (nx, ny) } else { (nx + 1, ny + 1) };
    for jj in 0..vy_max {
        for ii in 0..vx_max {
            let uy = if periodic {
                (u[mac.u_idx(ii, jj)] - u[mac.u_idx(ii, (jj + ny - 1) % ny)]) / dy
            } else if jj == 0 {
                2.0 * u[mac.u_idx(ii, 0)] / dy
            } else if jj == ny {
                -2.0 * u[mac.u_idx(ii, ny - 1)] / dy
            } else {
                (u[mac.u_idx(ii, jj)] - u[mac.u_idx(ii, jj - 1)]) / dy
            };
            let vx = if periodic {
                (u[mac.v_idx(ii, jj)] - u[mac.v_idx((ii + nx - 1) % nx, jj)]) / dx
            } else if ii == 0 {
                2.0 * u[mac.v_idx(0, jj)] / dx
            } else if ii == nx {
                -2.0 * u[mac.v_idx(nx - 1, jj)] / dx
            } else {
                (u[mac.v_idx(ii, jj)] - u[mac.v_idx(ii - 1, jj)]) / dx
            };
            out.vertex[mac.vertex_idx(ii, jj)] = [uy, vx];
        }
    }
    out
}

/// `sigma = C g` at every cell corner, stored `4 * cell + s`.
pub fn corner_stress(visc: &ViscosityField, grad: &GradientField) -> Vec<[f64; 4]> {
    let g = grad.mac.grid;
    let mut out = vec![[0.0; 4]; 4 * g.n_cells()];
    out.par_chunks_mut(4 * g.nx).enumerate().for_each(|(j, row)| {
        for i in 0..g.nx {
            let c = &visc.data[g.cell_index(i, j)];
            for s in 0..4 {
                row[4 * i + s] = tensor_apply(c, &grad.corner(i, j, s));
            }
        }
    });
    out
}

/// Applies the transpose of the weighted gradient to corner stresses:
/// `out = B^T W sigma` with quadrature weight `area / 4` per corner. This is
/// the energy gradient when `sigma = C B u`, and the weak divergence of a
/// stress field in general. Pinned dofs receive 0.
pub fn stress_divergence(mac: &Mac, stress: &[[f64; 4]], out: &mut [f64]) {
    let g = mac.grid;
    let (nx, ny) = (g.nx, g.ny);
    let (dx, dy) = (g.dx(), g.dy());
    let w = 0.25 * g.cell_area();
    let periodic = mac.bc == Boundary::Periodic;

    let mut sc = vec![[0.0; 2]; g.n_cells()];
    for (c, acc) in sc.iter_mut().enumerate() {
        for s in 0..4 {
            let t = stress[4 * c + s];
            acc[0] += w * t[0];
            acc[1] += w * t[3];
        }
    }
    let mut sv = vec![[0.0; 2]; mac.n_vertices()];
    let (vx_max, vy_max) = if periodic { (nx, ny) } else { (nx + 1, ny + 1) };
    for jj in 0..vy_max {
        for ii in 0..vx_max {
            let mut acc = [0.0; 2];
            for (a, b) in [(0usize, 0usize), (1, 0), (0, 1), (1, 1)] {
                // cell (ii - a, jj - b) sees this vertex as its corner (a, b)
                let (ci, cj) = if periodic {
                    ((ii + nx - a) % nx, (jj + ny - b) % ny)
                } else {
                    if ii < a || jj < b || ii - a >= nx || jj - b >= ny {
                        continue;
                    }
                    (ii - a, jj - b)
                };
                let t = stress[4 * g.cell_index(ci, cj) + a + 2 * b];
                acc[0] += w * t[1];
                acc[1] += w * t[2];
            }
            sv[mac.vertex_idx(ii, jj)] = acc;
        }
    }

    out.iter_mut().for_each(|v| *v = 0.0);
    let cell = |i: usize, j: usize| sc[g.cell_index(i, j)];
    let vert = |i: usize, j: usize| sv[mac.vertex_idx(i, j)];
    // u component
    let u_cols = if periodic { nx } else { nx + 1 };
    for j in 0..ny {
        for i in 0..u_cols {
            let k = mac.u_idx(i, j);
            if mac.is_pinned(k) {
                continue;
            }
            let mut acc = 0.0;
            if periodic {
                acc += (cell((i + nx - 1) % nx, j)[0] - cell(i, j)[0]) / dx;
                acc += (vert(i, j)[0] - vert(i, (j + 1) % ny)[0]) / dy;
            } else {
                acc += (cell(i - 1, j)[0] - cell(i, j)[0]) / dx;
                acc += if j == 0 { 2.0 * vert(i, 0)[0] / dy } else { vert(i, j)[0] / dy };
                acc -= if j + 1 == ny { 2.0 * vert(i, ny)[0] / dy } else { vert(i, j + 1)[0] / dy };
            }
            out[k] = acc;
        }
    }
    // v component
    let v_rows = if periodic { ny } else { ny + 1 };
    for j in 0..v_rows {
        for i in 0..nx {
            let k = mac.v_idx(i, j);
            if mac.is_pinned(k) {
                continue;
            }
            let mut acc = 0.0;
            if periodic {
                acc += (cell(i, (j + ny - 1) % ny)[1] - cell(i, j)[1]) / dy;
                acc += (vert(i, j)[1] - vert((i + 1) % nx, j)[1]) / dx;
            } else {
                acc += (cell(i, j - 1)[1] - cell(i, j)[1]) / dy;
                acc += if i == 0 { 2.0 * vert(0, j)[1] / dx } else { vert(i, j)[1] / dx };
                acc -= if i + 1 == nx { 2.0 * vert(nx, j)[1] / dx } else { vert(i + 1, j)[1] / dx };
            }
            out[k] = acc;
        }
    }
}

/// Local dofs entering the corner-`s` gradient of cell `(i, j)`, each with its
/// coefficient vector in `vec(G)`. Pinned dofs are omitted.
pub fn corner_dofs(mac: &Mac, i: usize, j: usize, s: usize) -> Vec<(usize, [f64; 4])> {
    let g = mac.grid;
    let (nx, ny) = (g.nx, g.ny);
    let (dx, dy) = (g.dx(), g.dy());
    let periodic = mac.bc == Boundary::Periodic;
    let (ii, jj) = (i + (s & 1), j + (s >> 1));
    let mut raw: Vec<(usize, usize, f64)> = vec![
        (mac.u_idx(i + 1, j), 0, 1.0 / dx),
        (mac.u_idx(i, j), 0, -1.0 / dx),
        (mac.v_idx(i, j + 1), 3, 1.0 / dy),
        (mac.v_idx(i, j), 3, -1.0 / dy),
    ];
    if periodic {
        raw.push((mac.u_idx(ii, jj), 1, 1.0 / dy));
        raw.push((mac.u_idx(ii, (jj + ny - 1) % ny), 1, -1.0 / dy));
        raw.push((mac.v_idx(ii, jj), 2, 1.0 / dx));
        raw.push((mac.v_idx((ii + nx - 1) % nx, jj), 2, -1.0 / dx));
    } else {
        if jj == 0 {
            raw.push((mac.u_idx(ii, 0), 1, 2.0 / dy));
        } else if jj == ny {
            raw.push((mac.u_idx(ii, ny - 1), 1, -2.0 / dy));
        } else {
            raw.push((mac.u_idx(ii, jj), 1, 1.0 / dy));
            raw.push((mac.u_idx(ii, jj - 1), 1, -1.0 / dy));
        }
        if ii == 0 {
            raw.push((mac.v_idx(0, jj), 2, 2.0 / dx));
        } else if ii == nx {
            raw.push((mac.v_idx(nx - 1, jj), 2, -2.0 / dx));
        } else {
            raw.push((mac.v_idx(ii, jj), 2, 1.0 / dx));
            raw.push((mac.v_idx(ii - 1, jj), 2, -1.0 / dx));
        }
    }
    let mut out: Vec<(usize, [f64; 4])> = Vec::with_capacity(raw.len());
    for (k, comp, val) in raw {
        if mac.is_pinned(k) {
            continue;
        }
        match out.iter_mut().find(|(d, _)| *d == k) {
            Some((_, b)) => b[comp] += val,
            None => {
                let mut b = [0.0; 4];
                b[comp] = val;
                out.push((k, b));
            }
        }
    }
    out
}

/// `K = M^{-1} grad^2 E`, with `M = cell area` per dof.
#[derive(Clone, Debug)]
pub struct ViscousOperator {
    pub mac: Mac,
    pub visc: ViscosityField,
}

impl ViscousOperator {
    pub fn new(mac: Mac, visc: ViscosityField) -> Self {
        Self { mac, visc }
    }

    /// `out = K u`.
    pub fn apply(&self, u: &[f64], out: &mut [f64]) {
        let grad = gradient(&self.mac, u);
        let stress = corner_stress(&self.visc, &grad);
        stress_divergence(&self.mac, &stress, out);
        let inv = 1.0 / self.mac.grid.cell_area();
        out.iter_mut().for_each(|v| *v *= inv);
    }

    /// `E(u) = 1/2 sum area/4 g : C g`.
    pub fn energy(&self, u: &[f64]) -> f64 {
        let grad = gradient(&self.mac, u);
        let g = self.mac.grid;
        let mut acc = 0.0;
        for j in 0..g.ny {
            for i in 0..g.nx {
                let c = &self.visc.data[g.cell_index(i, j)];
                for s in 0..4 {
                    let gs = grad.corner(i, j, s);
                    acc += frobenius(&gs, &tensor_apply(c, &gs));
                }
            }
        }
        0.5 * acc * 0.25 * g.cell_area()
    }

    /// Diagonal of `K` (zero on pinned dofs).
    pub fn diagonal(&self) -> Vec<f64> {
        let g = self.mac.grid;
        let w = 0.25;
        let mut d = vec![0.0; self.mac.n_dofs()];
        for j in 0..g.ny {
            for i in 0..g.nx {
                let c = &self.visc.data[g.cell_index(i, j)];
                for s in 0..4 {
                    for (k, b) in corner_dofs(&self.mac, i, j, s) {
                        d[k] += w * frobenius(&b, &tensor_apply(c, &b));
                    }
                }
            }
        }
        d
    }

    /// Element-by-element assembly of the energy gradient `M K u`; slow reference for tests.
    pub fn apply_by_elements(&self, u: &[f64], out: &mut [f64]) {
        let g = self.mac.grid;
        out.iter_mut().for_each(|v| *v = 0.0);
        for j in 0..g.ny {
            for i in 0..g.nx {
                let c = &self.visc.data[g.cell_index(i, j)];
                for s in 0..4 {
                    let dofs = corner_dofs(&self.mac, i, j, s);
                    let mut gs = [0.0; 4];
                    for (k, b) in &dofs {
                        for p in 0..4 {
                            gs[p] += b[p] * u[*k];
                        }
                    }
                    let sig = tensor_apply(c, &gs);
                    for (k, b) in &dofs {
                        out[*k] += 0.25 * g.cell_area() * frobenius(b, &sig);
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::coefficient::OscillatoryCoefficient;
    use crate::fields::field::VectorField;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_vec(mac: &Mac, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..mac.n_dofs()).map(|k| if mac.is_pinned(k) { 0.0 } else { rng.gen_range(-1.0..1.0) }).collect()
    }

    fn anisotropic(grid: Grid) -> ViscosityField {
        let coeff = OscillatoryCoefficient::new("test", 0.1, 1.0, crate::fields::coefficient::Dependence::Full, |_, x, y| {
            let a = 0.5 + 0.3 * (6.0 * y[0]).sin() * x[1];
            let b = 0.1 * (4.0 * y[1]).cos();
            [a, b, b, 0.6 + 0.2 * x[0]]
        });
        ViscosityField::from_coefficient(grid, &coeff, 0.0, 0.5)
    }

    #[test]
    fn row_action_of_identity() {
        assert_eq!(row_action([1.0, 0.0, 0.0, 1.0]), IDENTITY4);
        let c = row_action([1.0, 2.0, 2.0, 3.0]);
        // row 1 of G is (g11, g12) -> A (g11, g12)
        assert_eq!(tensor_apply(&c, &[1.0, 0.0, 0.0, 0.0]), [1.0, 2.0, 0.0, 0.0]);
        assert_eq!(tensor_apply(&c, &[0.0, 0.0, 0.0, 1.0]), [0.0, 0.0, 2.0, 3.0]);
    }

    #[test]
    fn fast_apply_matches_element_assembly() {
        for mac in [Mac::no_slip(Grid::new(7, 5, 1.0, 0.8).unwrap()), Mac::periodic(Grid::new(6, 8, 1.0, 1.0).unwrap())] {
            let op = ViscousOperator::new(mac, anisotropic(mac.grid));
            let u = random_vec(&mac, 3);
            let mut a = vec![0.0; mac.n_dofs()];
            let mut b = vec![0.0; mac.n_dofs()];
            op.apply(&u, &mut a);
            op.apply_by_elements(&u, &mut b);
            let area = mac.grid.cell_area();
            for k in 0..a.len() {
                assert!((a[k] - b[k] / area).abs() < 1e-9 * (1.0 + a[k].abs()), "{k}: {} {}", a[k], b[k] / area);
            }
        }
    }

    #[test]
    fn operator_is_symmetric_and_coercive() {
        let mac = Mac::no_slip(Grid::new(8, 6, 1.0, 1.0).unwrap());
        let visc = anisotropic(mac.grid);
        let op = ViscousOperator::new(mac, visc);
        let u = random_vec(&mac, 1);
        let w = random_vec(&mac, 2);
        let mut ku = vec![0.0; u.len()];
        let mut kw = vec![0.0; u.len()];
        op.apply(&u, &mut ku);
        op.apply(&w, &mut kw);
        let a = crate::linalg::dot(&ku, &w);
        let b = crate::linalg::dot(&kw, &u);
        assert!((a - b).abs() < 1e-10 * a.abs().max(1.0));
        let area = mac.grid.cell_area();
        let quad = crate::linalg::dot(&ku, &u) * area;
        assert!((quad - 2.0 * op.energy(&u)).abs() < 1e-10 * quad);
        let grad = gradient(&mac, &u);
        assert!(quad >= 0.1 * grad.norm_sq());
    }

    #[test]
    fn diagonal_matches_unit_vectors() {
        let mac = Mac::no_slip(Grid::new(5, 4, 1.0, 1.0).unwrap());
        let op = ViscousOperator::new(mac, anisotropic(mac.grid));
        let d = op.diagonal();
        let mut e = vec![0.0; mac.n_dofs()];
        let mut ke = vec![0.0; mac.n_dofs()];
        for k in 0..mac.n_dofs() {
            e.iter_mut().for_each(|v| *v = 0.0);
            if mac.is_pinned(k) {
                assert_eq!(d[k], 0.0);
                continue;
            }
            e[k] = 1.0;
            op.apply(&e, &mut ke);
            assert!((ke[k] - d[k]).abs() < 1e-9 * ke[k].abs());
        }
    }

    #[test]
    fn scalar_coefficient_gives_five_point_laplacian_in_interior() {
        let grid = Grid::unit(8).unwrap();
        let mac = Mac::no_slip(grid);
        let op = ViscousOperator::new(mac, ViscosityField::uniform(grid, IDENTITY4));
        // smooth field, look at an interior u node
        let f = VectorField::from_fn(grid, |p| p[0] * p[0] * p[1], |p| p[1] * p[0]);
        let mut out = vec![0.0; mac.n_dofs()];
        op.apply(&f.data, &mut out);
        let k = mac.u_idx(4, 4);
        let h = grid.dx();
        let lap = -(f.u(5, 4) + f.u(3, 4) + f.u(4, 5) + f.u(4, 3) - 4.0 * f.u(4, 4)) / (h * h);
        assert!((out[k] - lap).abs() < 1e-9);
    }

    #[test]
    fn uniform_gradient_has_zero_periodic_divergence() {
        let mac = Mac::periodic(Grid::unit(6).unwrap());
        let visc = anisotropic(mac.grid);
        let _ = visc;
        let stress = vec![[1.0, -2.0, 0.5, 3.0]; 4 * mac.grid.n_cells()];
        let mut out = vec![0.0; mac.n_dofs()];
        stress_divergence(&mac, &stress, &mut out);
        assert!(crate::linalg::norm_inf(&out) < 1e-12);
    }
}
