//! Bilinear interpolation from the staggered faces, its adjoint (deposition) and
//! lattice mollification.
//!
//! Each velocity component is interpolated on its own node lattice. In the
//! half-cell band between the outermost tangential nodes and a wall the weights
//! are clamped to the nearest node row, so all weights are nonnegative and sum
//! to one; affine fields are reproduced exactly away from that band.

use super::field::{ScalarField, VectorField};
use super::grid::Grid;
use crate::error::{Error, Result};

/// Four `(dof, weight)` pairs per component, indices into `VectorField::data`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Stencil {
    pub u: [(usize, f64); 4],
    pub v: [(usize, f64); 4],
}

#[inline]
fn axis(s: f64, n_nodes: usize) -> (usize, f64) {
    // nodes at 0, 1, ..., n_nodes - 1 in units of the spacing
    if s <= 0.0 {
        (0, 0.0)
    } else if s >= (n_nodes - 1) as f64 {
        (n_nodes - 2, 1.0)
    } else {
        let i = (s.floor() as usize).min(n_nodes - 2);
        (i, s - i as f64)
    }
}

/// Interpolation stencil at `x`, which must lie in the closed domain.
pub fn stencil(grid: &Grid, x: [f64; 2]) -> Result<Stencil> {
    if !grid.contains(x) || !x[0].is_finite() || !x[1].is_finite() {
        return Err(Error::Domain { x: x[0], y: x[1] });
    }
    Ok(stencil_unchecked(grid, x))
}

#[inline]
pub fn stencil_unchecked(grid: &Grid, x: [f64; 2]) -> Stencil {
    let (nx, ny) = (grid.nx, grid.ny);
    let (dx, dy) = (grid.dx(), grid.dy());
    let nu = (nx + 1) * ny;

    let (i, fx) = axis(x[0] / dx, nx + 1);
    let (j, fy) = axis(x[1] / dy - 0.5, ny);
    let su = nx + 1;
    let u = [
        (j * su + i, (1.0 - fx) * (1.0 - fy)),
        (j * su + i + 1, fx * (1.0 - fy)),
        ((j + 1) * su + i, (1.0 - fx) * fy),
        ((j + 1) * su + i + 1, fx * fy),
    ];

    let (i, fx) = axis(x[0] / dx - 0.5, nx);
    let (j, fy) = axis(x[1] / dy, ny + 1);
    let v = [
        (nu + j * nx + i, (1.0 - fx) * (1.0 - fy)),
        (nu + j * nx + i + 1, fx * (1.0 - fy)),
        (nu + (j + 1) * nx + i, (1.0 - fx) * fy),
        (nu + (j + 1) * nx + i + 1, fx * fy),
    ];
    Stencil { u, v }
}

impl Stencil {
    #[inline]
    pub fn eval(&self, data: &[f64]) -> [f64; 2] {
        let mut out = [0.0; 2];
        for (k, w) in self.u {
            out[0] += w * data[k];
        }
        for (k, w) in self.v {
            out[1] += w * data[k];
        }
        out
    }
}

/// Velocity at `x` by bilinear interpolation from the faces.
pub fn interpolate_velocity(u: &VectorField, x: [f64; 2]) -> Result<[f64; 2]> {
    Ok(stencil(&u.grid, x)?.eval(&u.data))
}

/// Adjoint of interpolation: face density of `sum_k values_k delta(x - x_k)`,
/// i.e. weights times values divided by the cell area.
pub fn deposit(grid: Grid, positions: &[[f64; 2]], values: &[[f64; 2]]) -> Result<VectorField> {
    let mut out = VectorField::zeros(grid);
    let inv = 1.0 / grid.cell_area();
    for (x, q) in positions.iter().zip(values) {
        let st = stencil(&grid, *x)?;
        for (k, w) in st.u {
            out.data[k] += w * q[0] * inv;
        }
        for (k, w) in st.v {
            out.data[k] += w * q[1] * inv;
        }
    }
    Ok(out)
}

/// Cloud-in-cell density on cell centres (clamped at the walls, mass exact).
pub fn deposit_density(grid: Grid, positions: &[[f64; 2]], weights: &[f64]) -> Result<ScalarField> {
    let mut out = ScalarField::zeros(grid);
    let inv = 1.0 / grid.cell_area();
    let (dx, dy) = (grid.dx(), grid.dy());
    for (x, w) in positions.iter().zip(weights) {
        if !grid.contains(*x) {
            return Err(Error::Domain { x: x[0], y: x[1] });
        }
        let (i, fx) = axis(x[0] / dx - 0.5, grid.nx);
        let (j, fy) = axis(x[1] / dy - 0.5, grid.ny);
        let c = grid.cell_index(i, j);
        out.data[c] += w * inv * (1.0 - fx) * (1.0 - fy);
        out.data[c + 1] += w * inv * fx * (1.0 - fy);
        out.data[c + grid.nx] += w * inv * (1.0 - fx) * fy;
        out.data[c + grid.nx + 1] += w * inv * fx * fy;
    }
    Ok(out)
}

/// Smooth 1D bump supported on `(-1, 1)`.
#[inline]
pub fn bump(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - s * s)).exp()
    }
}

/// Discrete 1D kernel `bump(k h / radius)` for `|k h| < radius`, normalised by
/// its own sum so that it has unit mass on the infinite lattice.
fn lattice_kernel(h: f64, radius: f64) -> Vec<f64> {
    let m = (radius / h).ceil() as usize;
    let mut k: Vec<f64> = (0..=2 * m).map(|i| bump((i as f64 - m as f64) * h / radius)).collect();
    let s: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= s);
    k
}

fn convolve_rows(data: &[f64], cols: usize, rows: usize, k: &[f64]) -> Vec<f64> {
    let m = (k.len() / 2) as isize;
    let mut out = vec![0.0; data.len()];
    for r in 0..rows {
        for c in 0..cols {
            let mut acc = 0.0;
            for (t, kv) in k.iter().enumerate() {
                let cc = c as isize + t as isize - m;
                if cc >= 0 && (cc as usize) < cols {
                    acc += kv * data[r * cols + cc as usize];
                }
            }
            out[r * cols + c] = acc;
        }
    }
    out
}

fn convolve_cols(data: &[f64], cols: usize, rows: usize, k: &[f64]) -> Vec<f64> {
    let m = (k.len() / 2) as isize;
    let mut out = vec![0.0; data.len()];
    for r in 0..rows {
        for c in 0..cols {
            let mut acc = 0.0;
            for (t, kv) in k.iter().enumerate() {
                let rr = r as isize + t as isize - m;
                if rr >= 0 && (rr as usize) < rows {
                    acc += kv * data[rr as usize * cols + c];
                }
            }
            out[r * cols + c] = acc;
        }
    }
    out
}

/// Convolution of the zero-extended field with a product bump of radius
/// `radius`, component by component on each node lattice.
pub fn mollify(u: &VectorField, radius: f64) -> VectorField {
    let g = u.grid;
    let kx = lattice_kernel(g.dx(), radius);
    let ky = lattice_kernel(g.dy(), radius);
    let nu = (g.nx + 1) * g.ny;
    let ub = convolve_cols(&convolve_rows(&u.data[..nu], g.nx + 1, g.ny, &kx), g.nx + 1, g.ny, &ky);
    let vb = convolve_cols(&convolve_rows(&u.data[nu..], g.nx, g.ny + 1, &kx), g.nx, g.ny + 1, &ky);
    let mut out = VectorField { grid: g, data: [ub, vb].concat() };
    out.zero_boundary();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn constants_are_reproduced_everywhere() {
        let g = Grid::new(8, 6, 1.0, 0.75).unwrap();
        let u = VectorField::constant(g, [1.5, -0.25]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let x = [rng.gen_range(0.0..=1.0), rng.gen_range(0.0..=0.75)];
            let v = interpolate_velocity(&u, x).unwrap();
            assert!((v[0] - 1.5).abs() < 1e-14 && (v[1] + 0.25).abs() < 1e-14);
        }
        for corner in [[0.0, 0.0], [1.0, 0.75], [1.0, 0.0]] {
            assert!(interpolate_velocity(&u, corner).is_ok());
        }
    }

    #[test]
    fn affine_fields_are_exact_away_from_wall_band() {
        let g = Grid::unit(10).unwrap();
        let fu = |p: [f64; 2]| 0.3 + 1.2 * p[0] - 0.7 * p[1];
        let fv = |p: [f64; 2]| -0.1 + 0.4 * p[0] + 2.0 * p[1];
        let u = VectorField::from_fn(g, fu, fv);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..500 {
            let x = [rng.gen_range(0.05..0.95), rng.gen_range(0.05..0.95)];
            let v = interpolate_velocity(&u, x).unwrap();
            assert!((v[0] - fu(x)).abs() < 1e-13);
            assert!((v[1] - fv(x)).abs() < 1e-13);
        }
    }

    #[test]
    fn face_impulse_is_nodal() {
        let g = Grid::unit(8).unwrap();
        let mut u = VectorField::zeros(g);
        let k = 3 * 9 + 4;
        u.data[k] = 2.5;
        let x = [4.0 * g.dx(), 3.5 * g.dy()];
        assert_eq!(interpolate_velocity(&u, x).unwrap(), [2.5, 0.0]);
    }

    #[test]
    fn outside_points_are_rejected() {
        let g = Grid::unit(8).unwrap();
        let u = VectorField::zeros(g);
        assert!(matches!(interpolate_velocity(&u, [1.1, 0.5]), Err(Error::Domain { .. })));
        assert!(interpolate_velocity(&u, [f64::NAN, 0.5]).is_err());
    }

    #[test]
    fn deposition_is_adjoint_to_interpolation() {
        let g = Grid::new(9, 7, 1.0, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let xs: Vec<[f64; 2]> = (0..300).map(|_| [rng.gen::<f64>(), rng.gen::<f64>()]).collect();
        let ws: Vec<f64> = (0..300).map(|_| rng.gen::<f64>()).collect();
        let mut u = VectorField::zeros(g);
        u.data.iter_mut().for_each(|v| *v = rng.gen_range(-1.0..1.0));
        let dens = deposit(g, &xs, &ws.iter().map(|w| [*w, *w]).collect::<Vec<_>>()).unwrap();
        let mut lhs = [0.0; 2];
        for (x, w) in xs.iter().zip(&ws) {
            let v = interpolate_velocity(&u, *x).unwrap();
            lhs[0] += w * v[0];
            lhs[1] += w * v[1];
        }
        let a = g.cell_area();
        let nu = 10 * 7;
        let rhs0: f64 = u.data[..nu].iter().zip(&dens.data[..nu]).map(|(p, q)| p * q).sum::<f64>() * a;
        let rhs1: f64 = u.data[nu..].iter().zip(&dens.data[nu..]).map(|(p, q)| p * q).sum::<f64>() * a;
        assert!((lhs[0] - rhs0).abs() <= 1e-12 * lhs[0].abs().max(1.0));
        assert!((lhs[1] - rhs1).abs() <= 1e-12 * lhs[1].abs().max(1.0));
    }

    #[test]
    fn density_deposit_conserves_mass() {
        let g = Grid::unit(8).unwrap();
        let xs = [[0.0, 0.0], [0.51, 0.33], [1.0, 0.999]];
        let ws = [1.0, 2.0, 0.5];
        let d = deposit_density(g, &xs, &ws).unwrap();
        let m: f64 = d.data.iter().sum::<f64>() * g.cell_area();
        assert!((m - 3.5).abs() < 1e-13);
    }

    #[test]
    fn mollifier_preserves_interior_constants() {
        let g = Grid::unit(32).unwrap();
        let u = VectorField::constant(g, [1.0, 2.0]);
        let m = mollify(&u, 0.1);
        let v = interpolate_velocity(&m, [0.5, 0.5]).unwrap();
        assert!((v[0] - 1.0).abs() < 1e-12 && (v[1] - 2.0).abs() < 1e-12);
        assert_eq!(m.max_abs_boundary(), 0.0);
    }
}
