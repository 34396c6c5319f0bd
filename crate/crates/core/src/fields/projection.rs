//! Discrete Helmholtz projection onto divergence-free MAC fields.

use super::field::{ScalarField, VectorField};
use super::grid::Grid;
use crate::error::Result;
use crate::linalg::{pcg, CgOptions, CgStats};

/// Default stopping rule: relative residual `1e-10`, at most `10 nx ny` iterations.
pub fn default_cg(grid: &Grid) -> CgOptions {
    CgOptions::new(1e-10, 1e-10, 10 * grid.n_cells())
}

/// Face gradient of a cell scalar; boundary faces get 0.
pub fn gradient(phi: &ScalarField) -> VectorField {
    let g = phi.grid;
    let (dx, dy) = (g.dx(), g.dy());
    let mut out = VectorField::zeros(g);
    let nu = (g.nx + 1) * g.ny;
    for j in 0..g.ny {
        for i in 1..g.nx {
            out.data[j * (g.nx + 1) + i] = (phi.data[g.cell_index(i, j)] - phi.data[g.cell_index(i - 1, j)]) / dx;
        }
    }
    for j in 1..g.ny {
        for i in 0..g.nx {
            out.data[nu + j * g.nx + i] = (phi.data[g.cell_index(i, j)] - phi.data[g.cell_index(i, j - 1)]) / dy;
        }
    }
    out
}

/// `-div grad` with homogeneous Neumann conditions (positive semidefinite).
pub fn neg_laplacian(grid: &Grid, phi: &[f64], out: &mut [f64]) {
    let (nx, ny) = (grid.nx, grid.ny);
    let (ix, iy) = (1.0 / (grid.dx() * grid.dx()), 1.0 / (grid.dy() * grid.dy()));
    for j in 0..ny {
        for i in 0..nx {
            let c = j * nx + i;
            let p = phi[c];
            let mut acc = 0.0;
            if i > 0 {
                acc += (p - phi[c - 1]) * ix;
            }
            if i + 1 < nx {
                acc += (p - phi[c + 1]) * ix;
            }
            if j > 0 {
                acc += (p - phi[c - nx]) * iy;
            }
            if j + 1 < ny {
                acc += (p - phi[c + nx]) * iy;
            }
            out[c] = acc;
        }
    }
}

/// Solves `div grad phi = rhs` with zero-flux walls; `rhs` is made mean-free and
/// the returned `phi` has zero mean. `guess` seeds the iteration.
pub fn solve_neumann_poisson(
    rhs: &ScalarField,
    guess: Option<&ScalarField>,
    opts: CgOptions,
) -> Result<(ScalarField, CgStats)> {
    let grid = rhs.grid;
    let mut b: Vec<f64> = rhs.data.iter().map(|v| -v).collect();
    let mean = b.iter().sum::<f64>() / b.len() as f64;
    b.iter_mut().for_each(|v| *v -= mean);
    let mut phi = match guess {
        Some(g) => g.clone(),
        None => ScalarField::zeros(grid),
    };
    phi.remove_mean();
    let stats = pcg(
        "pressure Poisson CG",
        |x, out| neg_laplacian(&grid, x, out),
        |r, z| z.copy_from_slice(r),
        &b,
        &mut phi.data,
        opts,
    )?;
    phi.remove_mean();
    Ok((phi, stats))
}

/// Returns `(u - grad phi, phi)` with `div(u - grad phi) = 0` to solver tolerance.
pub fn project_divergence_free(u: &VectorField) -> Result<(VectorField, ScalarField)> {
    project_with(u, None, default_cg(&u.grid))
}

pub fn project_with(
    u: &VectorField,
    guess: Option<&ScalarField>,
    opts: CgOptions,
) -> Result<(VectorField, ScalarField)> {
    let div = u.divergence();
    let (phi, _) = solve_neumann_poisson(&div, guess, opts)?;
    let mut out = u.clone();
    out.axpy(-1.0, &gradient(&phi));
    Ok((out, phi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(grid: Grid, seed: u64) -> VectorField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut f = VectorField::zeros(grid);
        f.data.iter_mut().for_each(|v| *v = rng.gen_range(-1.0..1.0));
        f.zero_boundary();
        f
    }

    #[test]
    fn projection_removes_divergence_and_is_idempotent() {
        let grid = Grid::new(16, 12, 1.0, 0.75).unwrap();
        let u = random_field(grid, 11);
        let (p, phi) = project_divergence_free(&u).unwrap();
        assert!(p.max_abs_divergence() <= 1e-8);
        assert!(phi.mean().abs() < 1e-12);
        assert!(p.max_abs_boundary() == 0.0);
        let (pp, _) = project_divergence_free(&p).unwrap();
        assert!(pp.sub(&p).max_abs() <= 1e-10);
    }

    #[test]
    fn pure_gradient_is_removed() {
        let grid = Grid::unit(16).unwrap();
        let psi = ScalarField::from_fn(grid, |x| (3.0 * x[0]).sin() * x[1] * x[1]);
        let u = gradient(&psi);
        let (p, _) = project_divergence_free(&u).unwrap();
        assert!(p.max_abs() <= 1e-8, "{}", p.max_abs());
    }

    #[test]
    fn divergence_free_input_is_unchanged() {
        let grid = Grid::unit(12).unwrap();
        let u = VectorField::from_stream_function(grid, |x| (x[0] * (1.0 - x[0]) * x[1] * (1.0 - x[1])).powi(2));
        let (p, phi) = project_divergence_free(&u).unwrap();
        assert!(p.sub(&u).max_abs() <= 1e-10);
        assert!(phi.max_abs() <= 1e-10);
    }

    #[test]
    fn gradient_is_minus_adjoint_of_divergence() {
        let grid = Grid::new(6, 5, 1.0, 1.0).unwrap();
        let u = random_field(grid, 4);
        let phi = ScalarField::from_fn(grid, |x| x[0] * x[1] + x[0].cos());
        let lhs = u.dot(&gradient(&phi));
        let rhs: f64 = -u.divergence().data.iter().zip(&phi.data).map(|(a, b)| a * b).sum::<f64>() * grid.cell_area();
        assert!((lhs - rhs).abs() < 1e-12);
    }
}
