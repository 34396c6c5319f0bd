//! Stream-function parametrisation of discretely divergence-free MAC fields.
//!
//! On the walled rectangle every discretely divergence-free field with zero
//! normal boundary flux is the discrete curl of a vertex stream function that
//! vanishes on the boundary; on the torus every mean-free divergence-free field
//! is the curl of a periodic vertex stream function.

use super::field::{Boundary, Mac};
use crate::linalg::{SpectralKind, SpectralSolver};

/// Number of stream-function unknowns.
pub fn n_stream(mac: &Mac) -> usize {
    match mac.bc {
        Boundary::NoSlip => (mac.grid.nx - 1) * (mac.grid.ny - 1),
        Boundary::Periodic => mac.grid.n_cells(),
    }
}

#[inline]
fn psi_at(mac: &Mac, psi: &[f64], i: usize, j: usize) -> f64 {
    let g = mac.grid;
    match mac.bc {
        Boundary::NoSlip => {
            if i == 0 || j == 0 || i >= g.nx || j >= g.ny {
                0.0
            } else {
                psi[(j - 1) * (g.nx - 1) + (i - 1)]
            }
        }
        Boundary::Periodic => psi[(j % g.ny) * g.nx + (i % g.nx)],
    }
}

/// `u = curl psi`: `u = d psi / dy`, `v = -d psi / dx`.
pub fn curl(mac: &Mac, psi: &[f64], out: &mut [f64]) {
    let g = mac.grid;
    let (dx, dy) = (g.dx(), g.dy());
    out.iter_mut().for_each(|v| *v = 0.0);
    let u_cols = if mac.bc == Boundary::Periodic { g.nx } else { g.nx + 1 };
    for j in 0..g.ny {
        for i in 0..u_cols {
            out[mac.u_idx(i, j)] = (psi_at(mac, psi, i, j + 1) - psi_at(mac, psi, i, j)) / dy;
        }
    }
    let v_rows = if mac.bc == Boundary::Periodic { g.ny } else { g.ny + 1 };
    for j in 0..v_rows {
        for i in 0..g.nx {
            out[mac.v_idx(i, j)] = -(psi_at(mac, psi, i + 1, j) - psi_at(mac, psi, i, j)) / dx;
        }
    }
}

/// Euclidean transpose of [`curl`].
pub fn curl_transpose(mac: &Mac, u: &[f64], out: &mut [f64]) {
    let g = mac.grid;
    let (dx, dy) = (g.dx(), g.dy());
    out.iter_mut().for_each(|v| *v = 0.0);
    let mut add = |i: usize, j: usize, val: f64| match mac.bc {
        Boundary::NoSlip => {
            if i > 0 && j > 0 && i < g.nx && j < g.ny {
                out[(j - 1) * (g.nx - 1) + (i - 1)] += val;
            }
        }
        Boundary::Periodic => out[(j % g.ny) * g.nx + (i % g.nx)] += val,
    };
    let u_cols = if mac.bc == Boundary::Periodic { g.nx } else { g.nx + 1 };
    for j in 0..g.ny {
        for i in 0..u_cols {
            let val = u[mac.u_idx(i, j)] / dy;
            add(i, j + 1, val);
            add(i, j, -val);
        }
    }
    let v_rows = if mac.bc == Boundary::Periodic { g.ny } else { g.ny + 1 };
    for j in 0..v_rows {
        for i in 0..g.nx {
            let val = u[mac.v_idx(i, j)] / dx;
            add(i + 1, j, -val);
            add(i, j, val);
        }
    }
}

/// Fast solver for the stream-function Laplacian `curl^T curl` of `mac`.
pub fn laplace_solver(mac: &Mac) -> SpectralSolver {
    let g = mac.grid;
    let kind = match mac.bc {
        Boundary::NoSlip => SpectralKind::Dirichlet,
        Boundary::Periodic => SpectralKind::Periodic,
    };
    SpectralSolver::new(kind, g.nx, g.ny, g.dx(), g.dy())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{Grid, VectorField};

    #[test]
    fn curl_is_divergence_free_and_transpose_is_adjoint() {
        for mac in [Mac::no_slip(Grid::new(6, 5, 1.0, 0.9).unwrap()), Mac::periodic(Grid::new(5, 7, 1.0, 1.0).unwrap())] {
            let n = n_stream(&mac);
            let psi: Vec<f64> = (0..n).map(|k| ((k * 17 % 13) as f64 - 6.0) * 0.1).collect();
            let mut u = vec![0.0; mac.n_dofs()];
            curl(&mac, &psi, &mut u);
            let uu: Vec<f64> = (0..mac.n_dofs()).map(|k| if mac.is_pinned(k) { 0.0 } else { (k as f64 * 0.37).sin() }).collect();
            let mut ct = vec![0.0; n];
            curl_transpose(&mac, &uu, &mut ct);
            let a = crate::linalg::dot(&u, &uu);
            let b = crate::linalg::dot(&psi, &ct);
            assert!((a - b).abs() < 1e-10);
            if mac.bc == Boundary::NoSlip {
                let f = VectorField { grid: mac.grid, data: u.clone() };
                assert!(f.max_abs_divergence() < 1e-12);
                assert_eq!(f.max_abs_boundary(), 0.0);
            }
            // curl^T curl agrees with the spectral Laplacian
            let mut lap = vec![0.0; n];
            curl_transpose(&mac, &u, &mut lap);
            let s = laplace_solver(&mac);
            let mut back = vec![0.0; n];
            s.apply_fn(&lap, &mut back, |l| 1.0 / l);
            let mean = if mac.bc == Boundary::Periodic { psi.iter().sum::<f64>() / n as f64 } else { 0.0 };
            for k in 0..n {
                assert!((back[k] - (psi[k] - mean)).abs() < 1e-10);
            }
        }
    }
}
