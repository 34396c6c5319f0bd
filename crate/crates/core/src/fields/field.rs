//! Cell-centred scalars, MAC-staggered velocities and per-cell tensor samples.
//!
//! Indexing conventions (row-major, `j` is the slow index):
//!
//! * scalars live at cell centres, index `j * nx + i`;
//! * the `u` component lives on vertical faces `x = i dx`, `y = (j + 1/2) dy`;
//! * the `v` component lives on horizontal faces `x = (i + 1/2) dx`, `y = j dy`;
//! * velocity gradients are sampled at the four corners of every cell, so a
//!   `TensorField` holds `4 * n_cells` matrices stored as `[g11, g12, g21, g22]`
//!   with `g_ij = d u_i / d x_j`. Corner `s = a + 2 b` is vertex `(i + a, j + b)`.

use super::grid::Grid;

/// Boundary treatment of a MAC layout.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Boundary {
    /// Rectangle with no-slip walls: boundary normal faces carry zero velocity,
    /// tangential components see mirrored ghost values.
    NoSlip,
    /// Unit cell of a periodic medium.
    Periodic,
}

/// Index arithmetic for a staggered layout.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mac {
    pub grid: Grid,
    pub bc: Boundary,
}

impl Mac {
    pub fn no_slip(grid: Grid) -> Self {
        Self { grid, bc: Boundary::NoSlip }
    }

    pub fn periodic(grid: Grid) -> Self {
        Self { grid, bc: Boundary::Periodic }
    }

    #[inline]
    pub fn n_u(&self) -> usize {
        match self.bc {
            Boundary::NoSlip => (self.grid.nx + 1) * self.grid.ny,
            Boundary::Periodic => self.grid.nx * self.grid.ny,
        }
    }

    #[inline]
    pub fn n_v(&self) -> usize {
        match self.bc {
            Boundary::NoSlip => self.grid.nx * (self.grid.ny + 1),
            Boundary::Periodic => self.grid.nx * self.grid.ny,
        }
    }

    #[inline]
    pub fn n_dofs(&self) -> usize {
        self.n_u() + self.n_v()
    }

    /// Row length of the `u` block.
    #[inline]
    pub fn u_stride(&self) -> usize {
        match self.bc {
            Boundary::NoSlip => self.grid.nx + 1,
            Boundary::Periodic => self.grid.nx,
        }
    }

    #[inline]
    pub fn u_idx(&self, i: usize, j: usize) -> usize {
        match self.bc {
            Boundary::NoSlip => j * (self.grid.nx + 1) + i,
            Boundary::Periodic => (j % self.grid.ny) * self.grid.nx + (i % self.grid.nx),
        }
    }

    #[inline]
    pub fn v_idx(&self, i: usize, j: usize) -> usize {
        let base = self.n_u();
        match self.bc {
            Boundary::NoSlip => base + j * self.grid.nx + i,
            Boundary::Periodic => base + (j % self.grid.ny) * self.grid.nx + (i % self.grid.nx),
        }
    }

    #[inline]
    pub fn n_vertices(&self) -> usize {
        match self.bc {
            Boundary::NoSlip => (self.grid.nx + 1) * (self.grid.ny + 1),
            Boundary::Periodic => self.grid.nx * self.grid.ny,
        }
    }

    #[inline]
    pub fn vertex_idx(&self, i: usize, j: usize) -> usize {
        match self.bc {
            Boundary::NoSlip => j * (self.grid.nx + 1) + i,
            Boundary::Periodic => (j % self.grid.ny) * self.grid.nx + (i % self.grid.nx),
        }
    }

    /// True for degrees of freedom pinned to zero by the walls.
    pub fn is_pinned(&self, k: usize) -> bool {
        if self.bc == Boundary::Periodic {
            return false;
        }
        let (nx, ny) = (self.grid.nx, self.grid.ny);
        if k < self.n_u() {
            let i = k % (nx + 1);
            i == 0 || i == nx
        } else {
            let j = (k - self.n_u()) / nx;
            j == 0 || j == ny
        }
    }

    pub fn pinned_mask(&self) -> Vec<bool> {
        (0..self.n_dofs()).map(|k| self.is_pinned(k)).collect()
    }

    /// Position of degree of freedom `k`.
    pub fn dof_position(&self, k: usize) -> [f64; 2] {
        let g = &self.grid;
        if k < self.n_u() {
            let s = self.u_stride();
            let (i, j) = (k % s, k / s);
            [i as f64 * g.dx(), (j as f64 + 0.5) * g.dy()]
        } else {
            let k = k - self.n_u();
            let (i, j) = (k % g.nx, k / g.nx);
            [(i as f64 + 0.5) * g.dx(), j as f64 * g.dy()]
        }
    }
}

/// Cell-centred scalar (pressure, densities).
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    pub grid: Grid,
    pub data: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: Grid) -> Self {
        Self { grid, data: vec![0.0; grid.n_cells()] }
    }

    pub fn from_fn(grid: Grid, f: impl Fn([f64; 2]) -> f64) -> Self {
        let mut data = Vec::with_capacity(grid.n_cells());
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                data.push(f(grid.cell_center(i, j)));
            }
        }
        Self { grid, data }
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// `sqrt(sum data^2 * cell area)`.
    pub fn l2_norm(&self) -> f64 {
        (self.data.iter().map(|x| x * x).sum::<f64>() * self.grid.cell_area()).sqrt()
    }

    pub fn remove_mean(&mut self) {
        let m = self.mean();
        self.data.iter_mut().for_each(|x| *x -= m);
    }
}

/// MAC-staggered velocity on a walled rectangle; `data` holds the `u` block
/// followed by the `v` block.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    pub grid: Grid,
    pub data: Vec<f64>,
}

impl VectorField {
    pub fn zeros(grid: Grid) -> Self {
        Self { grid, data: vec![0.0; Mac::no_slip(grid).n_dofs()] }
    }

    pub fn mac(&self) -> Mac {
        Mac::no_slip(self.grid)
    }

    /// Samples `(fu, fv)` at the face centres, boundary faces included.
    pub fn from_fn(grid: Grid, fu: impl Fn([f64; 2]) -> f64, fv: impl Fn([f64; 2]) -> f64) -> Self {
        let mac = Mac::no_slip(grid);
        let data = (0..mac.n_dofs())
            .map(|k| {
                let p = mac.dof_position(k);
                if k < mac.n_u() {
                    fu(p)
                } else {
                    fv(p)
                }
            })
            .collect();
        Self { grid, data }
    }

    /// Constant field (boundary faces included, so not a no-slip field).
    pub fn constant(grid: Grid, c: [f64; 2]) -> Self {
        Self::from_fn(grid, |_| c[0], |_| c[1])
    }

    /// Discrete curl of a stream function sampled at the interior grid vertices,
    /// with `psi = 0` on the boundary. The result is exactly discretely divergence
    /// free and vanishes on the walls.
    pub fn from_stream_function(grid: Grid, psi: impl Fn([f64; 2]) -> f64) -> Self {
        let (dx, dy) = (grid.dx(), grid.dy());
        let mac = Mac::no_slip(grid);
        let node = |i: usize, j: usize| {
            if i == 0 || j == 0 || i == grid.nx || j == grid.ny {
                0.0
            } else {
                psi([i as f64 * dx, j as f64 * dy])
            }
        };
        let mut f = Self::zeros(grid);
        for j in 0..grid.ny {
            for i in 0..=grid.nx {
                f.data[mac.u_idx(i, j)] = (node(i, j + 1) - node(i, j)) / dy;
            }
        }
        for j in 0..=grid.ny {
            for i in 0..grid.nx {
                f.data[mac.v_idx(i, j)] = -(node(i + 1, j) - node(i, j)) / dx;
            }
        }
        f
    }

    #[inline]
    pub fn u(&self, i: usize, j: usize) -> f64 {
        self.data[j * (self.grid.nx + 1) + i]
    }

    #[inline]
    pub fn v(&self, i: usize, j: usize) -> f64 {
        self.data[(self.grid.nx + 1) * self.grid.ny + j * self.grid.nx + i]
    }

    pub fn u_block(&self) -> &[f64] {
        &self.data[..(self.grid.nx + 1) * self.grid.ny]
    }

    pub fn v_block(&self) -> &[f64] {
        &self.data[(self.grid.nx + 1) * self.grid.ny..]
    }

    pub fn zero_boundary(&mut self) {
        let mac = self.mac();
        for (k, x) in self.data.iter_mut().enumerate() {
            if mac.is_pinned(k) {
                *x = 0.0;
            }
        }
    }

    pub fn max_abs_boundary(&self) -> f64 {
        let mac = self.mac();
        self.data
            .iter()
            .enumerate()
            .filter(|(k, _)| mac.is_pinned(*k))
            .fold(0.0, |m, (_, x)| m.max(x.abs()))
    }

    pub fn divergence(&self) -> ScalarField {
        let g = self.grid;
        let (dx, dy) = (g.dx(), g.dy());
        let mut div = ScalarField::zeros(g);
        for j in 0..g.ny {
            for i in 0..g.nx {
                div.data[g.cell_index(i, j)] =
                    (self.u(i + 1, j) - self.u(i, j)) / dx + (self.v(i, j + 1) - self.v(i, j)) / dy;
            }
        }
        div
    }

    pub fn max_abs_divergence(&self) -> f64 {
        self.divergence().max_abs()
    }

    /// Area-weighted inner product (every face carries a `dx dy` control volume).
    pub fn dot(&self, other: &Self) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum::<f64>() * self.grid.cell_area()
    }

    pub fn l2_norm_sq(&self) -> f64 {
        self.dot(self)
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// `self += a * x`
    pub fn axpy(&mut self, a: f64, x: &Self) {
        self.data.iter_mut().zip(&x.data).for_each(|(s, x)| *s += a * x);
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self { grid: self.grid, data: self.data.iter().map(|x| a * x).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self { grid: self.grid, data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect() }
    }

    /// Sum of face values times cell area, per component.
    pub fn integral(&self) -> [f64; 2] {
        let a = self.grid.cell_area();
        [self.u_block().iter().sum::<f64>() * a, self.v_block().iter().sum::<f64>() * a]
    }

    /// Face values averaged to cell centres.
    pub fn cell_centered(&self) -> Vec<[f64; 2]> {
        let g = self.grid;
        let mut out = Vec::with_capacity(g.n_cells());
        for j in 0..g.ny {
            for i in 0..g.nx {
                out.push([
                    0.5 * (self.u(i, j) + self.u(i + 1, j)),
                    0.5 * (self.v(i, j) + self.v(i, j + 1)),
                ]);
            }
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }
}

/// Compact discrete velocity gradient: `(du/dx, dv/dy)` per cell and
/// `(du/dy, dv/dx)` per vertex. Corner samples pair the two.
#[derive(Clone, Debug, PartialEq)]
pub struct GradientField {
    pub mac: Mac,
    pub cell: Vec<[f64; 2]>,
    pub vertex: Vec<[f64; 2]>,
}

impl GradientField {
    pub fn zeros(mac: Mac) -> Self {
        Self { mac, cell: vec![[0.0; 2]; mac.grid.n_cells()], vertex: vec![[0.0; 2]; mac.n_vertices()] }
    }

    /// The same matrix at every sample.
    pub fn uniform(mac: Mac, g: [f64; 4]) -> Self {
        Self { mac, cell: vec![[g[0], g[3]]; mac.grid.n_cells()], vertex: vec![[g[1], g[2]]; mac.n_vertices()] }
    }

    /// Gradient sample at corner `s` of cell `(i, j)`.
    #[inline]
    pub fn corner(&self, i: usize, j: usize, s: usize) -> [f64; 4] {
        let c = self.cell[self.mac.grid.cell_index(i, j)];
        let vtx = self.vertex[self.mac.vertex_idx(i + (s & 1), j + (s >> 1))];
        [c[0], vtx[0], vtx[1], c[1]]
    }

    /// `sum over cells and corners of |G|^2 * area / 4`, the discrete `||grad u||^2`.
    pub fn norm_sq(&self) -> f64 {
        let g = self.mac.grid;
        let mut acc = 0.0;
        for j in 0..g.ny {
            for i in 0..g.nx {
                for s in 0..4 {
                    let c = self.corner(i, j, s);
                    acc += c.iter().map(|x| x * x).sum::<f64>();
                }
            }
        }
        acc * 0.25 * g.cell_area()
    }

    pub fn to_tensor(&self) -> TensorField {
        let g = self.mac.grid;
        let mut data = Vec::with_capacity(4 * g.n_cells());
        for j in 0..g.ny {
            for i in 0..g.nx {
                for s in 0..4 {
                    data.push(self.corner(i, j, s));
                }
            }
        }
        TensorField { grid: g, data }
    }
}

/// Matrix-valued samples at the four corners of every cell.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorField {
    pub grid: Grid,
    pub data: Vec<[f64; 4]>,
}

impl TensorField {
    pub fn zeros(grid: Grid) -> Self {
        Self { grid, data: vec![[0.0; 4]; 4 * grid.n_cells()] }
    }

    pub fn uniform(grid: Grid, m: [f64; 4]) -> Self {
        Self { grid, data: vec![m; 4 * grid.n_cells()] }
    }

    #[inline]
    pub fn sample(&self, cell: usize, s: usize) -> [f64; 4] {
        self.data[4 * cell + s]
    }

    pub fn cell_mean(&self, cell: usize) -> [f64; 4] {
        let mut m = [0.0; 4];
        for s in 0..4 {
            let t = self.data[4 * cell + s];
            for k in 0..4 {
                m[k] += 0.25 * t[k];
            }
        }
        m
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().flatten().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Quadrature `L2` norm matching [`GradientField::norm_sq`].
    pub fn l2_norm_sq(&self) -> f64 {
        self.data.iter().flatten().map(|x| x * x).sum::<f64>() * 0.25 * self.grid.cell_area()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stream_function_fields_are_divergence_free() {
        let g = Grid::new(12, 9, 1.0, 0.75).unwrap();
        let f = VectorField::from_stream_function(g, |p| {
            (std::f64::consts::PI * p[0]).sin().powi(2) * (4.0 * p[1] / 3.0 * std::f64::consts::PI).sin().powi(2)
        });
        assert!(f.max_abs_divergence() < 1e-12);
        assert!(f.max_abs_boundary() < 1e-14);
        assert!(f.max_abs() > 0.1);
    }

    #[test]
    fn pinned_dofs_are_normal_boundary_faces() {
        let g = Grid::unit(4).unwrap();
        let mac = Mac::no_slip(g);
        let pinned = mac.pinned_mask().iter().filter(|p| **p).count();
        assert_eq!(pinned, 2 * 4 + 2 * 4);
        assert!(mac.is_pinned(mac.u_idx(0, 2)));
        assert!(!mac.is_pinned(mac.u_idx(1, 0)));
        assert!(mac.is_pinned(mac.v_idx(3, 4)));
    }

    #[test]
    fn uniform_gradient_corners() {
        let mac = Mac::no_slip(Grid::unit(4).unwrap());
        let gf = GradientField::uniform(mac, [1.0, 2.0, 3.0, 4.0]);
        assert_eq!(gf.corner(2, 3, 3), [1.0, 2.0, 3.0, 4.0]);
        assert!((gf.norm_sq() - 30.0).abs() < 1e-12);
    }
}
