use crate::error::{Error, Result};

/// Uniform rectangular grid `[0, lx] x [0, ly]` with `nx * ny` cells.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
}

impl Grid {
    pub fn new(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Self> {
        if nx < 4 || ny < 4 {
            return Err(Error::Grid(format!("need at least 4 cells per direction, got {nx}x{ny}")));
        }
        if !(lx > 0.0 && ly > 0.0 && lx.is_finite() && ly.is_finite()) {
            return Err(Error::Grid(format!("extents must be positive, got {lx}x{ly}")));
        }
        Ok(Self { nx, ny, lx, ly })
    }

    /// `n x n` cells on the unit square.
    pub fn unit(n: usize) -> Result<Self> {
        Self::new(n, n, 1.0, 1.0)
    }

    #[inline]
    pub fn dx(&self) -> f64 {
        self.lx / self.nx as f64
    }

    #[inline]
    pub fn dy(&self) -> f64 {
        self.ly / self.ny as f64
    }

    #[inline]
    pub fn cell_area(&self) -> f64 {
        self.dx() * self.dy()
    }

    #[inline]
    pub fn n_cells(&self) -> usize {
        self.nx * self.ny
    }

    #[inline]
    pub fn cell_index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn cell_center(&self, i: usize, j: usize) -> [f64; 2] {
        [(i as f64 + 0.5) * self.dx(), (j as f64 + 0.5) * self.dy()]
    }

    /// Closed-domain membership, with a small relative slack for roundoff.
    pub fn contains(&self, x: [f64; 2]) -> bool {
        let sx = 1e-12 * self.lx;
        let sy = 1e-12 * self.ly;
        x[0] >= -sx && x[0] <= self.lx + sx && x[1] >= -sy && x[1] <= self.ly + sy
    }

    pub fn min_spacing(&self) -> f64 {
        self.dx().min(self.dy())
    }

    /// Cell containing `x`, clamped to the grid.
    pub fn locate_cell(&self, x: [f64; 2]) -> (usize, usize) {
        let i = ((x[0] / self.dx()).floor().max(0.0) as usize).min(self.nx - 1);
        let j = ((x[1] / self.dy()).floor().max(0.0) as usize).min(self.ny - 1);
        (i, j)
    }
}

/// Grid plus the time-stepping and scale parameters of a run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub grid: Grid,
    pub dt: f64,
    pub t_final: f64,
    pub eps: f64,
}

impl GridSpec {
    pub fn new(grid: Grid, dt: f64, t_final: f64, eps: f64) -> Result<Self> {
        let spec = Self { grid, dt, t_final, eps };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Grid(format!("dt must be positive, got {}", self.dt)));
        }
        if self.t_final < self.dt * (1.0 - 1e-12) {
            return Err(Error::Grid(format!("T = {} is smaller than dt = {}", self.t_final, self.dt)));
        }
        check_eps(self.eps).map_err(Error::Grid)
    }

    /// Fine-scale runs must resolve each oscillation period with at least 8 cells.
    pub fn validate_fine_scale(&self) -> Result<()> {
        self.validate()?;
        let per_period = (self.eps / self.grid.dx()).min(self.eps / self.grid.dy());
        if per_period < 8.0 - 1e-9 {
            return Err(Error::Grid(format!(
                "eps = {} is resolved by only {:.2} cells per period (need nx*eps >= 8)",
                self.eps, per_period
            )));
        }
        Ok(())
    }

    pub fn n_steps(&self) -> usize {
        (self.t_final / self.dt).round() as usize
    }
}

/// Checks `0 < eps <= 1` with `1/eps` an integer.
pub fn check_eps(eps: f64) -> std::result::Result<(), String> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(format!("eps must lie in (0, 1], got {eps}"));
    }
    let inv = 1.0 / eps;
    if (inv - inv.round()).abs() > 1e-9 * inv {
        return Err(format!("eps = {eps} is not the reciprocal of an integer"));
    }
    Ok(())
}
