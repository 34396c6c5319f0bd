//! Built-in coefficients, initial data and scenario presets.

use std::f64::consts::PI;
use std::sync::Arc;

use super::config::RunConfig;
use crate::error::{Error, Result};
use crate::fields::{Grid, OscillatoryCoefficient, VectorField};
use crate::particles::{init_from_density, regularize_initial, Density, Lattice, ParticleEnsemble, RegularizationParams};

pub const SCENARIOS: [&str; 5] = ["constant", "sinusoidal-A0", "checkerboard-A0", "exp-memory-kernel", "coupled-cloud"];

/// Cloud centre, radius, mean velocity and velocity radius.
pub const CLOUD_CENTER: [f64; 2] = [0.5, 0.5];
pub const CLOUD_RADIUS: f64 = 0.2;
pub const CLOUD_DRIFT: [f64; 2] = [1.0, 0.0];
pub const CLOUD_SPREAD: f64 = 2.0;

/// `zero`, `constant:a`, `sinusoidal:nu`, `checkerboard:lo,hi` or `exp-memory:b`.
pub fn parse_coefficient(id: &str) -> Result<OscillatoryCoefficient> {
    let (name, args) = id.split_once(':').unwrap_or((id, ""));
    let vals: Vec<f64> = if args.trim().is_empty() {
        Vec::new()
    } else {
        args.split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::Validation(format!("bad coefficient arguments in `{id}`")))?
    };
    let want = |n: usize| {
        if vals.len() == n && vals.iter().all(|v| *v > 0.0) {
            Ok(())
        } else {
            Err(Error::Validation(format!("coefficient `{name}` takes {n} positive argument(s), got `{id}`")))
        }
    };
    match name.trim() {
        "zero" => Ok(OscillatoryCoefficient::zero()),
        "constant" => want(1).map(|_| OscillatoryCoefficient::constant(vals[0])),
        "sinusoidal" => want(1).map(|_| OscillatoryCoefficient::sinusoidal(vals[0])),
        "checkerboard" => want(2).map(|_| OscillatoryCoefficient::checkerboard(vals[0], vals[1])),
        "exp-memory" => want(1).map(|_| OscillatoryCoefficient::exp_memory(vals[0])),
        other => Err(Error::Validation(format!("unknown coefficient `{other}`"))),
    }
}

/// Discrete curl of `amp sin^2(pi x / lx) sin^2(pi y / ly)`: a single cavity-like
/// vortex vanishing on the walls.
pub fn vortex(grid: Grid, amp: f64) -> VectorField {
    let (lx, ly) = (grid.lx, grid.ly);
    VectorField::from_stream_function(grid, move |x| {
        amp * (PI * x[0] / lx).sin().powi(2) * (PI * x[1] / ly).sin().powi(2)
    })
}

/// `rho (1 - s^2)^2_+ (1 - |v - V|^2 / R^2)^3_+` with `s = |x - c| / r`.
pub fn cloud_density(rho: f64) -> Density {
    Arc::new(move |x, v| {
        let s2 = ((x[0] - CLOUD_CENTER[0]).powi(2) + (x[1] - CLOUD_CENTER[1]).powi(2)) / (CLOUD_RADIUS * CLOUD_RADIUS);
        let r2 = ((v[0] - CLOUD_DRIFT[0]).powi(2) + (v[1] - CLOUD_DRIFT[1]).powi(2)) / (CLOUD_SPREAD * CLOUD_SPREAD);
        if s2 >= 1.0 || r2 >= 1.0 {
            0.0
        } else {
            rho * (1.0 - s2).powi(2) * (1.0 - r2).powi(3)
        }
    })
}

/// Exact total mass of [`cloud_density`]: `rho * (pi r^2 / 3) * (pi R^2 / 4)`.
pub fn cloud_mass(rho: f64) -> f64 {
    rho * (PI * CLOUD_RADIUS * CLOUD_RADIUS / 3.0) * (PI * CLOUD_SPREAD * CLOUD_SPREAD / 4.0)
}

/// Initial fluid velocity and kinetic density named by `id`:
/// `rest`, `vortex` or `coupled-cloud`.
pub fn initial_data(id: &str, grid: Grid, rho: f64) -> Result<(VectorField, Density)> {
    let none: Density = Arc::new(|_, _| 0.0);
    match id {
        "rest" => Ok((VectorField::zeros(grid), none)),
        "vortex" => Ok((vortex(grid, 1.0 / PI), none)),
        "coupled-cloud" => Ok((vortex(grid, 1.0 / PI), cloud_density(rho))),
        other => Err(Error::Validation(format!("unknown initial data `{other}`"))),
    }
}

/// Lattice sample of the configured density, regularised when `lambda > 0`.
pub fn sample_particles(cfg: &RunConfig, grid: Grid, f0: &Density) -> Result<ParticleEnsemble> {
    let lattice = Lattice::uniform(cfg.lattice_x, cfg.lattice_v);
    if cfg.lambda > 0.0 {
        let params = RegularizationParams::new(cfg.lambda)?;
        let f = regularize_initial(f0, grid, params);
        Ok(init_from_density(&f, &grid, lattice, cfg.vmax))
    } else {
        Ok(init_from_density(f0, &grid, lattice, cfg.vmax))
    }
}

/// Default configuration of a named scenario.
pub fn preset(name: &str) -> Result<RunConfig> {
    let mut c = RunConfig::with_defaults(name, 32, 0.01, 0.5, vec![0.25]);
    match name {
        "constant" => {
            c.coeff_a0 = "constant:0.1".into();
            c.initial_data = "vortex".into();
        }
        "sinusoidal-A0" => {
            c.nx = 128;
            c.ny = 128;
            c.eps = vec![0.25, 0.125, 0.0625];
            c.coeff_a0 = "sinusoidal:0.1".into();
            c.initial_data = "coupled-cloud".into();
            c.coarse_n = 64;
            c.lattice_x = 64;
        }
        "checkerboard-A0" => {
            c.nx = 64;
            c.ny = 64;
            c.eps = vec![0.25, 0.125];
            c.coeff_a0 = "checkerboard:1,3".into();
            c.initial_data = "vortex".into();
        }
        "exp-memory-kernel" => {
            c.coeff_a0 = "constant:0.1".into();
            c.coeff_a1 = "exp-memory:0.05".into();
            c.initial_data = "vortex".into();
        }
        "coupled-cloud" => {
            c.coeff_a0 = "constant:0.1".into();
            c.initial_data = "coupled-cloud".into();
        }
        other => {
            return Err(Error::Validation(format!("unknown scenario `{other}` (known: {})", SCENARIOS.join(", "))))
        }
    }
    c.out_dir = format!("out/{name}").into();
    c.validate()?;
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coefficient_ids() {
        assert!(parse_coefficient("zero").unwrap().is_zero());
        let a = parse_coefficient("checkerboard:1,3").unwrap();
        assert_eq!(a.alpha, 1.0);
        assert!(parse_coefficient("sinusoidal").is_err());
        assert!(parse_coefficient("marble:1").is_err());
    }

    #[test]
    fn presets_validate() {
        for s in SCENARIOS {
            let c = preset(s).unwrap();
            assert_eq!(RunConfig::parse(&c.serialize()).unwrap(), c);
        }
    }

    #[test]
    fn cloud_mass_matches_fine_lattice() {
        let g = Grid::unit(8).unwrap();
        let ens = init_from_density(&cloud_density(1.0), &g, Lattice::uniform(96, 96), 4.0);
        assert!((ens.total_mass() - cloud_mass(1.0)).abs() < 2e-3 * cloud_mass(1.0));
    }

    #[test]
    fn vortex_is_admissible() {
        let u = vortex(Grid::unit(16).unwrap(), 0.3);
        assert_eq!(u.max_abs_boundary(), 0.0);
        assert!(u.max_abs_divergence() < 1e-12);
    }
}
