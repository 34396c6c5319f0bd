use proptest::prelude::*;
use svlab::fields::interp::{deposit, deposit_density, interpolate_velocity};
use svlab::fields::snapshot::{read_vector_field, write_vector_field};
use svlab::fields::{Grid, VectorField};
use svlab::harness::scenario::{preset, vortex};
use svlab::harness::RunConfig;
use svlab::particles::io::{read_particles, write_particles};
use svlab::particles::push::fold_into_domain;
use svlab::particles::{specular_reflect, ParticleEnsemble, Wall};

fn field_with(grid: Grid, seed: &[f64]) -> VectorField {
    let mut u = VectorField::zeros(grid);
    for (k, d) in u.data.iter_mut().enumerate() {
        *d = seed[k % seed.len()] * (1.0 + k as f64).sqrt().sin();
    }
    u
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn velocity_snapshot_round_trip_is_bitwise(
        n in 4usize..12,
        seed in prop::collection::vec(-1e3f64..1e3, 1..8),
    ) {
        let grid = Grid::new(n, n + 1, 1.5, 0.75).unwrap();
        let u = field_with(grid, &seed);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("u.bin");
        write_vector_field(&path, &u).unwrap();
        let back = read_vector_field(&path, grid.lx, grid.ly).unwrap();
        prop_assert_eq!(back.grid, grid);
        prop_assert!(back.data.iter().zip(&u.data).all(|(a, b)| a.to_bits() == b.to_bits()));
    }

    #[test]
    fn particle_snapshot_round_trip_is_bitwise(
        parts in prop::collection::vec(((0.0f64..1.0, 0.0f64..1.0), (-5.0f64..5.0, -5.0f64..5.0), 0.0f64..2.0), 0..40),
    ) {
        let mut ens = ParticleEnsemble::default();
        for ((x, y), (a, b), w) in parts {
            ens.push([x, y], [a, b], w);
        }
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.bin");
        write_particles(&path, &ens).unwrap();
        prop_assert_eq!(read_particles(&path).unwrap(), ens);
    }

    #[test]
    fn reflection_preserves_speed_and_is_an_involution(
        x in (0.0f64..1.0, 0.0f64..1.0),
        v in (-1e3f64..1e3, -1e3f64..1e3),
        wall in prop::sample::select(vec![Wall::Left, Wall::Right, Wall::Bottom, Wall::Top]),
    ) {
        let grid = Grid::unit(8).unwrap();
        let (x0, v0) = ([x.0, x.1], [v.0, v.1]);
        let (x1, v1) = specular_reflect(&grid, x0, v0, wall);
        prop_assert_eq!((v1[0] * v1[0] + v1[1] * v1[1]).to_bits(), (v0[0] * v0[0] + v0[1] * v0[1]).to_bits());
        let (x2, v2) = specular_reflect(&grid, x1, v1, wall);
        prop_assert_eq!(v2, v0);
        prop_assert!((x2[0] - x0[0]).abs() <= 1e-15 && (x2[1] - x0[1]).abs() <= 1e-15);
    }

    #[test]
    fn folding_lands_inside_and_keeps_speed(
        x in (-3.0f64..4.0, -3.0f64..4.0),
        v in (-10.0f64..10.0, -10.0f64..10.0),
    ) {
        let grid = Grid::unit(4).unwrap();
        let (mut xf, mut vf) = ([x.0, x.1], [v.0, v.1]);
        fold_into_domain(&grid, &mut xf, &mut vf);
        prop_assert!(grid.contains(xf));
        prop_assert_eq!(vf[0].abs(), v.0.abs());
        prop_assert_eq!(vf[1].abs(), v.1.abs());
    }

    #[test]
    fn deposit_is_adjoint_to_interpolation(
        parts in prop::collection::vec(((0.0f64..1.0, 0.0f64..1.0), (-2.0f64..2.0, -2.0f64..2.0)), 1..30),
        amp in -2.0f64..2.0,
    ) {
        let grid = Grid::unit(8).unwrap();
        let u = vortex(grid, amp);
        let xs: Vec<[f64; 2]> = parts.iter().map(|p| [p.0 .0, p.0 .1]).collect();
        let qs: Vec<[f64; 2]> = parts.iter().map(|p| [p.1 .0, p.1 .1]).collect();
        let lhs = deposit(grid, &xs, &qs).unwrap().dot(&u);
        let rhs: f64 = xs
            .iter()
            .zip(&qs)
            .map(|(x, q)| {
                let ux = interpolate_velocity(&u, *x).unwrap();
                q[0] * ux[0] + q[1] * ux[1]
            })
            .sum();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()), "{} vs {}", lhs, rhs);
    }

    #[test]
    fn density_deposit_conserves_mass(
        parts in prop::collection::vec(((0.0f64..1.0, 0.0f64..1.0), 0.0f64..3.0), 1..50),
    ) {
        let grid = Grid::new(6, 9, 1.0, 1.0).unwrap();
        let xs: Vec<[f64; 2]> = parts.iter().map(|p| [p.0 .0, p.0 .1]).collect();
        let ws: Vec<f64> = parts.iter().map(|p| p.1).collect();
        let rho = deposit_density(grid, &xs, &ws).unwrap();
        let total: f64 = rho.data.iter().sum::<f64>() * grid.cell_area();
        let mass: f64 = ws.iter().sum();
        prop_assert!((total - mass).abs() <= 1e-12 * (1.0 + mass));
        prop_assert!(rho.data.iter().all(|r| *r >= 0.0));
    }

    #[test]
    fn config_round_trips(
        n in 1usize..8,
        k in prop::collection::btree_set(1usize..6, 1..4),
        dt in 1e-4f64..0.1,
        steps in 1usize..500,
        vmax in 0.5f64..10.0,
        lambda in 0.0f64..1.0,
    ) {
        let eps: Vec<f64> = k.iter().map(|k| 1.0 / *k as f64).collect();
        let mut cfg = RunConfig::with_defaults("constant", 8 * n * 8, dt, dt * steps as f64, eps);
        cfg.vmax = vmax;
        cfg.lambda = lambda;
        cfg.coarse_n = 8 * n;
        prop_assert!(cfg.validate().is_ok());
        prop_assert_eq!(RunConfig::parse(&cfg.serialize()).unwrap(), cfg);
    }
}

#[test]
fn invalid_eps_names_the_constraint() {
    let mut cfg = preset("constant").unwrap();
    cfg.eps = vec![0.3];
    let msg = cfg.validate().unwrap_err().to_string();
    assert!(msg.contains("reciprocal of an integer"), "{msg}");
}

#[test]
fn empty_config_lists_every_required_key() {
    let msg = RunConfig::parse("# nothing\n").unwrap_err().to_string();
    for key in svlab::harness::config::REQUIRED_KEYS {
        assert!(msg.contains(key), "{key} missing from `{msg}`");
    }
}
