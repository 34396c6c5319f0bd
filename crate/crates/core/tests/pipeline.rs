use svlab::harness::output::verify_manifest;
use svlab::harness::run::{all_passed, cell, homogenize, simulate};
use svlab::harness::{run_convergence_study, OutputDir, RunConfig};

fn small(scenario: &str) -> RunConfig {
    let mut cfg = RunConfig::with_defaults(scenario, 16, 0.02, 0.1, vec![0.5]);
    cfg.coeff_a0 = "sinusoidal:0.1".into();
    cfg.coeff_a1 = "exp-memory:0.05".into();
    cfg.initial_data = "coupled-cloud".into();
    cfg.lattice_x = 12;
    cfg.lattice_v = 12;
    cfg.ny_cell = 16;
    cfg.coarse_n = 8;
    cfg.snapshot_stride = 2;
    cfg
}

fn manifest(dir: &std::path::Path) -> String {
    std::fs::read_to_string(dir.join("manifest.txt")).unwrap()
}

#[test]
fn simulate_is_bitwise_reproducible_and_audited() {
    let cfg = small("coupled-cloud");
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let mut out_a = OutputDir::create(a.path(), &cfg).unwrap();
    let summary = simulate(&cfg, &mut out_a).unwrap();
    assert!(all_passed(&summary.audits), "{:?}", summary.audits);
    let mut out_b = OutputDir::create(b.path(), &cfg).unwrap();
    simulate(&cfg, &mut out_b).unwrap();
    assert_eq!(manifest(a.path()), manifest(b.path()));
    assert!(verify_manifest(a.path()).unwrap().is_empty());
    assert!(a.path().join("snapshots/u_000004.bin").exists());
    let energy = std::fs::read_to_string(a.path().join("energy.csv")).unwrap();
    assert_eq!(energy.lines().count(), 1 + 1 + cfg.n_steps());
}

#[test]
fn cell_and_homogenized_runs_write_their_tables() {
    let cfg = small("exp-memory-kernel");
    let dir = tempfile::tempdir().unwrap();
    let mut out = OutputDir::create(dir.path(), &cfg).unwrap();
    let (summary, _) = cell(&cfg, Some(&mut out)).unwrap();
    assert!(all_passed(&summary.audits), "{:?}", summary.audits);
    assert_eq!(summary.tensors.c1.len(), cfg.n_steps() + 1);
    let (_, last) = homogenize(&cfg, &mut out).unwrap();
    assert!((last.t - cfg.t_final).abs() < 1e-12);
    let names: Vec<&str> = out.entries().iter().map(|e| e.0.as_str()).collect();
    for want in ["config.txt", "c0.csv", "c1.csv", "audits.txt", "energy.csv"] {
        assert!(names.contains(&want), "{want} not in {names:?}");
    }
}

#[test]
fn convergence_table_is_reproducible() {
    let mut cfg = small("sinusoidal-A0");
    cfg.eps = vec![0.5, 0.25];
    cfg.nx = 32;
    cfg.ny = 32;
    cfg.coeff_a1 = "zero".into();
    let first = run_convergence_study(&cfg, None).unwrap();
    let second = run_convergence_study(&cfg, None).unwrap();
    assert_eq!(first.rows.len(), 2);
    for (a, b) in first.rows.iter().zip(&second.rows) {
        assert_eq!(a.plain_error.to_bits(), b.plain_error.to_bits());
        assert_eq!(a.corrected_error.to_bits(), b.corrected_error.to_bits());
        assert_eq!(a.moment_gap.to_bits(), b.moment_gap.to_bits());
    }
    assert!(first.rows.iter().all(|r| r.plain_error > 0.0 && r.plain_error.is_finite()));
}
