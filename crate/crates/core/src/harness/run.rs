//! Orchestration of single runs from a [`RunConfig`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::RunConfig;
use super::output::OutputDir;
use super::scenario::{initial_data, parse_coefficient, sample_particles};
use crate::coupled::{CoupledRun, CoupledState, EnergyReport};
use crate::error::Result;
use crate::fields::{OscillatoryCoefficient, VectorField};
use crate::homogenization::{audit_c0, voigt_bound, CellProblemSpec, EffectiveTensors, TensorAudit};
use crate::homogenized::HomogenizedRun;
use crate::particles::{ParticleEnsemble, RegularizationParams};
use crate::stokes::{MemoryKernel, StokesSolver, StokesState, Viscosity};

pub const ENERGY_HEADER: [&str; 12] = [
    "t",
    "fluid_ke",
    "particle_ke",
    "mass",
    "second_moment",
    "drag_dissipation",
    "viscous_dissipation",
    "memory_credit",
    "drag_l1",
    "drag_l1_bound",
    "dissipated_total",
    "energy_bound",
];

/// A named pass/fail audit with the measured value.
#[derive(Clone, Debug, PartialEq)]
pub struct Audit {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Audit {
    pub fn new(name: &str, passed: bool, detail: String) -> Self {
        Self { name: name.into(), passed, detail }
    }
}

pub fn all_passed(audits: &[Audit]) -> bool {
    audits.iter().all(|a| a.passed)
}

fn energy_row(r: &EnergyReport, alpha: f64, e0: f64, dt: f64) -> Vec<f64> {
    vec![
        r.t,
        r.fluid_ke,
        r.particle_ke,
        r.mass,
        r.second_moment,
        r.drag_dissipation_cum,
        r.viscous_dissipation_cum,
        r.memory_credit,
        r.drag_l1_cum,
        r.drag_l1_bound,
        r.dissipated_total(alpha),
        e0 * (1.0 + 10.0 * dt) + r.memory_credit,
    ]
}

/// Coefficients named in the configuration.
pub fn coefficients(cfg: &RunConfig) -> Result<(OscillatoryCoefficient, OscillatoryCoefficient)> {
    Ok((parse_coefficient(&cfg.coeff_a0)?, parse_coefficient(&cfg.coeff_a1)?))
}

/// Fine-scale coupled run at `eps` built from the configuration.
pub fn build_fine_run(cfg: &RunConfig, eps: f64) -> Result<CoupledRun> {
    let grid = cfg.grid()?;
    let (a0, a1) = coefficients(cfg)?;
    let (u0, f0) = initial_data(&cfg.initial_data, grid, cfg.mass)?;
    let particles = sample_particles(cfg, grid, &f0)?;
    fine_run(cfg, eps, &a0, &a1, u0, particles)
}

pub fn fine_run(
    cfg: &RunConfig,
    eps: f64,
    a0: &OscillatoryCoefficient,
    a1: &OscillatoryCoefficient,
    u0: VectorField,
    particles: ParticleEnsemble,
) -> Result<CoupledRun> {
    let grid = u0.grid;
    let memory = if a1.is_zero() { MemoryKernel::Zero } else { MemoryKernel::Fine { coeff: a1.clone(), eps } };
    let retain = !memory.is_zero();
    let mut solver = StokesSolver::new(grid, cfg.dt, Viscosity::Fine { coeff: a0.clone(), eps }, memory);
    solver.options.pressure.rel_tol = cfg.solver_tol;
    let params = if cfg.lambda > 0.0 { Some(RegularizationParams::new(cfg.lambda)?) } else { None };
    let state = CoupledState::new(StokesState::new(u0)?, particles, cfg.dt, eps, params, retain)?;
    CoupledRun::new(state, solver, a0.alpha)
}

#[derive(Clone, Debug)]
pub struct SimulationSummary {
    pub steps: usize,
    pub particles: usize,
    pub final_report: EnergyReport,
    pub audits: Vec<Audit>,
}

/// Fine-scale run at the first `eps` of the configuration.
pub fn simulate(cfg: &RunConfig, out: &mut OutputDir) -> Result<SimulationSummary> {
    let eps = cfg.eps[0];
    cfg.grid_spec(0)?.validate_fine_scale()?;
    let mut run = build_fine_run(cfg, eps)?;
    let dt = cfg.dt;
    let e0 = run.initial_report().energy();
    let m0 = run.initial_report().mass;
    let n_particles = run.state.particles.len();
    let mut rows = vec![energy_row(&run.initial_report(), run.alpha, e0, dt)];
    let (mut worst_balance, mut worst_cfl, mut energy_ok, mut mass_drift) = (f64::NEG_INFINITY, 0.0f64, true, 0.0f64);
    let mut diag = Vec::new();
    write_snapshot(out, cfg, 0, &run)?;
    for n in 1..=cfg.n_steps() {
        let rep = run.step()?;
        let r = run.energy_ledger();
        rows.push(energy_row(&r, run.alpha, e0, dt));
        diag.push(vec![
            r.t,
            rep.stokes.iterations as f64,
            rep.stokes.max_divergence,
            rep.stokes.memory_stress_norm,
            rep.push.cfl,
            rep.push.reflections as f64,
            rep.momentum_residual,
            rep.fluid_balance,
        ]);
        energy_ok &= run.energy_inequality_holds(10.0 * dt);
        worst_balance = worst_balance.max(rep.fluid_balance);
        worst_cfl = worst_cfl.max(rep.push.cfl);
        if m0 > 0.0 {
            mass_drift = mass_drift.max((r.mass - m0).abs() / m0);
        }
        write_snapshot(out, cfg, n, &run)?;
    }
    out.write_csv("energy.csv", &ENERGY_HEADER, &rows)?;
    out.write_csv(
        "diagnostics.csv",
        &["t", "cg_iterations", "max_divergence", "memory_stress", "cfl", "reflections", "momentum_residual", "fluid_balance"],
        &diag,
    )?;
    let final_report = run.energy_ledger();
    let audits = vec![
        Audit::new("energy inequality", energy_ok, format!("E0 = {e0:.6e}")),
        Audit::new("mass conservation", mass_drift <= 1e-13, format!("relative drift {mass_drift:.3e}")),
        Audit::new("nonnegative weights", run.state.particles.min_weight() >= 0.0, String::new()),
        Audit::new("containment", run.state.particles.all_inside(&run.grid()), String::new()),
        Audit::new("particle CFL", worst_cfl <= 1.0, format!("max {worst_cfl:.3}")),
        Audit::new(
            "drag L1 bound",
            final_report.drag_l1_cum <= final_report.drag_l1_bound * (1.0 + 1e-12),
            format!("{:.4e} <= {:.4e}", final_report.drag_l1_cum, final_report.drag_l1_bound),
        ),
    ];
    out.write_text("audits.txt", &audit_text(&audits))?;
    Ok(SimulationSummary { steps: cfg.n_steps(), particles: n_particles, final_report, audits })
}

fn write_snapshot(out: &mut OutputDir, cfg: &RunConfig, n: usize, run: &CoupledRun) -> Result<()> {
    if cfg.snapshot_stride > 0 && n.is_multiple_of(cfg.snapshot_stride) {
        out.write_velocity(&format!("snapshots/u_{n:06}.bin"), &run.state.fluid.u)?;
        out.write_scalar(&format!("snapshots/p_{n:06}.bin"), &run.state.fluid.p)?;
        out.write_particles(&format!("snapshots/particles_{n:06}.bin"), &run.state.particles)?;
    }
    Ok(())
}

pub fn audit_text(audits: &[Audit]) -> String {
    audits
        .iter()
        .map(|a| format!("{} {}: {}\n", if a.passed { "PASS" } else { "FAIL" }, a.name, a.detail))
        .collect()
}

/// `n` random gradient directions from a fixed seed.
pub fn random_directions(n: usize, seed: u64) -> Vec<[f64; 4]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| std::array::from_fn(|_| rng.gen_range(-1.0..1.0))).collect()
}

#[derive(Clone, Debug)]
pub struct CellSummary {
    pub tensors: EffectiveTensors,
    pub audit: TensorAudit,
    pub audits: Vec<Audit>,
}

/// Effective tensors with their audit. `c1` is sampled at the run's steps.
pub fn cell(cfg: &RunConfig, out: Option<&mut OutputDir>) -> Result<(CellSummary, crate::homogenization::Corrector)> {
    let (a0, a1) = coefficients(cfg)?;
    let mut spec = CellProblemSpec::new(a0, a1, cfg.ny_cell)?;
    spec.tol = spec.tol.min(cfg.solver_tol);
    let (tensors, corr) = EffectiveTensors::compute(&spec, cfg.dt, cfg.n_steps())?;
    let audit = audit_c0(&tensors.c0, spec.a0.alpha, &voigt_bound(&spec), &random_directions(100, 7));
    let audits = vec![
        Audit::new("C0 symmetry", audit.asymmetry <= 1e-8, format!("asymmetry {:.3e}", audit.asymmetry)),
        Audit::new("C0 coercivity", audit.coercivity_margin >= 0.0, format!("margin {:.3e}", audit.coercivity_margin)),
        Audit::new("C0 Voigt bound", audit.voigt_margin >= 0.0, format!("margin {:.3e}", audit.voigt_margin)),
        Audit::new("cell residual", corr.max_residual() <= 1e-8, format!("{:.3e}", corr.max_residual())),
    ];
    if let Some(out) = out {
        out.write_csv("c0.csv", &["row", "c0", "c1", "c2", "c3"], &tensor_rows(&tensors.c0))?;
        let lags: Vec<Vec<f64>> = tensors
            .c1
            .iter()
            .enumerate()
            .map(|(k, c)| std::iter::once(k as f64 * cfg.dt).chain(c.iter().copied()).collect())
            .collect();
        let mut header = vec!["lag".to_string()];
        header.extend((0..16).map(|k| format!("c{}{}", k / 4, k % 4)));
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        out.write_csv("c1.csv", &header, &lags)?;
        out.write_text("audits.txt", &audit_text(&audits))?;
    }
    Ok((CellSummary { tensors, audit, audits }, corr))
}

fn tensor_rows(c: &[f64; 16]) -> Vec<Vec<f64>> {
    (0..4).map(|r| vec![r as f64, c[4 * r], c[4 * r + 1], c[4 * r + 2], c[4 * r + 3]]).collect()
}

/// Homogenized run with freshly computed tensors.
pub fn homogenize(cfg: &RunConfig, out: &mut OutputDir) -> Result<(CellSummary, EnergyReport)> {
    let (summary, _) = cell(cfg, Some(out))?;
    let grid = cfg.grid()?;
    let (u0, f0) = initial_data(&cfg.initial_data, grid, cfg.mass)?;
    let particles = sample_particles(cfg, grid, &f0)?;
    let mut run = HomogenizedRun::new(u0, particles, summary.tensors.clone(), cfg.dt)?;
    let e0 = run.run.initial_report().energy();
    let alpha = run.run.alpha;
    let mut rows = vec![energy_row(&run.run.initial_report(), alpha, e0, cfg.dt)];
    for n in 1..=cfg.n_steps() {
        run.step()?;
        rows.push(energy_row(&run.energy_ledger(), alpha, e0, cfg.dt));
        if cfg.snapshot_stride > 0 && n % cfg.snapshot_stride == 0 {
            out.write_velocity(&format!("snapshots/u0_{n:06}.bin"), &run.fluid().u)?;
        }
    }
    out.write_csv("energy.csv", &ENERGY_HEADER, &rows)?;
    Ok((summary, run.energy_ledger()))
}
