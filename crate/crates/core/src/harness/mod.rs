//! Configuration, run orchestration, the refinement study and the acceptance driver.

pub mod acceptance;
pub mod config;
pub mod converge;
pub mod output;
pub mod run;
pub mod scenario;
pub mod verify;

pub use config::RunConfig;
pub use converge::{run_convergence_study, ConvergenceRow, ConvergenceTable};
pub use output::OutputDir;

/// Sizes the global worker pool. Only the first call takes effect.
pub fn init_workers(n: usize) -> crate::Result<()> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| crate::Error::Validation(format!("cannot start {n} workers: {e}")))
}
