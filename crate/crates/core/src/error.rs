use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("position ({x}, {y}) lies outside the domain")]
    Domain { x: f64, y: f64 },

    #[error("{solver} did not converge: residual {residual:.3e} after {iterations} iterations")]
    Solver {
        solver: &'static str,
        residual: f64,
        iterations: usize,
    },

    #[error("integration error: {0}")]
    Integration(String),

    #[error("inconsistent state: {0}")]
    State(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("missing required keys: {}", .0.join(", "))]
    MissingKeys(Vec<String>),

    #[error("invalid configuration: {0}")]
    Validation(String),

    #[error("bad file format in {path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
