//! Grids, staggered fields, coefficients and the shared discrete operators.

pub mod coefficient;
pub mod field;
pub mod grid;
pub mod interp;
pub mod projection;
pub mod snapshot;
pub mod stream;
pub mod viscous;

pub use coefficient::{sample_coefficient, Mat2, OscillatoryCoefficient};
pub use field::{Boundary, GradientField, Mac, ScalarField, TensorField, VectorField};
pub use grid::{check_eps, Grid, GridSpec};
pub use interp::interpolate_velocity;
pub use projection::project_divergence_free;
pub use viscous::{Tensor4, ViscosityField, ViscousOperator};
