//! Numerical laboratory for a Stokes fluid with oscillating instantaneous and
//! memory viscosities, coupled to a kinetic (Vlasov) particle phase through
//! drag, together with its periodic homogenization.

pub mod coupled;
pub mod error;
pub mod fields;
pub mod harness;
pub mod homogenization;
pub mod homogenized;
pub mod linalg;
pub mod particles;
pub mod stokes;

pub use error::{Error, Result};
