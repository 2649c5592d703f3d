//! Numerical toolkit for positive-scalar-curvature tunnels, sewn spheres and
//! pulled-string quotient spaces.

pub mod convergence;
pub mod error;
pub mod metric;
pub mod revolution;
pub mod sewing;
pub mod tunnel;

pub use error::{Error, Result};
