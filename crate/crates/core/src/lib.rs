//! Geometric log-concave functions, their Legendre and polarity transforms, the convex bodies
//! attached to them, and functional covering numbers computed by linear programming.

pub mod error;
pub mod functions;
pub mod bodies;
pub mod quadrature;
pub mod transforms;
pub mod isotropic;
pub mod lp;
pub mod covering;
pub mod harness;

pub use error::{Error, Result};
pub use functions::{ClosedFormKind, ClosedFormSpec, ExtReal, GridPotential, GridSpec, LogConcaveFunction};
