//! Geometric log-concave functions `f = e^{-φ}` and their convex potentials.

pub mod closed_form;
pub mod extreal;
pub mod grid;
pub mod lcf;

pub use closed_form::{Canonical, ClosedFormKind, ClosedFormSpec};
pub use extreal::ExtReal;
pub use grid::{inf_convolution, GridFile, GridPotential, GridSpec};
pub use lcf::{Backing, LogConcaveFunction};
