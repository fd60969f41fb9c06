//! Continuous Galerkin finite elements for ideal magnetohydrodynamics with a
//! monolithic parabolic regularization, entropy-viscosity shock capturing and
//! projection divergence cleaning.

pub mod cli;
pub mod diagnostics;
pub mod divclean;
pub mod error;
pub mod fespace;
pub mod fluxes;
pub mod problems;
pub mod solver;
pub mod thermo;
pub mod timeint;
pub mod viscosity;

pub use error::{MhdError, Result};
