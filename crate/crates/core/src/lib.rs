//! Reduction of a two-sublattice antiferromagnet to a one-degree-of-freedom
//! canonical system, with integrators, an oracle on the full system, and
//! phase-portrait construction.
//!
//! The pipeline: Lie–Poisson brackets on `(m, l)` ([`algebra`]), the model
//! Hamiltonian in all charts ([`model`]), coordinate changes down to the
//! canonical pair `(u, p_u)` and back ([`transforms`]), time integration
//! ([`dynamics`]), and fixed points, level sets and separatrices
//! ([`portrait`]).

pub mod algebra;
pub mod dynamics;
pub mod error;
pub mod model;
pub mod portrait;
pub mod transforms;

pub use error::{Error, Result};
pub use model::{Coefficients, MLState, ModelParams, ReducedState, Vec3};
