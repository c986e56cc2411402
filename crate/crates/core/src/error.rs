use thiserror::Error;

/// Errors raised by the model, coordinate transforms and integrators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// The admissible `p_u` interval for the given Casimirs and `p_v` is empty.
    #[error("inadmissible parameters: admissible p_u interval [{lo}, {hi}] is empty")]
    InadmissibleParams { lo: f64, hi: f64 },

    /// A parameter failed a basic range check (negative Casimir, non-finite value).
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParam { name: &'static str, reason: String },

    /// A square-root radicand of the reduced Hamiltonian is negative beyond tolerance.
    #[error("p_u = {p_u} lies outside the admissible interval [{lo}, {hi}]")]
    Domain { p_u: f64, lo: f64, hi: f64 },

    /// The state sits on the boundary where the cylindrical chart is singular.
    #[error("state on the admissible boundary (p_u = {p_u}); gradient undefined")]
    Boundary { p_u: f64 },

    /// A vector has (numerically) zero transverse component, so its longitude is undefined.
    #[error("singular configuration: transverse norm of {which} is {norm:e}")]
    SingularConfiguration { which: &'static str, norm: f64 },

    /// Vector and table dimensions disagree.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// Implicit step did not converge.
    #[error("implicit step failed to converge at t = {t} after {iterations} iterations")]
    StepFailure { t: f64, iterations: usize },

    /// Adaptive step size fell below the floor.
    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },

    /// Lifting needs the cyclic angle `v`, which the state does not carry.
    #[error("reduced state carries no cyclic angle v; cannot lift")]
    MissingCyclicAngle,

    #[error("invalid integrator spec: {0}")]
    InvalidSpec(String),
}

pub type Result<T> = std::result::Result<T, Error>;
