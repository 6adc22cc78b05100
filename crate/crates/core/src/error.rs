use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, Error)]
pub enum CoreError {
    /// A constructor argument violates a documented invariant.
    #[error("invalid {field}: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    /// Adaptive quadrature exhausted its subdivision budget before reaching
    /// the requested tolerance. Carries the error estimate it did achieve.
    #[error("quadrature did not converge: achieved error {achieved:.3e} after {subdivisions} subdivisions")]
    NonConvergentQuadrature { achieved: f64, subdivisions: usize },

    /// An assembled covariance matrix failed the symplectic physicality gate.
    /// This signals an internal inconsistency, not a user error: every
    /// parameter set the API accepts is physical by construction.
    #[error("unphysical covariance matrix: min symplectic eigenvalue {nu_min} < 1/2")]
    UnphysicalState { nu_min: f64 },

    /// A dense linear-algebra routine failed (non-convergent eigen-solve,
    /// factorization of a non-positive-definite matrix, inconsistent
    /// discriminant).
    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    /// An argument fell outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    DomainError(String),
}
