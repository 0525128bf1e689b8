use thiserror::Error;

/// Failures raised by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The Al-Salam–Carlitz parameters are valid but the operation is not
    /// defined (or not implemented) in their regime.
    #[error("regime error: {0}")]
    Regime(String),

    /// The requested tolerance cannot be met at the working precision.
    #[error("no convergence: {0}")]
    NonConvergence(String),

    /// A truncated series or sum could not certify the requested accuracy.
    #[error("accuracy error: {0}")]
    Accuracy(String),

    /// The Hankel factorization met a non-positive pivot.
    #[error("ill-conditioned moment matrix: {0}")]
    IllConditioned(String),

    /// The Nevanlinna series terms fail to decay.
    #[error("divergence suspected: {0}")]
    DivergenceSuspected(String),

    /// The entropy window reached its maximum before the tail was controlled.
    #[error("integration window exhausted: {0}")]
    WindowExhausted(String),

    /// Adaptive quadrature hit its refinement limit.
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("invalid input: {0}")]
    Input(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
