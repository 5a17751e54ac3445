//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Dimension mismatch between matrix operands.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// An argument left the domain of the requested function
    /// (Gamma pole, non-positive-stable Beta argument, u <= 0, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Matrices that must commute do not.
    #[error("commutation failure: relative defect {defect:.3e} exceeds {tol:.3e}")]
    Commutation { defect: f64, tol: f64 },

    /// Eigenvector basis too ill-conditioned for functional calculus.
    #[error("ill-conditioned eigenvector basis: cond {cond:.3e} exceeds {max:.3e}")]
    IllConditioned { cond: f64, max: f64 },

    /// Eigensolver or other numerical routine failed to converge.
    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    /// Non-terminating hypergeometric series outside its disc of convergence.
    #[error("divergent series: {0}")]
    Divergence(String),

    /// A parameter set violates one of its spectral conditions.
    /// `condition` names the violated constraint.
    #[error("spectral condition violated: {condition}")]
    SpectralCondition { condition: String },
}

pub type Result<T> = std::result::Result<T, Error>;
