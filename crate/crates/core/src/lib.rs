//! Finite biorthogonal M matrix polynomials.
//!
//! Constructs the pair of polynomial families that are biorthogonal with
//! respect to the matrix weight u^C (1+u)^{-(H+C)} on (0, infinity) for a
//! commuting pair of complex parameter matrices (H, C) and an integer
//! order upsilon, evaluates them, and verifies the identities the families
//! satisfy (biorthogonality, differential equation, recurrences, generating
//! functions, moment orthogonality, Jacobi correspondence) both numerically
//! and in coefficient space.

pub mod error;
pub mod matrix;
pub mod poly;
pub mod quad;
pub mod special;
pub mod verify;

pub use error::{Error, Result};
