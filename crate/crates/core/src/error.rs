//! Crate-wide error type.

use thiserror::Error;

/// Result alias for crate operations.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong while building or verifying a realization.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Operand shapes are incompatible (dimension mismatch, bad split, …).
    #[error("shape error: {0}")]
    Shape(String),

    /// A tilt parameter outside the admissible range [0, 2].
    #[error("tilt parameter alpha = {alpha} outside [0, 2]")]
    InvalidAlpha { alpha: f64 },

    /// A construction that needs a nondegenerate angle received a degenerate
    /// one (θ = 0, sin μ below cutoff, vanishing block-angle sine, …).
    #[error("degenerate parameter: {0}")]
    Degenerate(String),

    /// An observable that must be Hermitian is not (within tolerance).
    #[error("matrix is not Hermitian: residual {residual:.3e}")]
    NotHermitian { residual: f64 },

    /// An observable that must square to the identity does not.
    #[error("observable is not dichotomic: |O^2 - I| = {residual:.3e}")]
    NotDichotomic { residual: f64 },

    /// A projector family violating idempotence, orthogonality or
    /// completeness.
    #[error("invalid projector family: {0}")]
    InvalidProjectors(String),

    /// A matrix that must be unitary is not (within tolerance).
    #[error("matrix is not unitary: residual {residual:.3e}")]
    NotUnitary { residual: f64 },

    /// The printed closed-form certificate cannot be evaluated at this point
    /// (negative radicand or division by a vanishing cosine).
    #[error("printed certificate invalid at this angle: {0}")]
    InvalidCertificate(String),

    /// The Gram-matrix solver did not reach the required residual.
    #[error("certificate search did not converge: residual {residual:.3e} after {iterations} iterations")]
    NonConvergence { residual: f64, iterations: usize },

    /// A named operator identity failed during a pipeline construction.
    #[error("identity {equation} violated: residual {residual:.3e}")]
    IdentityViolated { equation: String, residual: f64 },

    /// Qudit constructions require even dimension ≥ 2.
    #[error("dimension {d} is not an even integer >= 2")]
    OddDimension { d: usize },

    /// Configuration or input-data validation failure.
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// Convenience constructor for a failed named identity.
    pub fn identity(equation: &str, residual: f64) -> Self {
        Error::IdentityViolated {
            equation: equation.to_string(),
            residual,
        }
    }
}
