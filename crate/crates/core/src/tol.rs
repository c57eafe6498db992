//! Numerical tolerances used throughout the crate.
//!
//! Structural checks (operator identities, dichotomy, projector algebra) are
//! held to a tighter tolerance than state-vector comparisons, which accumulate
//! error through isometry circuits.  Coefficient pruning sits near the noise
//! floor of f64 arithmetic so that canonical polynomial forms stay sparse.

/// Operator-level identities: Hermiticity residuals are compared against this.
pub const HERMITIAN: f64 = 1e-12;

/// Structural identities on operators and probabilities (dichotomy, projector
/// algebra, block norms, flip-operator relations).
pub const STRUCTURAL: f64 = 1e-10;

/// State-vector equality after isometries and decompositions.
pub const VECTOR_EQ: f64 = 1e-8;

/// Polynomial coefficients below this magnitude are dropped.
pub const COEFF_PRUNE: f64 = 1e-14;

/// Eigenvalues of this magnitude or less count as zero in matrix sign
/// functions and are mapped to +1.
pub const SIGN_ZERO: f64 = 1e-12;

/// Smallest admissible sin μ / cos μ in the observable regularization.
pub const MU_CUTOFF: f64 = 1e-6;

/// Smallest admissible sine of a block angle in the qudit construction.
pub const ANGLE_CUTOFF: f64 = 1e-6;
