//! Verifier and simulator toolkit for device-independent self-testing.
//!
//! The crate is organised around one question: given a bipartite quantum
//! realization (a state plus local measurements), how close is it — after a
//! local isometry — to a target entangled state?  The modules build up the
//! machinery to answer it:
//!
//! * [`qalg`] — dense complex state vectors, observables, projector families,
//!   Schmidt decompositions and seeded random inflation helpers.
//! * [`ncpoly`] — polynomials in the free *-algebra generated by two
//!   dichotomic observables per party, with canonical word rewriting.
//! * [`bell`] — the tilted correlation functional `α·A0 + A0(B0+B1) +
//!   A1(B0−B1)`, its quantum and classical bounds, ideal realizations,
//!   sum-of-squares certificates and a see-saw optimizer.
//! * [`extraction`] — the swap isometry that pulls the target two-qubit state
//!   out of any realization close to the quantum bound, together with the
//!   analytic robustness chain.
//! * [`highdim`] — the even-dimension correlation-table construction that
//!   self-tests the d-dimensional maximally entangled state, with its
//!   block-flip operators and the qudit swap circuit.

pub mod bell;
pub mod error;
pub mod extraction;
pub mod highdim;
pub mod ncpoly;
pub mod qalg;
pub mod tol;

pub use error::{Error, Result};

/// Complex scalar used across the crate.
pub type C64 = num_complex::Complex<f64>;
/// Dense complex matrix.
pub type CMatrix = nalgebra::DMatrix<C64>;
/// Dense complex column vector.
pub type CVector = nalgebra::DVector<C64>;
