//! Polynomials in two dichotomic observables per party.
//!
//! Words live in the free *-algebra generated by `A0, A1, B0, B1` modulo
//! `X² = I` for each generator and commutation between the parties (and only
//! between the parties).  A canonical word is an alternating string of Alice
//! letters followed by an alternating string of Bob letters; polynomials are
//! sparse real-coefficient maps over canonical words.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::bell::Realization;
use crate::error::{Error, Result};
use crate::qalg::{dichotomy_residual, kron};
use crate::{tol, C64, CMatrix};

/// The four generators of the algebra.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Generator {
    A0,
    A1,
    B0,
    B1,
}

impl Generator {
    fn party_index(self) -> (bool, u8) {
        match self {
            Generator::A0 => (true, 0),
            Generator::A1 => (true, 1),
            Generator::B0 => (false, 0),
            Generator::B1 => (false, 1),
        }
    }
}

/// Reduces one party's letter string: adjacent equal letters cancel (X² = I),
/// repeatedly, leaving an alternating string.
fn reduce_part(letters: impl IntoIterator<Item = u8>) -> Vec<u8> {
    let mut stack: Vec<u8> = Vec::new();
    for l in letters {
        if stack.last() == Some(&l) {
            stack.pop();
        } else {
            stack.push(l);
        }
    }
    stack
}

/// A reduced word: alternating Alice letters, then alternating Bob letters.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct CanonicalWord {
    a_part: Vec<u8>,
    b_part: Vec<u8>,
}

impl CanonicalWord {
    /// The empty word (the algebra identity).
    pub fn identity() -> Self {
        CanonicalWord::default()
    }

    /// Canonicalizes an arbitrary generator string.
    pub fn from_letters(letters: &[Generator]) -> Self {
        let mut a = Vec::new();
        let mut b = Vec::new();
        for &g in letters {
            let (is_a, idx) = g.party_index();
            if is_a {
                a.push(idx);
            } else {
                b.push(idx);
            }
        }
        CanonicalWord {
            a_part: reduce_part(a),
            b_part: reduce_part(b),
        }
    }

    /// Builds a word from per-party strings, reducing both.
    pub fn from_parts(a: &[u8], b: &[u8]) -> Self {
        CanonicalWord {
            a_part: reduce_part(a.iter().copied()),
            b_part: reduce_part(b.iter().copied()),
        }
    }

    /// Alice's alternating letter string (values 0 = A0, 1 = A1).
    pub fn a_part(&self) -> &[u8] {
        &self.a_part
    }

    /// Bob's alternating letter string (values 0 = B0, 1 = B1).
    pub fn b_part(&self) -> &[u8] {
        &self.b_part
    }

    /// Number of letters over both parties.
    pub fn len(&self) -> usize {
        self.a_part.len() + self.b_part.len()
    }

    /// True for the identity word.
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Word product: concatenate per-party strings, then reduce.
    pub fn concat(&self, other: &CanonicalWord) -> CanonicalWord {
        CanonicalWord {
            a_part: reduce_part(self.a_part.iter().chain(&other.a_part).copied()),
            b_part: reduce_part(self.b_part.iter().chain(&other.b_part).copied()),
        }
    }

    /// Adjoint: each party's string reversed (generators are self-adjoint).
    pub fn adjoint(&self) -> CanonicalWord {
        CanonicalWord {
            a_part: self.a_part.iter().rev().copied().collect(),
            b_part: self.b_part.iter().rev().copied().collect(),
        }
    }
}

impl fmt::Display for CanonicalWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "I");
        }
        for &l in &self.a_part {
            write!(f, "A{l}")?;
        }
        for &l in &self.b_part {
            write!(f, "B{l}")?;
        }
        Ok(())
    }
}

/// Sparse real-coefficient polynomial over canonical words.
///
/// Coefficients with magnitude below [`tol::COEFF_PRUNE`] are dropped by every
/// operation, so the zero polynomial has an empty term map.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct NcPolynomial {
    terms: BTreeMap<CanonicalWord, f64>,
}

impl NcPolynomial {
    /// The zero polynomial.
    pub fn zero() -> Self {
        NcPolynomial::default()
    }

    /// The constant 1 (identity word).
    pub fn one() -> Self {
        NcPolynomial::from_word(CanonicalWord::identity(), 1.0)
    }

    /// A single generator as a polynomial.
    pub fn generator(g: Generator) -> Self {
        NcPolynomial::from_word(CanonicalWord::from_letters(&[g]), 1.0)
    }

    /// A single term.
    pub fn from_word(word: CanonicalWord, coeff: f64) -> Self {
        let mut p = NcPolynomial::zero();
        p.add_term(word, coeff);
        p
    }

    /// Adds `coeff` onto `word`, pruning if the result is negligible.
    pub fn add_term(&mut self, word: CanonicalWord, coeff: f64) {
        let entry = self.terms.entry(word.clone()).or_insert(0.0);
        *entry += coeff;
        if entry.abs() < tol::COEFF_PRUNE {
            self.terms.remove(&word);
        }
    }

    /// Term map in canonical (BTreeMap) order.
    pub fn terms(&self) -> &BTreeMap<CanonicalWord, f64> {
        &self.terms
    }

    /// Coefficient of a word (0 when absent).
    pub fn coeff(&self, word: &CanonicalWord) -> f64 {
        self.terms.get(word).copied().unwrap_or(0.0)
    }

    /// Number of stored terms.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    /// True for the zero polynomial.
    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Scalar multiple.
    pub fn scale(&self, s: f64) -> NcPolynomial {
        let mut out = NcPolynomial::zero();
        for (w, &cf) in &self.terms {
            out.add_term(w.clone(), cf * s);
        }
        out
    }

    /// Adjoint: reverses every word; real coefficients are unchanged.
    pub fn adjoint(&self) -> NcPolynomial {
        let mut out = NcPolynomial::zero();
        for (w, &cf) in &self.terms {
            out.add_term(w.adjoint(), cf);
        }
        out
    }

    /// Largest coefficient magnitude.
    pub fn max_coeff(&self) -> f64 {
        self.terms.values().map(|c| c.abs()).fold(0.0, f64::max)
    }
}

impl Add for &NcPolynomial {
    type Output = NcPolynomial;
    fn add(self, rhs: &NcPolynomial) -> NcPolynomial {
        let mut out = self.clone();
        for (w, &cf) in &rhs.terms {
            out.add_term(w.clone(), cf);
        }
        out
    }
}

impl Sub for &NcPolynomial {
    type Output = NcPolynomial;
    fn sub(self, rhs: &NcPolynomial) -> NcPolynomial {
        let mut out = self.clone();
        for (w, &cf) in &rhs.terms {
            out.add_term(w.clone(), -cf);
        }
        out
    }
}

impl Neg for &NcPolynomial {
    type Output = NcPolynomial;
    fn neg(self) -> NcPolynomial {
        self.scale(-1.0)
    }
}

impl Mul for &NcPolynomial {
    type Output = NcPolynomial;
    fn mul(self, rhs: &NcPolynomial) -> NcPolynomial {
        let mut out = NcPolynomial::zero();
        for (w1, &c1) in &self.terms {
            for (w2, &c2) in &rhs.terms {
                out.add_term(w1.concat(w2), c1 * c2);
            }
        }
        out
    }
}

/// The nine-element operator basis `V` used by the certificates, in the fixed
/// order `I, A0, A1, B0, B1, A0B0, A0B1, A1B0, A1B1`.
pub fn basis_word(index: usize) -> CanonicalWord {
    use Generator::*;
    let letters: &[Generator] = match index {
        0 => &[],
        1 => &[A0],
        2 => &[A1],
        3 => &[B0],
        4 => &[B1],
        5 => &[A0, B0],
        6 => &[A0, B1],
        7 => &[A1, B0],
        8 => &[A1, B1],
        _ => panic!("basis index {index} out of range"),
    };
    CanonicalWord::from_letters(letters)
}

/// Linear combination over the nine-element basis.
pub fn poly_from_vector(q: &[f64; 9]) -> NcPolynomial {
    let mut p = NcPolynomial::zero();
    for (i, &cf) in q.iter().enumerate() {
        if cf != 0.0 {
            p.add_term(basis_word(i), cf);
        }
    }
    p
}

/// The shifted functional `√(8+2α²)·I − α·A0 − A0B0 − A0B1 − A1B0 + A1B1`,
/// i.e. the quantum bound minus the tilted Bell expression.
pub fn gap_poly(alpha: f64) -> Result<NcPolynomial> {
    if !(0.0..=2.0).contains(&alpha) || !alpha.is_finite() {
        return Err(Error::InvalidAlpha { alpha });
    }
    let bound = (8.0 + 2.0 * alpha * alpha).sqrt();
    let mut q = [0.0; 9];
    q[0] = bound;
    q[1] = -alpha;
    q[5] = -1.0;
    q[6] = -1.0;
    q[7] = -1.0;
    q[8] = 1.0;
    Ok(poly_from_vector(&q))
}

/// A sum-of-squares certificate: each row is one `P_λ = q_λ · V`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SosCertificate {
    /// Tilt parameter the certificate targets.
    pub alpha: f64,
    /// Coefficient vectors over the nine-element basis.
    pub q_vectors: Vec<[f64; 9]>,
}

/// Expands a certificate into Σ_λ P_λ† P_λ.
pub fn sos_expand(cert: &SosCertificate) -> NcPolynomial {
    let mut out = NcPolynomial::zero();
    for q in &cert.q_vectors {
        let p = poly_from_vector(q);
        out = &out + &(&p.adjoint() * &p);
    }
    out
}

/// Largest coefficient difference between two polynomials (over the union of
/// their words).
pub fn poly_residual(p: &NcPolynomial, q: &NcPolynomial) -> f64 {
    let diff = p - q;
    diff.max_coeff()
}

/// Substitutes a realization's observables into a polynomial, returning the
/// operator on the joint space.  General words evaluate to non-Hermitian
/// matrices, so the raw matrix is returned.
pub fn poly_evaluate(p: &NcPolynomial, r: &Realization) -> Result<CMatrix> {
    for o in r.alice.iter().chain(r.bob.iter()) {
        let residual = dichotomy_residual(&o.matrix);
        if residual > tol::STRUCTURAL {
            return Err(Error::NotDichotomic { residual });
        }
    }
    let da = r.alice[0].dim();
    let db = r.bob[0].dim();
    let n = da * db;
    let mut out = CMatrix::zeros(n, n);
    for (w, &cf) in p.terms() {
        let mut am = CMatrix::identity(da, da);
        for &l in w.a_part() {
            am *= &r.alice[l as usize].matrix;
        }
        let mut bm = CMatrix::identity(db, db);
        for &l in w.b_part() {
            bm *= &r.bob[l as usize].matrix;
        }
        out += kron(&am, &bm) * C64::new(cf, 0.0);
    }
    Ok(out)
}
