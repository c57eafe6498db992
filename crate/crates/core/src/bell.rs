//! The tilted Bell functional, its bounds, and sum-of-squares certificates.
//!
//! The functional is `B(α) = α·A0 + A0(B0+B1) + A1(B0−B1)` with `0 ≤ α ≤ 2`.
//! Its quantum bound is `√(8+2α²)`, reached (uniquely, up to local isometry)
//! by the partially entangled state `cos θ|00⟩ + sin θ|11⟩` where the tilt and
//! the Schmidt angle are linked by `tan 2θ = √((4−α²)/(2α²))`.  The classical
//! bound is `2 + α`.
//!
//! Certificates for the gap `√(8+2α²)·I − B(α)` come in two flavours: the
//! printed closed-form vectors reproduced verbatim in
//! [`paper_sos_certificate`] (whose constants this crate validates rather
//! than trusts — see the errata ledger), and a numerically solved Gram-matrix
//! certificate from [`gram_sos_solve`].

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{Error, Result};
use crate::ncpoly::{self, basis_word, gap_poly, poly_evaluate, sos_expand, SosCertificate};
use crate::qalg::{
    dichotomy_residual, hermitian_eigen, kron, matrix_sign, max_abs, random_unitary, seeded_rng,
    Observable, StateVector,
};
use crate::{tol, C64, CMatrix, CVector};

/// A state together with two dichotomic observables per party.
#[derive(Debug, Clone)]
pub struct Realization {
    /// Bipartite state, dims `[dA, dB]`.
    pub state: StateVector,
    /// Alice's observables `[A0, A1]`.
    pub alice: Vec<Observable>,
    /// Bob's observables `[B0, B1]`.
    pub bob: Vec<Observable>,
}

impl Realization {
    /// Validates shapes and dichotomy (within [`tol::STRUCTURAL`]).
    pub fn new(state: StateVector, alice: Vec<Observable>, bob: Vec<Observable>) -> Result<Self> {
        if state.dims.len() != 2 {
            return Err(Error::Shape(format!(
                "realization state must be bipartite, got dims {:?}",
                state.dims
            )));
        }
        if alice.len() != 2 || bob.len() != 2 {
            return Err(Error::Shape(
                "realization needs exactly two observables per party".into(),
            ));
        }
        for (obs, dim) in alice.iter().map(|o| (o, state.dims[0])).chain(bob.iter().map(|o| (o, state.dims[1]))) {
            if obs.dim() != dim {
                return Err(Error::Shape(format!(
                    "observable dimension {} does not match party dimension {dim}",
                    obs.dim()
                )));
            }
            let residual = dichotomy_residual(&obs.matrix);
            if residual > tol::STRUCTURAL {
                return Err(Error::NotDichotomic { residual });
            }
        }
        Ok(Realization { state, alice, bob })
    }

    /// Party dimensions `(dA, dB)`.
    pub fn dims(&self) -> (usize, usize) {
        (self.state.dims[0], self.state.dims[1])
    }
}

/// The tilted Bell functional, parametrized by `alpha ∈ [0, 2]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BellFunctional {
    /// Tilt parameter.
    pub alpha: f64,
}

impl BellFunctional {
    /// Validates the tilt range.
    pub fn new(alpha: f64) -> Result<Self> {
        if !(0.0..=2.0).contains(&alpha) || !alpha.is_finite() {
            return Err(Error::InvalidAlpha { alpha });
        }
        Ok(BellFunctional { alpha })
    }

    /// The Bell operator `α·A0⊗I + A0⊗(B0+B1) + A1⊗(B0−B1)`.
    pub fn operator(&self, r: &Realization) -> CMatrix {
        let (_, db) = r.dims();
        let ib = CMatrix::identity(db, db);
        let a0 = &r.alice[0].matrix;
        let a1 = &r.alice[1].matrix;
        let b0 = &r.bob[0].matrix;
        let b1 = &r.bob[1].matrix;
        kron(a0, &(ib * C64::new(self.alpha, 0.0) + b0 + b1)) + kron(a1, &(b0 - b1))
    }
}

/// Quantum bound `√(8 + 2α²)`.
pub fn quantum_bound(alpha: f64) -> Result<f64> {
    BellFunctional::new(alpha)?;
    Ok((8.0 + 2.0 * alpha * alpha).sqrt())
}

/// Classical bound by brute force over the 16 deterministic ±1 strategies.
/// Equals `2 + α` throughout the family.
pub fn classical_bound(alpha: f64) -> Result<f64> {
    BellFunctional::new(alpha)?;
    let mut best = f64::NEG_INFINITY;
    for a0 in [-1.0f64, 1.0] {
        for a1 in [-1.0f64, 1.0] {
            for b0 in [-1.0f64, 1.0] {
                for b1 in [-1.0f64, 1.0] {
                    let v = alpha * a0 + a0 * (b0 + b1) + a1 * (b0 - b1);
                    best = best.max(v);
                }
            }
        }
    }
    Ok(best)
}

/// Schmidt angle θ and measurement angle μ of the maximizing realization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleSet {
    /// Schmidt angle of the target state `cos θ|00⟩ + sin θ|11⟩`.
    pub theta: f64,
    /// Bob's measurement angle, `tan μ = sin 2θ`.
    pub mu: f64,
}

impl AngleSet {
    /// Derives μ from θ.
    pub fn from_theta(theta: f64) -> Self {
        AngleSet {
            theta,
            mu: (2.0 * theta).sin().atan(),
        }
    }
}

/// θ without the degeneracy guard; `tan 2θ = √(4−α²) / (√2·α)`.
fn theta_unchecked(alpha: f64) -> f64 {
    0.5 * f64::atan2((4.0 - alpha * alpha).max(0.0).sqrt(), 2.0f64.sqrt() * alpha)
}

/// Schmidt/measurement angles of the maximizer for `alpha ∈ [0, 2)`.
///
/// `alpha = 2` is rejected: there θ = 0 and every construction downstream of
/// the angles (regularization, extraction) degenerates.
pub fn schmidt_angle_for_alpha(alpha: f64) -> Result<AngleSet> {
    if !(0.0..=2.0).contains(&alpha) || !alpha.is_finite() {
        return Err(Error::InvalidAlpha { alpha });
    }
    if alpha >= 2.0 {
        return Err(Error::Degenerate(
            "alpha = 2 gives theta = 0; no extraction target".into(),
        ));
    }
    Ok(AngleSet::from_theta(theta_unchecked(alpha)))
}

/// Inverse of [`schmidt_angle_for_alpha`]: `α = 2·cos 2θ / √(1 + sin² 2θ)`.
pub fn alpha_for_angle(theta: f64) -> Result<f64> {
    if !(0.0..=std::f64::consts::FRAC_PI_4).contains(&theta) || !theta.is_finite() {
        return Err(Error::Degenerate(format!(
            "theta = {theta} outside [0, π/4]"
        )));
    }
    let c = (2.0 * theta).cos();
    let s = (2.0 * theta).sin();
    Ok(2.0 * c / (1.0 + s * s).sqrt())
}

fn pauli_z() -> CMatrix {
    CMatrix::from_row_slice(
        2,
        2,
        &[
            C64::new(1.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(-1.0, 0.0),
        ],
    )
}

fn pauli_x() -> CMatrix {
    CMatrix::from_row_slice(
        2,
        2,
        &[
            C64::new(0.0, 0.0),
            C64::new(1.0, 0.0),
            C64::new(1.0, 0.0),
            C64::new(0.0, 0.0),
        ],
    )
}

/// The two-qubit realization that reaches the quantum bound:
/// state `cos θ|00⟩ + sin θ|11⟩`, `A0 = Z`, `A1 = X`,
/// `B0/B1 = cos μ·Z ± sin μ·X`.
pub fn ideal_realization(alpha: f64) -> Result<Realization> {
    BellFunctional::new(alpha)?;
    let theta = theta_unchecked(alpha);
    let mu = (2.0 * theta).sin().atan();
    let state = StateVector::new(
        CVector::from_vec(vec![
            C64::new(theta.cos(), 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(theta.sin(), 0.0),
        ]),
        vec![2, 2],
    )?;
    let z = pauli_z();
    let x = pauli_x();
    let b0 = &z * C64::new(mu.cos(), 0.0) + &x * C64::new(mu.sin(), 0.0);
    let b1 = &z * C64::new(mu.cos(), 0.0) - &x * C64::new(mu.sin(), 0.0);
    Realization::new(
        state,
        vec![Observable::dichotomic(z)?, Observable::dichotomic(x)?],
        vec![Observable::dichotomic(b0)?, Observable::dichotomic(b1)?],
    )
}

/// ⟨ψ| B(α) |ψ⟩ for a realization.
pub fn bell_value(f: &BellFunctional, r: &Realization) -> f64 {
    let op = f.operator(r);
    let v = r.state.expectation(&op).expect("operator matches state");
    debug_assert!(v.im.abs() < 1e-9, "Bell value has imaginary part {}", v.im);
    v.re
}

// --- printed closed-form certificate -------------------------------------

/// One of the five printed `r_λ` vectors over the nine-element basis,
/// evaluated at Schmidt angle θ (`s = sin 2θ`, `c = cos 2θ`).
///
/// `lambda` is zero-based.  Vectors 1–4 divide by `c` and are rejected when
/// `|cos 2θ|` is negligible; vector 0 is angle-safe except through `s`.
pub fn paper_r_vector(lambda: usize, theta: f64) -> Result<[f64; 9]> {
    if lambda >= 5 {
        return Err(Error::InvalidInput(format!("r-vector index {lambda} out of range")));
    }
    let s = (2.0 * theta).sin();
    let c = (2.0 * theta).cos();
    let n = (1.0 + s * s).sqrt();
    if lambda > 0 && c.abs() < tol::ANGLE_CUTOFF {
        return Err(Error::InvalidCertificate(format!(
            "r{} divides by cos 2θ = {c:.3e}",
            lambda + 1
        )));
    }
    let mut r = [0.0; 9];
    match lambda {
        0 => {
            r[1] = -2.0 / n;
            r[3] = 1.0;
            r[4] = 1.0;
        }
        1 => {
            r[0] = -1.0 / n;
            r[1] = 1.0 / (c * n);
            r[2] = s * s / (c * n);
            r[3] = -1.0 / c;
            r[5] = 1.0;
        }
        2 => {
            r[0] = -1.0 / n;
            r[1] = -1.0 / (c * n);
            r[2] = -s * s / (c * n);
            r[3] = 1.0 / c;
            r[6] = 1.0;
        }
        3 => {
            r[0] = -1.0 / n;
            r[1] = -s * s / (c * n);
            r[2] = -1.0 / (c * n);
            r[3] = 1.0 / c;
            r[7] = 1.0;
        }
        4 => {
            r[0] = 1.0 / n;
            r[1] = -(c + 1.0 / c) / n;
            r[2] = -1.0 / (c * n);
            r[3] = 1.0 / c;
            r[8] = 1.0;
        }
        _ => unreachable!(),
    }
    Ok(r)
}

fn axpy(dst: &mut [f64; 9], a: f64, x: &[f64; 9]) {
    for (d, &v) in dst.iter_mut().zip(x.iter()) {
        *d += a * v;
    }
}

/// The printed closed-form `q_λ` vectors at Schmidt angle θ, transcribed
/// verbatim.  Any negative radicand or vanishing `cos 2θ` flags the
/// certificate invalid (the caller routes that to the errata ledger).
pub fn paper_certificate_at_theta(theta: f64) -> Result<SosCertificate> {
    let r: Vec<[f64; 9]> = (0..5).map(|l| paper_r_vector(l, theta)).collect::<Result<_>>()?;
    let c = (2.0 * theta).cos();
    let cbar = (4.0 * theta).cos();
    let gamma_sq = (75.0 + 25.0 * cbar) * (6.0 - 2.0 * cbar).sqrt() - 72.0;
    if gamma_sq < 0.0 {
        return Err(Error::InvalidCertificate(format!(
            "γ² = {gamma_sq:.6} < 0 at θ = {theta}"
        )));
    }
    let gamma = gamma_sq.sqrt();
    let omega = 18125.0 * (8.0 * theta).cos() - 72500.0 * (4.0 * theta).cos() - 108706.0;
    let root3 = (3.0 - cbar).sqrt();
    let sqrt2 = 2.0f64.sqrt();

    let mut q1 = [0.0; 9];
    axpy(&mut q1, gamma / (20.0 * sqrt2), &r[4]);
    axpy(&mut q1, -gamma / (20.0 * sqrt2), &r[3]);
    axpy(&mut q1, -2.0 / 5.0, &r[0]);

    let mut q2 = [0.0; 9];
    let f2 = ((3.0 - cbar) / 16.0).powf(0.25);
    axpy(&mut q2, f2, &r[0]);
    axpy(&mut q2, f2 * c, &r[1]);
    axpy(&mut q2, -f2 * c, &r[2]);

    let mut q3 = [0.0; 9];
    axpy(&mut q3, (2.0 * gamma - 25.0 * c * root3) / (30.0 * sqrt2), &r[0]);
    axpy(&mut q3, 3.0 / 10.0, &r[4]);
    axpy(&mut q3, -3.0 / 10.0, &r[3]);

    let mut q4 = [0.0; 9];
    axpy(&mut q4, 35.0 / 100.0, &r[2]);
    axpy(&mut q4, 35.0 / 100.0, &r[1]);
    axpy(&mut q4, -5.0 * c * root3 / (14.0 * sqrt2), &r[0]);

    let q5_rad = 49.0 * gamma_sq + 9800.0 * c * gamma * root3 + omega;
    if q5_rad < 0.0 {
        return Err(Error::InvalidCertificate(format!(
            "q5 radicand = {q5_rad:.6} < 0 at θ = {theta}"
        )));
    }
    let mut q5 = [0.0; 9];
    axpy(&mut q5, q5_rad.sqrt() / 420.0, &r[0]);

    Ok(SosCertificate {
        alpha: alpha_for_angle(theta)?,
        q_vectors: vec![q1, q2, q3, q4, q5],
    })
}

/// Printed certificate at the Schmidt angle belonging to `alpha ∈ (0, 2)`.
pub fn paper_sos_certificate(alpha: f64) -> Result<SosCertificate> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(Error::InvalidAlpha { alpha });
    }
    paper_certificate_at_theta(theta_unchecked(alpha))
}

/// Coefficient residual of the printed certificate's expansion against the
/// gap polynomial at the α matching θ.
pub fn printed_certificate_residual(theta: f64) -> Result<f64> {
    let cert = paper_certificate_at_theta(theta)?;
    let gap = gap_poly(cert.alpha)?;
    Ok(ncpoly::poly_residual(&sos_expand(&cert), &gap))
}

// --- Gram-matrix certificate solver ---------------------------------------

type RMatrix = DMatrix<f64>;
type RVector = DVector<f64>;

/// Eigendecomposition of a real symmetric matrix, values ascending.
fn sym_eigen(m: &RMatrix) -> (Vec<f64>, RMatrix) {
    let sym = (m + m.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    let values: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = RMatrix::zeros(n, n);
    for (new, &old) in order.iter().enumerate() {
        vectors.set_column(new, &eig.eigenvectors.column(old));
    }
    (values, vectors)
}

/// Projects a symmetric matrix onto the PSD cone by clipping eigenvalues.
fn clip_psd(m: &RMatrix) -> (RMatrix, f64) {
    let (values, vectors) = sym_eigen(m);
    let n = m.nrows();
    let min_eig = values[0];
    let mut out = RMatrix::zeros(n, n);
    for (k, &v) in values.iter().enumerate() {
        if v > 0.0 {
            let col = vectors.column(k);
            for i in 0..n {
                for j in 0..n {
                    out[(i, j)] += v * col[i] * col[j];
                }
            }
        }
    }
    (out, min_eig)
}

/// Searches for a PSD Gram matrix `M` with `V† M V = gap_poly(alpha)` by
/// alternating projections between the PSD cone (eigenvalue clipping) and the
/// affine coefficient-matching subspace (least-squares projection), composed
/// as Douglas–Rachford reflections.
///
/// The iteration runs in the subspace every certificate must occupy: a valid
/// `M` obeys `M·G = 0` for the Gram matrix `G` of the basis applied to the
/// maximizing state, so `M` is parametrized over `ker G`.  That makes the
/// returned squares annihilate the maximizer by construction.  The reflected
/// form matters near the boundary tilt, where the PSD cone and the affine
/// subspace meet tangentially and plain projection ping-pong crawls.
pub fn gram_sos_solve(alpha: f64) -> Result<SosCertificate> {
    const MAX_ITER: usize = 50_000;
    const KERNEL_CUT: f64 = 1e-8;
    const CONVERGED: f64 = 1e-10;

    let gap = gap_poly(alpha)?;
    let ideal = ideal_realization(alpha)?;

    // Basis images V_j|ψ⟩ on the ideal maximizer and their real Gram matrix.
    let n_basis = 9usize;
    let images: Vec<CVector> = (0..n_basis)
        .map(|j| {
            let p = ncpoly::NcPolynomial::from_word(basis_word(j), 1.0);
            let op = poly_evaluate(&p, &ideal).expect("ideal realization is dichotomic");
            op * &ideal.state.amplitudes
        })
        .collect();
    let mut re_gram = RMatrix::zeros(n_basis, n_basis);
    for i in 0..n_basis {
        for j in 0..n_basis {
            re_gram[(i, j)] = images[i].dotc(&images[j]).re;
        }
    }

    let (gvals, gvecs) = sym_eigen(&re_gram);
    let kernel: Vec<usize> = (0..n_basis).filter(|&k| gvals[k] < KERNEL_CUT).collect();
    let kdim = kernel.len();
    if kdim == 0 {
        return Err(Error::NonConvergence { residual: f64::INFINITY, iterations: 0 });
    }
    let mut q_basis = RMatrix::zeros(n_basis, kdim);
    for (col, &k) in kernel.iter().enumerate() {
        q_basis.set_column(col, &gvecs.column(k));
    }

    // Word constraints: for every word w, Σ_{(i,j): V_i†V_j = w} M_ij must
    // match the gap coefficient.  In kernel coordinates each constraint is
    // ⟨sym(Qᵀ E_w Q), Y⟩.
    let mut word_slots: std::collections::BTreeMap<ncpoly::CanonicalWord, Vec<(usize, usize)>> =
        std::collections::BTreeMap::new();
    for i in 0..n_basis {
        for j in 0..n_basis {
            let w = basis_word(i).adjoint().concat(&basis_word(j));
            word_slots.entry(w).or_default().push((i, j));
        }
    }
    let n_con = word_slots.len();
    let mut a_mat = RMatrix::zeros(n_con, kdim * kdim);
    let mut b_vec = RVector::zeros(n_con);
    for (row, (word, slots)) in word_slots.iter().enumerate() {
        let mut e_w = RMatrix::zeros(n_basis, n_basis);
        for &(i, j) in slots {
            e_w[(i, j)] += 1.0;
        }
        let c_w = q_basis.transpose() * e_w * &q_basis;
        let sym = (&c_w + c_w.transpose()) * 0.5;
        for k in 0..kdim {
            for l in 0..kdim {
                a_mat[(row, k * kdim + l)] = sym[(k, l)];
            }
        }
        b_vec[row] = gap.coeff(word);
    }

    let svd = a_mat.clone().svd(true, true);
    let pinv_apply = |rhs: &RVector| -> RVector {
        svd.solve(rhs, 1e-12).expect("SVD solve")
    };

    let unvec = |v: &RVector| -> RMatrix {
        RMatrix::from_fn(kdim, kdim, |i, j| v[i * kdim + j])
    };
    let vecm = |m: &RMatrix| -> RVector {
        RVector::from_fn(kdim * kdim, |idx, _| m[(idx / kdim, idx % kdim)])
    };

    let proj_affine = |y: &RMatrix| -> RMatrix {
        let residual = &a_mat * vecm(y) - &b_vec;
        let correction = unvec(&pinv_apply(&residual));
        y - (&correction + correction.transpose()) * 0.5
    };

    // Douglas–Rachford: z ← z + P_psd(2·P_aff(z) − z) − P_aff(z); the
    // candidate certificate is the clipped affine shadow.
    let mut z = proj_affine(&RMatrix::zeros(kdim, kdim));
    let mut candidate = clip_psd(&z).0;
    let mut last_residual = f64::INFINITY;
    let mut iterations = 0;
    for iter in 0..MAX_ITER {
        iterations = iter + 1;
        let shadow = proj_affine(&z);
        let reflected = &shadow * 2.0 - &z;
        let (reflected_psd, _) = clip_psd(&reflected);
        z += &reflected_psd - &shadow;

        candidate = clip_psd(&shadow).0;
        last_residual = (&a_mat * vecm(&candidate) - &b_vec).amax();
        if last_residual <= CONVERGED {
            break;
        }
    }
    if last_residual > CONVERGED {
        return Err(Error::NonConvergence {
            residual: last_residual,
            iterations,
        });
    }

    // Final PSD factorization: q_λ = √λ · (Q y_λ), eigenvalues descending.
    let (vals, vecs) = sym_eigen(&candidate);
    let mut rows: Vec<(f64, [f64; 9])> = Vec::new();
    for k in 0..kdim {
        let lam = vals[k];
        if lam <= 1e-12 {
            continue;
        }
        let dir = &q_basis * vecs.column(k);
        let mut q = [0.0; 9];
        for i in 0..n_basis {
            q[i] = lam.sqrt() * dir[i];
        }
        rows.push((lam, q));
    }
    rows.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    let cert = SosCertificate {
        alpha,
        q_vectors: rows.into_iter().map(|(_, q)| q).collect(),
    };

    // Dual-track verification: symbolic residual and numeric evaluation.
    let expansion = sos_expand(&cert);
    let symbolic = ncpoly::poly_residual(&expansion, &gap);
    if symbolic > 1e-8 {
        return Err(Error::NonConvergence { residual: symbolic, iterations });
    }
    let mut rng = seeded_rng(0x5eed_c0de);
    for dim in [2usize, 3, 4] {
        let r = random_realization(dim, dim, &mut rng);
        let gap_op = poly_evaluate(&gap, &r)?;
        let exp_op = poly_evaluate(&expansion, &r)?;
        let diff = max_abs(&(&gap_op - &exp_op));
        if diff > 1e-8 * (1.0 + max_abs(&gap_op)) {
            return Err(Error::NonConvergence { residual: diff, iterations });
        }
        let (evals, _) = hermitian_eigen(&exp_op);
        if evals[0] < -1e-9 {
            return Err(Error::NonConvergence { residual: -evals[0], iterations });
        }
    }
    Ok(cert)
}

/// Worst `‖P_λ ψ‖` of a certificate's squares on a realization's state: a
/// maximal violator must be annihilated by every square.
pub fn certificate_annihilation(cert: &SosCertificate, r: &Realization) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for q in &cert.q_vectors {
        let p = ncpoly::poly_from_vector(q);
        let op = poly_evaluate(&p, r)?;
        worst = worst.max((op * &r.state.amplitudes).norm());
    }
    Ok(worst)
}

/// Haar-scrambled dichotomic observable with balanced signs.
pub fn random_dichotomic<R: Rng>(dim: usize, rng: &mut R) -> Observable {
    let u = random_unitary(dim, rng);
    let mut d = CMatrix::zeros(dim, dim);
    for i in 0..dim {
        d[(i, i)] = C64::new(if i % 2 == 0 { 1.0 } else { -1.0 }, 0.0);
    }
    Observable::dichotomic(&u * d * u.adjoint()).expect("conjugated involution")
}

/// Seeded random realization (Haar state, balanced random involutions).
pub fn random_realization<R: Rng>(da: usize, db: usize, rng: &mut R) -> Realization {
    let state = crate::qalg::random_state(&[da, db], rng);
    Realization {
        state,
        alice: vec![random_dichotomic(da, rng), random_dichotomic(da, rng)],
        bob: vec![random_dichotomic(db, rng), random_dichotomic(db, rng)],
    }
}

/// Alternating see-saw ascent of the Bell value.
///
/// Each restart seeds fresh random observables; then the state is set to the
/// Bell operator's top eigenvector and each observable to the matrix sign of
/// its effective coefficient operator, until the value stalls below 1e-12.
/// Returns the best value and its realization across restarts.
pub fn seesaw_max_violation(
    alpha: f64,
    dims: (usize, usize),
    restarts: usize,
    seed: u64,
) -> Result<(f64, Realization)> {
    const MAX_SWEEPS: usize = 4000;
    const STALL: f64 = 1e-12;

    let f = BellFunctional::new(alpha)?;
    let (da, db) = dims;
    if da < 2 || db < 2 {
        return Err(Error::Shape("see-saw needs local dimension >= 2".into()));
    }
    if restarts == 0 {
        return Err(Error::InvalidInput("see-saw needs at least one restart".into()));
    }

    let mut best: Option<(f64, Realization)> = None;
    for restart in 0..restarts {
        let mut rng = seeded_rng(seed);
        rng.set_stream(restart as u64 + 1);
        let mut a0 = random_dichotomic(da, &mut rng);
        let mut a1 = random_dichotomic(da, &mut rng);
        let mut b0 = random_dichotomic(db, &mut rng);
        let mut b1 = random_dichotomic(db, &mut rng);
        let mut psi = crate::qalg::random_state(&[da, db], &mut rng);
        let mut value = f64::NEG_INFINITY;

        for _ in 0..MAX_SWEEPS {
            // State step: top eigenvector of the Bell operator.
            let r = Realization {
                state: psi.clone(),
                alice: vec![a0.clone(), a1.clone()],
                bob: vec![b0.clone(), b1.clone()],
            };
            let op = f.operator(&r);
            let (_, vecs) = hermitian_eigen(&op);
            let top = vecs.column(op.nrows() - 1);
            psi = StateVector::new(CVector::from_iterator(top.len(), top.iter().cloned()), vec![da, db])
                .expect("eigenvector shape");

            // Measurement steps: optimal dichotomic observable for a linear
            // objective tr(M·G) is the matrix sign of G.
            let psi_mat = DMatrix::from_fn(da, db, |i, j| psi.amplitudes[i * db + j]);
            let eye_b = CMatrix::identity(db, db);
            let eff_a = |n: &CMatrix| -> CMatrix {
                &psi_mat * n.transpose() * psi_mat.adjoint()
            };
            a0 = Observable::dichotomic(matrix_sign(&eff_a(
                &(&eye_b * C64::new(alpha, 0.0) + &b0.matrix + &b1.matrix),
            ))?)?;
            a1 = Observable::dichotomic(matrix_sign(&eff_a(&(&b0.matrix - &b1.matrix)))?)?;
            let eff_b = |m: &CMatrix| -> CMatrix {
                psi_mat.transpose() * m.transpose() * psi_mat.conjugate()
            };
            b0 = Observable::dichotomic(matrix_sign(&eff_b(&(&a0.matrix + &a1.matrix)))?)?;
            b1 = Observable::dichotomic(matrix_sign(&eff_b(&(&a0.matrix - &a1.matrix)))?)?;

            let r = Realization {
                state: psi.clone(),
                alice: vec![a0.clone(), a1.clone()],
                bob: vec![b0.clone(), b1.clone()],
            };
            let new_value = bell_value(&f, &r);
            if new_value - value < STALL {
                break;
            }
            value = new_value;
        }

        let r = Realization {
            state: psi,
            alice: vec![a0, a1],
            bob: vec![b0, b1],
        };
        let value = bell_value(&f, &r);
        if best.as_ref().map_or(true, |(v, _)| value > *v) {
            best = Some((value, r));
        }
    }
    Ok(best.expect("at least one restart"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ncpoly::{poly_from_vector, poly_residual, CanonicalWord, Generator::*, NcPolynomial};
    use crate::qalg::inflate_with_junk;

    const GRID: [f64; 12] = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0, 1.2, 1.4, 1.6, 1.8, 1.9, 1.95];

    #[test]
    fn quantum_bound_values() {
        assert!((quantum_bound(0.0).unwrap() - 8.0f64.sqrt()).abs() < 1e-15);
        assert!((quantum_bound(1.0).unwrap() - 10.0f64.sqrt()).abs() < 1e-15);
        assert!((quantum_bound(2.0).unwrap() - 4.0).abs() < 1e-15);
        assert!(quantum_bound(-0.5).is_err());
        assert!(quantum_bound(2.2).is_err());
    }

    #[test]
    fn classical_bound_is_two_plus_alpha() {
        for alpha in GRID {
            let cb = classical_bound(alpha).unwrap();
            assert_eq!(cb, 2.0 + alpha, "brute force must be exact");
            if alpha < 2.0 {
                assert!(cb < quantum_bound(alpha).unwrap());
            }
        }
        assert_eq!(classical_bound(2.0).unwrap(), 4.0);
        assert_eq!(classical_bound(2.0).unwrap(), quantum_bound(2.0).unwrap());
    }

    #[test]
    fn schmidt_angle_limits_and_roundtrip() {
        // CHSH limit: θ → π/4.
        let near_chsh = schmidt_angle_for_alpha(1e-12).unwrap();
        assert!((near_chsh.theta - std::f64::consts::FRAC_PI_4).abs() < 1e-9);
        assert!((schmidt_angle_for_alpha(0.0).unwrap().theta - std::f64::consts::FRAC_PI_4).abs() < 1e-15);

        // tan 2θ = 1 at α = 2/√3.
        let a = 2.0 / 3.0f64.sqrt();
        let angles = schmidt_angle_for_alpha(a).unwrap();
        assert!((angles.theta - std::f64::consts::PI / 8.0).abs() < 1e-12);
        assert!((angles.mu - (2.0 * angles.theta).sin().atan()).abs() < 1e-15);

        assert!(schmidt_angle_for_alpha(2.0).is_err());
        assert!(schmidt_angle_for_alpha(2.5).is_err());

        for alpha in [0.1, 0.5, 1.0, 1.5, 1.9, 1.99] {
            let theta = schmidt_angle_for_alpha(alpha).unwrap().theta;
            let back = alpha_for_angle(theta).unwrap();
            assert!((back - alpha).abs() < 1e-12, "roundtrip at {alpha}: {back}");
        }
        assert!((alpha_for_angle(std::f64::consts::FRAC_PI_4).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn ideal_realization_reaches_the_bound() {
        for alpha in GRID.iter().copied().chain([2.0]) {
            let r = ideal_realization(alpha).unwrap();
            let f = BellFunctional::new(alpha).unwrap();
            let v = bell_value(&f, &r);
            assert!(
                (v - quantum_bound(alpha).unwrap()).abs() < 1e-10,
                "ideal value at α={alpha}: {v}"
            );
        }
    }

    #[test]
    fn bell_value_special_realizations() {
        // Deterministic strategy A = B = +1 at α = 1 gives 3.
        let id = Observable::identity(2);
        let psi = StateVector::basis(&[2, 2], &[0, 0]).unwrap();
        let det = Realization::new(psi, vec![id.clone(), id.clone()], vec![id.clone(), id]).unwrap();
        let f = BellFunctional::new(1.0).unwrap();
        assert!((bell_value(&f, &det) - 3.0).abs() < 1e-14);

        // Product state with the ideal CHSH measurements stays classical.
        let ideal = ideal_realization(0.0).unwrap();
        let product = Realization::new(
            StateVector::basis(&[2, 2], &[0, 0]).unwrap(),
            ideal.alice.clone(),
            ideal.bob.clone(),
        )
        .unwrap();
        let f0 = BellFunctional::new(0.0).unwrap();
        let v = bell_value(&f0, &product);
        assert!(v <= 2.0 + 1e-10, "product state value {v}");
    }

    #[test]
    fn r1_at_maximal_angle() {
        let r1 = paper_r_vector(0, std::f64::consts::FRAC_PI_4).unwrap();
        let p = poly_from_vector(&r1);
        let mut expect = NcPolynomial::zero();
        expect.add_term(CanonicalWord::from_letters(&[A0]), -(2.0f64.sqrt()));
        expect.add_term(CanonicalWord::from_letters(&[B0]), 1.0);
        expect.add_term(CanonicalWord::from_letters(&[B1]), 1.0);
        assert!(poly_residual(&p, &expect) < 1e-12);

        // The remaining r-vectors divide by cos 2θ and must be rejected there.
        assert!(paper_r_vector(1, std::f64::consts::FRAC_PI_4).is_err());
    }

    #[test]
    fn printed_certificate_domains() {
        // Finite at θ = π/8 (α = 2/√3)…
        let cert = paper_certificate_at_theta(std::f64::consts::PI / 8.0).unwrap();
        assert_eq!(cert.q_vectors.len(), 5);
        assert!(cert.q_vectors.iter().flatten().all(|x| x.is_finite()));

        // …rejected at the CHSH point (division by cos 2θ)…
        assert!(paper_sos_certificate(0.0).is_err());

        // …and flagged invalid where the printed q5 radicand turns negative.
        match paper_certificate_at_theta(0.75) {
            Err(Error::InvalidCertificate(msg)) => assert!(msg.contains("q5")),
            other => panic!("expected invalid certificate, got {other:?}"),
        }
    }

    #[test]
    fn gram_solver_matches_gap_at_chsh() {
        let cert = gram_sos_solve(0.0).unwrap();
        let gap = gap_poly(0.0).unwrap();
        let residual = poly_residual(&sos_expand(&cert), &gap);
        assert!(residual < 1e-8, "symbolic residual {residual}");
    }

    #[test]
    fn gram_solver_annihilates_the_maximizer() {
        for alpha in [0.5, 1.0, 1.95] {
            let cert = gram_sos_solve(alpha).unwrap();
            let ideal = ideal_realization(alpha).unwrap();
            for q in &cert.q_vectors {
                let p = poly_from_vector(q);
                let op = poly_evaluate(&p, &ideal).unwrap();
                let norm = (op * &ideal.state.amplitudes).norm();
                assert!(norm < 1e-6, "‖P ψ‖ = {norm} at α = {alpha}");
            }
        }
    }

    #[test]
    fn gram_solver_handles_the_boundary_tilt() {
        let cert = gram_sos_solve(2.0).unwrap();
        let gap = gap_poly(2.0).unwrap();
        let residual = poly_residual(&sos_expand(&cert), &gap);
        assert!(residual < 1e-8, "symbolic residual at α=2: {residual}");
    }

    #[test]
    fn seesaw_reaches_quantum_bound_chsh() {
        let (v, r) = seesaw_max_violation(0.0, (2, 2), 20, 7).unwrap();
        assert!((v - 8.0f64.sqrt()).abs() < 1e-6, "see-saw value {v}");
        let f = BellFunctional::new(0.0).unwrap();
        assert!((bell_value(&f, &r) - v).abs() < 1e-12);
    }

    #[test]
    fn seesaw_matches_closed_form_at_unit_tilt() {
        let (v, _) = seesaw_max_violation(1.0, (2, 2), 20, 11).unwrap();
        assert!((v - 10.0f64.sqrt()).abs() < 1e-6, "see-saw value {v}");
    }

    #[test]
    fn seesaw_gains_nothing_from_higher_dimension() {
        let (v, _) = seesaw_max_violation(1.0, (4, 4), 20, 13).unwrap();
        assert!(v <= 10.0f64.sqrt() + 1e-9);
        assert!((v - 10.0f64.sqrt()).abs() < 1e-6, "see-saw value {v}");
    }

    #[test]
    fn inflation_preserves_bell_value() {
        let r = ideal_realization(1.0).unwrap();
        let f = BellFunctional::new(1.0).unwrap();
        let v0 = bell_value(&f, &r);

        let same = inflate_with_junk(&r, (1, 1), 99).unwrap();
        assert_eq!(same.state.amplitudes, r.state.amplitudes);

        let big = inflate_with_junk(&r, (2, 2), 99).unwrap();
        assert_eq!(big.dims(), (4, 4));
        let v1 = bell_value(&f, &big);
        assert!((v0 - v1).abs() < 1e-12, "inflated value drifted: {v0} vs {v1}");
        for o in big.alice.iter().chain(big.bob.iter()) {
            assert!(dichotomy_residual(&o.matrix) < tol::STRUCTURAL);
        }
    }
}
