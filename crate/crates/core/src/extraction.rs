//! Local extraction of the target qubit pair from an untrusted realization.
//!
//! Near-maximal violation certifies the state only up to local isometry.  The
//! isometry is made concrete by the swap construction: regularize Bob's
//! observables into a pair of anticommuting involutions, attach one ancilla
//! qubit per party, and swap the certified degrees of freedom into the
//! ancillas.  The distance from the swapped-out state to the target
//! `cos θ|00⟩ + sin θ|11⟩` is controlled analytically by a chain of
//! triangle-inequality estimates, all derived from the violation deficit
//! `ε = √(√(8+2α²) − ⟨B⟩)`.

use serde::{Deserialize, Serialize};

use crate::bell::{bell_value, quantum_bound, schmidt_angle_for_alpha, AngleSet, BellFunctional, Realization};
use crate::error::{Error, Result};
use crate::qalg::{
    distance_and_fidelity, hermitian_eigen, matrix_sign, max_abs, phase_optimized_distance,
    seeded_rng, Observable, StateVector,
};
use crate::{tol, C64, CMatrix, CVector};

/// The four involutions the swap circuit uses: Alice's raw observables and
/// Bob's regularized pair.
#[derive(Debug, Clone)]
pub struct RegularizedObservables {
    /// Alice's `Z_A = A0`.
    pub za: CMatrix,
    /// Alice's `X_A = A1`.
    pub xa: CMatrix,
    /// Bob's `Z_B = sign((B0 + B1) / 2cos μ)`.
    pub zb: CMatrix,
    /// Bob's `X_B = sign((B0 − B1) / 2sin μ)`.
    pub xb: CMatrix,
}

/// Builds swap inputs from a realization.
///
/// Bob's raw combinations `Z'_B = (B0+B1)/2cos μ` and `X'_B = (B0−B1)/2sin μ`
/// satisfy `Z'² cos²μ + X'² sin²μ = I` exactly for dichotomic inputs; that
/// identity is re-checked here as a guard.  The combinations need not be
/// involutions themselves, so each is hardened by the matrix sign function
/// (zero modes mapped to +1).  Angles with `|cos μ|` or `|sin μ|` below the
/// cutoff are rejected — there the direction information degenerates.
pub fn regularize_observables(r: &Realization, angles: &AngleSet) -> Result<RegularizedObservables> {
    let mu = angles.mu;
    if mu.cos().abs() < tol::MU_CUTOFF || mu.sin().abs() < tol::MU_CUTOFF {
        return Err(Error::Degenerate(format!(
            "measurement angle μ = {mu} too close to a coordinate axis"
        )));
    }
    let b0 = &r.bob[0].matrix;
    let b1 = &r.bob[1].matrix;
    let zp = (b0 + b1) * C64::new(1.0 / (2.0 * mu.cos()), 0.0);
    let xp = (b0 - b1) * C64::new(1.0 / (2.0 * mu.sin()), 0.0);

    let db = b0.nrows();
    let eye = CMatrix::identity(db, db);
    let combo = &zp * &zp * C64::new(mu.cos().powi(2), 0.0)
        + &xp * &xp * C64::new(mu.sin().powi(2), 0.0);
    let residual = max_abs(&(&combo - &eye));
    if residual > tol::STRUCTURAL {
        return Err(Error::identity("Z'² cos²μ + X'² sin²μ = I", residual));
    }

    Ok(RegularizedObservables {
        za: r.alice[0].matrix.clone(),
        xa: r.alice[1].matrix.clone(),
        zb: matrix_sign(&zp)?,
        xb: matrix_sign(&xp)?,
    })
}

/// Residual norms of the algebraic relations a maximizer satisfies exactly.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ConditionResiduals {
    /// `‖(Z_A − Z_B)ψ‖`.
    pub z_match: f64,
    /// `‖(sin θ·X_A(I + Z_A) − cos θ·X_B(I − Z_A))ψ‖`.
    pub x_cross: f64,
}

/// Evaluates the maximizer relations on a realization.
pub fn condition_residuals(r: &Realization, angles: &AngleSet) -> Result<ConditionResiduals> {
    let reg = regularize_observables(r, angles)?;
    let (da, db) = r.dims();
    let psi = &r.state.amplitudes;
    let eye_a = CMatrix::identity(da, da);
    let eye_b = CMatrix::identity(db, db);
    let on_a = |m: &CMatrix| crate::qalg::kron(m, &eye_b);
    let on_b = |m: &CMatrix| crate::qalg::kron(&eye_a, m);

    let z_match = ((&on_a(&reg.za) - &on_b(&reg.zb)) * psi).norm();

    let theta = angles.theta;
    let plus = &on_a(&eye_a) + &on_a(&reg.za);
    let minus = &on_a(&eye_a) - &on_a(&reg.za);
    let lhs = on_a(&reg.xa) * plus * psi * C64::new(theta.sin(), 0.0);
    let rhs = on_b(&reg.xb) * minus * psi * C64::new(theta.cos(), 0.0);
    let x_cross = (lhs - rhs).norm();

    Ok(ConditionResiduals { z_match, x_cross })
}

fn hadamard() -> CMatrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    CMatrix::from_row_slice(
        2,
        2,
        &[
            C64::new(h, 0.0),
            C64::new(h, 0.0),
            C64::new(h, 0.0),
            C64::new(-h, 0.0),
        ],
    )
}

/// Applies the swap isometry in closed form.
///
/// With `P± = (I ± Z)/1` per party, the output on `(sys A, sys B, anc A,
/// anc B)` is
/// `¼[(I+Z_A)(I+Z_B)ψ|00⟩ + X_B(I+Z_A)(I−Z_B)ψ|01⟩
///   + X_A(I−Z_A)(I+Z_B)ψ|10⟩ + X_A X_B(I−Z_A)(I−Z_B)ψ|11⟩]`.
pub fn swap_isometry(r: &Realization, reg: &RegularizedObservables) -> Result<StateVector> {
    let (da, db) = r.dims();
    let psi = &r.state.amplitudes;
    let eye_a = CMatrix::identity(da, da);
    let eye_b = CMatrix::identity(db, db);
    let on_a = |m: &CMatrix| crate::qalg::kron(m, &eye_b);
    let on_b = |m: &CMatrix| crate::qalg::kron(&eye_a, m);

    let pa_plus = &on_a(&eye_a) + &on_a(&reg.za);
    let pa_minus = &on_a(&eye_a) - &on_a(&reg.za);
    let pb_plus = &on_b(&eye_b) + &on_b(&reg.zb);
    let pb_minus = &on_b(&eye_b) - &on_b(&reg.zb);

    let branches = [
        &pa_plus * &pb_plus * psi,
        on_b(&reg.xb) * (&pa_plus * &pb_minus * psi),
        on_a(&reg.xa) * (&pa_minus * &pb_plus * psi),
        on_a(&reg.xa) * on_b(&reg.xb) * (&pa_minus * &pb_minus * psi),
    ];

    let n = da * db;
    let mut out = CVector::zeros(n * 4);
    for (branch, v) in branches.iter().enumerate() {
        for i in 0..n {
            out[i * 4 + branch] = v[i] * C64::new(0.25, 0.0);
        }
    }
    StateVector::new(out, vec![da, db, 2, 2])
}

/// Applies the swap as an explicit gate sequence on `ψ ⊗ |00⟩`:
/// Hadamards on both ancillas, controlled `Z_A`/`Z_B` from each ancilla onto
/// its party, Hadamards again, controlled `X_A`/`X_B`.  Equal to
/// [`swap_isometry`] up to floating-point noise.
pub fn swap_circuit(r: &Realization, reg: &RegularizedObservables) -> Result<StateVector> {
    let (da, db) = r.dims();
    let anc = StateVector::basis(&[2, 2], &[0, 0])?;
    let mut state = r.state.tensor(&anc);
    debug_assert_eq!(state.dims, vec![da, db, 2, 2]);

    let h = hadamard();
    let eye_a = CMatrix::identity(da, da);
    let eye_b = CMatrix::identity(db, db);

    state = state.apply_on(2, &h)?;
    state = state.apply_on(3, &h)?;
    state = state.controlled_apply(2, 0, &[eye_a.clone(), reg.za.clone()])?;
    state = state.controlled_apply(3, 1, &[eye_b.clone(), reg.zb.clone()])?;
    state = state.apply_on(2, &h)?;
    state = state.apply_on(3, &h)?;
    state = state.controlled_apply(2, 0, &[eye_a, reg.xa.clone()])?;
    state = state.controlled_apply(3, 1, &[eye_b, reg.xb.clone()])?;
    Ok(state)
}

/// The analytic error chain from violation deficit to extraction distance.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RobustnessChain {
    /// Violation deficit `ε = √(√(8+2α²) − ⟨B⟩)`.
    pub epsilon: f64,
    /// `ε₂ = (|sin θ / cos μ| + |3 cos θ / 2 sin μ|)·ε`.
    pub epsilon2: f64,
    /// `ε₃ = ε·(1/cos μ + 1)`.
    pub epsilon3: f64,
    /// `ε₄ = ε₃ / tan²μ`.
    pub epsilon4: f64,
    /// `ε'₂ = ε₂ + |sin θ|·ε₃ + 2|cos θ|·ε₄`.
    pub epsilon2_prime: f64,
    /// `ε̄ = 4ε + ε'₂ / (2|cos θ|)`.
    pub epsilon_bar: f64,
    /// Certified distance bound `2ε̄`.
    pub distance_bound: f64,
}

/// Evaluates the chain at a given deficit.
pub fn robustness_chain(alpha: f64, epsilon: f64) -> Result<RobustnessChain> {
    if epsilon < 0.0 || !epsilon.is_finite() {
        return Err(Error::InvalidInput(format!("negative deficit ε = {epsilon}")));
    }
    let angles = schmidt_angle_for_alpha(alpha)?;
    let (theta, mu) = (angles.theta, angles.mu);
    let epsilon2 = ((theta.sin() / mu.cos()).abs() + (3.0 * theta.cos() / (2.0 * mu.sin())).abs()) * epsilon;
    let epsilon3 = epsilon * (1.0 / mu.cos() + 1.0);
    let epsilon4 = epsilon3 / mu.tan().powi(2);
    let epsilon2_prime = epsilon2 + theta.sin().abs() * epsilon3 + 2.0 * theta.cos().abs() * epsilon4;
    let epsilon_bar = 4.0 * epsilon + epsilon2_prime / (2.0 * theta.cos().abs());
    Ok(RobustnessChain {
        epsilon,
        epsilon2,
        epsilon3,
        epsilon4,
        epsilon2_prime,
        epsilon_bar,
        distance_bound: 2.0 * epsilon_bar,
    })
}

/// Deficit from an observed Bell value, clamped at zero.
pub fn epsilon_from_value(alpha: f64, value: f64) -> Result<f64> {
    Ok((quantum_bound(alpha)? - value).max(0.0).sqrt())
}

/// Everything the extraction pipeline certifies about one realization.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExtractionReport {
    /// Tilt parameter the realization is tested against.
    pub alpha: f64,
    /// Observed ⟨B(α)⟩.
    pub bell_value: f64,
    /// Analytic chain evaluated at the observed deficit.
    pub chain: RobustnessChain,
    /// Residuals of the maximizer relations.
    pub conditions: ConditionResiduals,
    /// Norm of `(I+Z_A)ψ / 2cos θ` before normalization.
    pub junk_prenorm: f64,
    /// `‖Φψ − ξ ⊗ τ‖` against the explicit junk-state candidate.
    pub distance: f64,
    /// `|⟨Φψ | ξ ⊗ τ⟩|²`.
    pub fidelity: f64,
    /// Distance minimized over a global phase (diagnostic only).
    pub phase_optimized_distance: f64,
    /// Purity `tr ρ²` of the reduced ancilla-pair state.
    pub extracted_purity: f64,
    /// Schmidt coefficients of the dominant ancilla-pair eigenvector.
    pub ancilla_schmidt: [f64; 2],
    /// Whether `distance ≤ 2ε̄`, with absolute slack for floating-point dust
    /// (an exact maximizer has bound 0 but distance ~1e-15).
    pub bound_satisfied: bool,
}

/// Runs the full pipeline: regularize, swap, compare against the target
/// `ξ ⊗ (cos θ|00⟩ + sin θ|11⟩)` with junk candidate `ξ ∝ (I+Z_A)ψ`.
pub fn extraction_report(r: &Realization, alpha: f64) -> Result<ExtractionReport> {
    let f = BellFunctional::new(alpha)?;
    let angles = schmidt_angle_for_alpha(alpha)?;
    let theta = angles.theta;
    let value = bell_value(&f, r);
    let epsilon = epsilon_from_value(alpha, value)?;
    let chain = robustness_chain(alpha, epsilon)?;
    let reg = regularize_observables(r, &angles)?;
    let conditions = condition_residuals(r, &angles)?;

    let swapped = swap_isometry(r, &reg)?;

    // Junk candidate ξ = (I+Z_A)ψ / 2cos θ, then normalized.
    let (da, db) = r.dims();
    let eye = CMatrix::identity(da, da);
    let za_full = crate::qalg::kron(&(&eye + &reg.za), &CMatrix::identity(db, db));
    let junk_raw = za_full * &r.state.amplitudes * C64::new(1.0 / (2.0 * theta.cos()), 0.0);
    let junk_prenorm = junk_raw.norm();
    if junk_prenorm < tol::ANGLE_CUTOFF {
        return Err(Error::Degenerate(format!(
            "junk candidate (I+Z_A)ψ nearly vanishes (norm {junk_prenorm:.3e})"
        )));
    }
    let junk = StateVector::new(junk_raw / C64::new(junk_prenorm, 0.0), vec![da, db])?;

    let target_pair = StateVector::new(
        CVector::from_vec(vec![
            C64::new(theta.cos(), 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(theta.sin(), 0.0),
        ]),
        vec![2, 2],
    )?;
    let target = junk.tensor(&target_pair);

    let (distance, fidelity) = distance_and_fidelity(&swapped, &target)?;
    let phase_opt = phase_optimized_distance(&swapped, &target)?;

    // Reduced ancilla-pair state and its dominant eigenvector.
    let n_sys = da * db;
    let mut rho = CMatrix::zeros(4, 4);
    for s in 0..n_sys {
        for p in 0..4 {
            for q in 0..4 {
                rho[(p, q)] += swapped.amplitudes[s * 4 + p] * swapped.amplitudes[s * 4 + q].conj();
            }
        }
    }
    let purity = (&rho * &rho).trace().re;
    let (evals, evecs) = hermitian_eigen(&rho);
    let top = evecs.column(3);
    let _ = evals;
    let extracted = StateVector::new(
        CVector::from_iterator(4, top.iter().cloned()),
        vec![2, 2],
    )?
    .normalized()?;
    let schmidt = crate::qalg::schmidt_decompose(&extracted, 1)?;
    let mut coeffs = [0.0; 2];
    for (i, c) in schmidt.coefficients.iter().take(2).enumerate() {
        coeffs[i] = *c;
    }

    Ok(ExtractionReport {
        alpha,
        bell_value: value,
        chain,
        conditions,
        junk_prenorm,
        distance,
        fidelity,
        phase_optimized_distance: phase_opt,
        extracted_purity: purity,
        ancilla_schmidt: coeffs,
        bound_satisfied: distance <= chain.distance_bound + tol::VECTOR_EQ,
    })
}

/// How a realization is pushed away from the maximizer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbMode {
    /// Conjugate `B1` by a random plane rotation of angle δ.
    RotateB1,
    /// Conjugate `A1` by a random plane rotation of angle δ.
    RotateA1,
    /// Mix the state with a random orthogonal direction, weight δ.
    MixState,
}

/// Random rotation by angle δ in a seeded random two-dimensional real plane:
/// `U = I + (cos δ − 1)(uu† + vv†) + sin δ(vu† − uv†)`.
fn plane_rotation(dim: usize, delta: f64, rng: &mut impl rand::Rng) -> CMatrix {
    let gauss = |rng: &mut dyn rand::RngCore| {
        CVector::from_fn(dim, |_, _| {
            C64::new(
                rand_distr::Distribution::sample(&rand_distr::StandardNormal, rng),
                rand_distr::Distribution::sample(&rand_distr::StandardNormal, rng),
            )
        })
    };
    let u = gauss(rng);
    let u = &u / C64::new(u.norm(), 0.0);
    let mut v = gauss(rng);
    let overlap = u.dotc(&v);
    v -= &u * overlap;
    let v = &v / C64::new(v.norm(), 0.0);

    let uu = &u * u.adjoint();
    let vv = &v * v.adjoint();
    let vu = &v * u.adjoint();
    let uv = &u * v.adjoint();
    CMatrix::identity(dim, dim)
        + (uu + vv) * C64::new(delta.cos() - 1.0, 0.0)
        + (vu - uv) * C64::new(delta.sin(), 0.0)
}

/// Applies one perturbation mode at strength δ, deterministically in `seed`.
pub fn perturb_realization(
    r: &Realization,
    mode: PerturbMode,
    delta: f64,
    seed: u64,
) -> Result<Realization> {
    if !(0.0..std::f64::consts::PI).contains(&delta) {
        return Err(Error::InvalidInput(format!("perturbation strength {delta} outside [0, π)")));
    }
    let mut rng = seeded_rng(seed);
    let (da, db) = r.dims();
    let mut state = r.state.clone();
    let mut alice = r.alice.clone();
    let mut bob = r.bob.clone();
    match mode {
        PerturbMode::RotateB1 => {
            let u = plane_rotation(db, delta, &mut rng);
            bob[1] = Observable::dichotomic(&u * &bob[1].matrix * u.adjoint())?;
        }
        PerturbMode::RotateA1 => {
            let u = plane_rotation(da, delta, &mut rng);
            alice[1] = Observable::dichotomic(&u * &alice[1].matrix * u.adjoint())?;
        }
        PerturbMode::MixState => {
            let noise = crate::qalg::random_state(&[da, db], &mut rng);
            let overlap = state.amplitudes.dotc(&noise.amplitudes);
            let ortho = &noise.amplitudes - &state.amplitudes * overlap;
            let norm = ortho.norm();
            if norm > tol::SIGN_ZERO {
                let mixed = &state.amplitudes + ortho * C64::new(delta / norm, 0.0);
                state = StateVector::new(mixed, vec![da, db])?.normalized()?;
            }
        }
    }
    Realization::new(state, alice, bob)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bell::ideal_realization;
    use crate::qalg::inflate_with_junk;

    #[test]
    fn golden_chain_at_chsh() {
        let chain = robustness_chain(0.0, 1.0).unwrap();
        let sqrt2 = 2.0f64.sqrt();
        assert!((chain.epsilon2 - 2.5).abs() < 1e-12);
        assert!((chain.epsilon3 - (1.0 + sqrt2)).abs() < 1e-12);
        assert!((chain.epsilon4 - (1.0 + sqrt2)).abs() < 1e-12);
        assert!((chain.epsilon2_prime - (5.5 + 1.5 * sqrt2)).abs() < 1e-12);
        assert!((chain.epsilon_bar - 5.5 * (1.0 + 1.0 / sqrt2)).abs() < 1e-12);
        assert!((chain.distance_bound - 18.778_174_593_052_022).abs() < 1e-9);
    }

    #[test]
    fn chain_scales_to_zero_with_deficit() {
        let chain = robustness_chain(1.0, 0.0).unwrap();
        assert_eq!(chain.distance_bound, 0.0);
        let tiny = robustness_chain(1.0, 1e-6).unwrap();
        assert!(tiny.distance_bound > 0.0 && tiny.distance_bound < 1e-4);
        assert!(robustness_chain(2.0, 0.1).is_err());
        assert!(robustness_chain(1.0, -0.1).is_err());
    }

    #[test]
    fn regularization_fixes_ideal_observables() {
        let r = ideal_realization(0.7).unwrap();
        let angles = schmidt_angle_for_alpha(0.7).unwrap();
        let reg = regularize_observables(&r, &angles).unwrap();
        let z = CMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(1.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(-1.0, 0.0),
            ],
        );
        let x = CMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(0.0, 0.0),
                C64::new(1.0, 0.0),
                C64::new(1.0, 0.0),
                C64::new(0.0, 0.0),
            ],
        );
        assert!(max_abs(&(&reg.zb - &z)) < 1e-12);
        assert!(max_abs(&(&reg.xb - &x)) < 1e-12);

        let squeezed = AngleSet { theta: angles.theta, mu: 1e-9 };
        assert!(regularize_observables(&r, &squeezed).is_err());
    }

    #[test]
    fn ideal_conditions_hold() {
        for alpha in [0.0, 0.5, 1.0, 1.5] {
            let r = ideal_realization(alpha).unwrap();
            let angles = schmidt_angle_for_alpha(alpha).unwrap();
            let c = condition_residuals(&r, &angles).unwrap();
            assert!(c.z_match < 1e-12, "z_match {} at α={alpha}", c.z_match);
            assert!(c.x_cross < 1e-12, "x_cross {} at α={alpha}", c.x_cross);
        }
    }

    #[test]
    fn circuit_matches_closed_form() {
        let r = ideal_realization(0.8).unwrap();
        let angles = schmidt_angle_for_alpha(0.8).unwrap();
        let reg = regularize_observables(&r, &angles).unwrap();
        let a = swap_isometry(&r, &reg).unwrap();
        let b = swap_circuit(&r, &reg).unwrap();
        assert!((&a.amplitudes - &b.amplitudes).norm() < 1e-12);

        let bumped = perturb_realization(&r, PerturbMode::RotateB1, 0.3, 17).unwrap();
        let reg = regularize_observables(&bumped, &angles).unwrap();
        let a = swap_isometry(&bumped, &reg).unwrap();
        let b = swap_circuit(&bumped, &reg).unwrap();
        assert!((&a.amplitudes - &b.amplitudes).norm() < 1e-12);
        assert!((a.norm() - 1.0).abs() < 1e-12, "swap must stay unitary");
    }

    #[test]
    fn ideal_extraction_is_exact() {
        for alpha in [0.0, 0.5, 1.0, 1.5] {
            let r = ideal_realization(alpha).unwrap();
            let report = extraction_report(&r, alpha).unwrap();
            let theta = schmidt_angle_for_alpha(alpha).unwrap().theta;
            assert!(report.distance < 1e-10, "distance {} at α={alpha}", report.distance);
            assert!((report.fidelity - 1.0).abs() < 1e-10);
            assert!((report.junk_prenorm - 1.0).abs() < 1e-10);
            assert!((report.extracted_purity - 1.0).abs() < 1e-10);
            assert!((report.ancilla_schmidt[0] - theta.cos()).abs() < 1e-8);
            assert!((report.ancilla_schmidt[1] - theta.sin()).abs() < 1e-8);
            assert!(report.bound_satisfied);
        }
    }

    #[test]
    fn extraction_survives_junk_inflation() {
        let r = ideal_realization(1.0).unwrap();
        let inflated = inflate_with_junk(&r, (2, 2), 41).unwrap();
        let report = extraction_report(&inflated, 1.0).unwrap();
        assert!(report.distance < 1e-8, "distance {}", report.distance);
        let theta = schmidt_angle_for_alpha(1.0).unwrap().theta;
        assert!((report.ancilla_schmidt[0] - theta.cos()).abs() < 1e-8);
        assert!((report.ancilla_schmidt[1] - theta.sin()).abs() < 1e-8);
    }

    #[test]
    fn perturbations_preserve_validity() {
        let r = ideal_realization(0.5).unwrap();
        for mode in [PerturbMode::RotateB1, PerturbMode::RotateA1, PerturbMode::MixState] {
            let p = perturb_realization(&r, mode, 0.05, 3).unwrap();
            assert_eq!(p.dims(), r.dims());
            assert!((p.state.norm() - 1.0).abs() < 1e-12);
        }
        // Zero strength is the identity map.
        let p = perturb_realization(&r, PerturbMode::RotateB1, 0.0, 3).unwrap();
        assert!(max_abs(&(&p.bob[1].matrix - &r.bob[1].matrix)) < 1e-12);
        assert!(perturb_realization(&r, PerturbMode::MixState, -0.1, 3).is_err());
    }

    #[test]
    fn perturbed_distance_respects_the_bound() {
        let r = ideal_realization(0.5).unwrap();
        for (mode, seed) in [
            (PerturbMode::RotateB1, 5u64),
            (PerturbMode::RotateA1, 6),
            (PerturbMode::MixState, 7),
        ] {
            for delta in [1e-3, 1e-2, 5e-2] {
                let p = perturb_realization(&r, mode, delta, seed).unwrap();
                let report = extraction_report(&p, 0.5).unwrap();
                assert!(
                    report.bound_satisfied,
                    "mode {mode:?} δ={delta}: distance {} > bound {}",
                    report.distance, report.chain.distance_bound
                );
                assert!(report.chain.epsilon > 0.0);
            }
        }
    }
}
