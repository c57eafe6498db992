//! Dense complex states, observables and projector families.
//!
//! Conventions used across the crate:
//!
//! * Tensor factors are laid out row-major with the **first** factor as the
//!   slow index: a state on subsystems `(s0, s1, …)` stores amplitude
//!   `ψ[i0, i1, …]` at flat index `((i0·d1 + i1)·d2 + …)`.
//! * Party order is Alice, Bob, then ancillas.
//! * Inner products are conjugate-linear in the first argument.

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::bell::Realization;
use crate::error::{Error, Result};
use crate::{tol, C64, CMatrix, CVector};

/// A pure state on a list of finite-dimensional subsystems.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    /// Flat amplitudes, row-major over `dims`.
    pub amplitudes: CVector,
    /// Dimensions of the tensor factors, slow index first.
    pub dims: Vec<usize>,
}

impl StateVector {
    /// Wraps amplitudes with their subsystem dimensions.
    pub fn new(amplitudes: CVector, dims: Vec<usize>) -> Result<Self> {
        let expected: usize = dims.iter().product();
        if dims.is_empty() || dims.contains(&0) || amplitudes.len() != expected {
            return Err(Error::Shape(format!(
                "amplitude length {} does not match dims {:?}",
                amplitudes.len(),
                dims
            )));
        }
        Ok(StateVector { amplitudes, dims })
    }

    /// Computational basis state |i0 i1 …⟩ for the given dimensions.
    pub fn basis(dims: &[usize], indices: &[usize]) -> Result<Self> {
        if dims.len() != indices.len() || indices.iter().zip(dims).any(|(&i, &d)| i >= d) {
            return Err(Error::Shape(format!(
                "basis indices {indices:?} invalid for dims {dims:?}"
            )));
        }
        let n: usize = dims.iter().product();
        let mut flat = 0usize;
        for (&i, &d) in indices.iter().zip(dims) {
            flat = flat * d + i;
        }
        let mut amplitudes = CVector::zeros(n);
        amplitudes[flat] = C64::new(1.0, 0.0);
        StateVector::new(amplitudes, dims.to_vec())
    }

    /// Euclidean norm.
    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// Returns the state scaled to unit norm.
    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n < 1e-300 {
            return Err(Error::Degenerate("cannot normalize a zero vector".into()));
        }
        Ok(StateVector {
            amplitudes: self.amplitudes.clone() / C64::new(n, 0.0),
            dims: self.dims.clone(),
        })
    }

    /// ⟨self|other⟩, conjugate-linear in `self`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.amplitudes.len() != other.amplitudes.len() {
            return Err(Error::Shape("inner product of different dimensions".into()));
        }
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    /// Tensor product, concatenating subsystem lists.
    pub fn tensor(&self, other: &StateVector) -> StateVector {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        StateVector {
            amplitudes: kron_vec(&self.amplitudes, &other.amplitudes),
            dims,
        }
    }

    /// Applies a square operator to one subsystem, leaving the rest alone.
    pub fn apply_on(&self, sub: usize, op: &CMatrix) -> Result<StateVector> {
        if sub >= self.dims.len() {
            return Err(Error::Shape(format!("subsystem {sub} out of range")));
        }
        let d = self.dims[sub];
        if op.nrows() != d || op.ncols() != d {
            return Err(Error::Shape(format!(
                "operator is {}x{} but subsystem {sub} has dimension {d}",
                op.nrows(),
                op.ncols()
            )));
        }
        let right: usize = self.dims[sub + 1..].iter().product();
        let left: usize = self.dims[..sub].iter().product();
        let mut out = CVector::zeros(self.amplitudes.len());
        for l in 0..left {
            for r in 0..right {
                for i in 0..d {
                    let mut acc = C64::new(0.0, 0.0);
                    for j in 0..d {
                        acc += op[(i, j)] * self.amplitudes[(l * d + j) * right + r];
                    }
                    out[(l * d + i) * right + r] = acc;
                }
            }
        }
        StateVector::new(out, self.dims.clone())
    }

    /// Applies `ops[k]` to `target` whenever subsystem `control` holds
    /// basis value `k`.
    pub fn controlled_apply(
        &self,
        control: usize,
        target: usize,
        ops: &[CMatrix],
    ) -> Result<StateVector> {
        let k = self.dims.len();
        if control >= k || target >= k || control == target {
            return Err(Error::Shape(format!(
                "invalid control/target pair ({control}, {target})"
            )));
        }
        let dc = self.dims[control];
        let dt = self.dims[target];
        if ops.len() != dc {
            return Err(Error::Shape(format!(
                "need {dc} controlled operators, got {}",
                ops.len()
            )));
        }
        if ops.iter().any(|op| op.nrows() != dt || op.ncols() != dt) {
            return Err(Error::Shape(format!("controlled operators must be {dt}x{dt}")));
        }
        let stride = |s: usize| -> usize { self.dims[s + 1..].iter().product() };
        let (sc, st) = (stride(control), stride(target));
        let n = self.amplitudes.len();
        let mut out = CVector::zeros(n);
        for idx in 0..n {
            let kv = (idx / sc) % dc;
            let i = (idx / st) % dt;
            let base = idx - i * st;
            let op = &ops[kv];
            let mut acc = C64::new(0.0, 0.0);
            for j in 0..dt {
                acc += op[(i, j)] * self.amplitudes[base + j * st];
            }
            out[idx] = acc;
        }
        StateVector::new(out, self.dims.clone())
    }

    /// Reorders subsystems so that output factor `p` is input factor `perm[p]`.
    pub fn permute_subsystems(&self, perm: &[usize]) -> Result<StateVector> {
        let k = self.dims.len();
        let mut seen = vec![false; k];
        if perm.len() != k || perm.iter().any(|&p| p >= k || std::mem::replace(&mut seen[p], true))
        {
            return Err(Error::Shape(format!("{perm:?} is not a permutation of 0..{k}")));
        }
        let new_dims: Vec<usize> = perm.iter().map(|&p| self.dims[p]).collect();
        let strides = |dims: &[usize]| -> Vec<usize> {
            let mut s = vec![1usize; dims.len()];
            for i in (0..dims.len().saturating_sub(1)).rev() {
                s[i] = s[i + 1] * dims[i + 1];
            }
            s
        };
        let old_strides = strides(&self.dims);
        let new_strides = strides(&new_dims);
        let mut out = CVector::zeros(self.amplitudes.len());
        for old_idx in 0..self.amplitudes.len() {
            let mut new_idx = 0;
            for (p, &src) in perm.iter().enumerate() {
                let v = (old_idx / old_strides[src]) % self.dims[src];
                new_idx += v * new_strides[p];
            }
            out[new_idx] = self.amplitudes[old_idx];
        }
        StateVector::new(out, new_dims)
    }

    /// Reinterprets the factor list without touching amplitudes (e.g. to merge
    /// a party with its junk register).  The products must agree.
    pub fn regroup(&self, dims: Vec<usize>) -> Result<StateVector> {
        StateVector::new(self.amplitudes.clone(), dims)
    }

    /// ⟨ψ|M|ψ⟩ for a full-space operator.
    pub fn expectation(&self, op: &CMatrix) -> Result<C64> {
        if op.nrows() != self.amplitudes.len() || op.ncols() != self.amplitudes.len() {
            return Err(Error::Shape("operator does not match state dimension".into()));
        }
        Ok(self.amplitudes.dotc(&(op * &self.amplitudes)))
    }
}

/// A Hermitian operator on a single party's space.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    /// The matrix; Hermitian within [`tol::HERMITIAN`].
    pub matrix: CMatrix,
}

impl Observable {
    /// Validates Hermiticity and wraps the matrix.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::Shape("observable must be square".into()));
        }
        let residual = hermiticity_residual(&matrix);
        if residual > tol::HERMITIAN {
            return Err(Error::NotHermitian { residual });
        }
        Ok(Observable { matrix })
    }

    /// Validates Hermiticity and `M² = I`, then wraps.
    pub fn dichotomic(matrix: CMatrix) -> Result<Self> {
        let obs = Observable::new(matrix)?;
        let residual = dichotomy_residual(&obs.matrix);
        if residual > tol::STRUCTURAL {
            return Err(Error::NotDichotomic { residual });
        }
        Ok(obs)
    }

    /// Identity observable of dimension `d`.
    pub fn identity(d: usize) -> Self {
        Observable {
            matrix: CMatrix::identity(d, d),
        }
    }

    /// Dimension of the underlying space.
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// A complete family of orthogonal projectors (one measurement).
#[derive(Debug, Clone)]
pub struct ProjectorFamily {
    /// One projector per outcome, all on the same space.
    pub projectors: Vec<CMatrix>,
}

impl ProjectorFamily {
    /// Validates Hermiticity, idempotence, pairwise orthogonality and
    /// completeness within [`tol::STRUCTURAL`].
    pub fn new(projectors: Vec<CMatrix>) -> Result<Self> {
        if projectors.is_empty() {
            return Err(Error::InvalidProjectors("empty family".into()));
        }
        let d = projectors[0].nrows();
        let mut sum = CMatrix::zeros(d, d);
        for (a, p) in projectors.iter().enumerate() {
            if p.nrows() != d || p.ncols() != d {
                return Err(Error::InvalidProjectors(format!(
                    "projector {a} has mismatched shape"
                )));
            }
            let herm = hermiticity_residual(p);
            if herm > tol::STRUCTURAL {
                return Err(Error::InvalidProjectors(format!(
                    "projector {a} not Hermitian (residual {herm:.3e})"
                )));
            }
            let idem = max_abs(&(p * p - p));
            if idem > tol::STRUCTURAL {
                return Err(Error::InvalidProjectors(format!(
                    "projector {a} not idempotent (residual {idem:.3e})"
                )));
            }
            sum += p;
        }
        for a in 0..projectors.len() {
            for b in (a + 1)..projectors.len() {
                let cross = max_abs(&(&projectors[a] * &projectors[b]));
                if cross > tol::STRUCTURAL {
                    return Err(Error::InvalidProjectors(format!(
                        "projectors {a} and {b} not orthogonal (residual {cross:.3e})"
                    )));
                }
            }
        }
        let complete = max_abs(&(sum - CMatrix::identity(d, d)));
        if complete > tol::STRUCTURAL {
            return Err(Error::InvalidProjectors(format!(
                "family does not sum to identity (residual {complete:.3e})"
            )));
        }
        Ok(ProjectorFamily { projectors })
    }

    /// Number of outcomes.
    pub fn len(&self) -> usize {
        self.projectors.len()
    }

    /// True when the family has no projectors (never, post-validation).
    pub fn is_empty(&self) -> bool {
        self.projectors.is_empty()
    }

    /// Dimension of the underlying space.
    pub fn dim(&self) -> usize {
        self.projectors[0].nrows()
    }
}

/// Result of a Schmidt decomposition across one bipartition.
#[derive(Debug, Clone)]
pub struct SchmidtForm {
    /// Nonnegative coefficients, sorted nonincreasing; squares sum to 1 for a
    /// normalized input.
    pub coefficients: Vec<f64>,
    /// Orthonormal left vectors, one per coefficient.
    pub left: Vec<CVector>,
    /// Orthonormal right vectors, one per coefficient.
    pub right: Vec<CVector>,
    /// Subsystem dimensions of the left block.
    pub left_dims: Vec<usize>,
    /// Subsystem dimensions of the right block.
    pub right_dims: Vec<usize>,
}

impl SchmidtForm {
    /// Rebuilds Σ λ_k · left_k ⊗ right_k as a state vector.
    pub fn reconstruct(&self) -> StateVector {
        let ln: usize = self.left_dims.iter().product();
        let rn: usize = self.right_dims.iter().product();
        let mut amps = CVector::zeros(ln * rn);
        for (k, &lam) in self.coefficients.iter().enumerate() {
            for i in 0..ln {
                for j in 0..rn {
                    amps[i * rn + j] += C64::new(lam, 0.0) * self.left[k][i] * self.right[k][j];
                }
            }
        }
        let mut dims = self.left_dims.clone();
        dims.extend_from_slice(&self.right_dims);
        StateVector { amplitudes: amps, dims }
    }

    /// The right vector paired with the largest coefficient, as a state.
    pub fn top_right_state(&self) -> StateVector {
        StateVector {
            amplitudes: self.right[0].clone(),
            dims: self.right_dims.clone(),
        }
    }
}

/// Operand for [`tensor_product`]: both arguments must be the same kind.
#[derive(Debug, Clone)]
pub enum Tensor {
    /// A complex matrix operand.
    Matrix(CMatrix),
    /// A complex vector operand.
    Vector(CVector),
}

/// Kronecker product of two matrices or two vectors; the first operand is the
/// slow index.  Mixing a matrix with a vector is a shape error.
pub fn tensor_product(a: &Tensor, b: &Tensor) -> Result<Tensor> {
    match (a, b) {
        (Tensor::Matrix(a), Tensor::Matrix(b)) => Ok(Tensor::Matrix(kron(a, b))),
        (Tensor::Vector(a), Tensor::Vector(b)) => Ok(Tensor::Vector(kron_vec(a, b))),
        _ => Err(Error::Shape(
            "tensor_product needs two matrices or two vectors, not a mix".into(),
        )),
    }
}

/// Kronecker product of two matrices.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Kronecker product of two vectors: `out[i·|b| + j] = a[i]·b[j]`.
pub fn kron_vec(a: &CVector, b: &CVector) -> CVector {
    let (na, nb) = (a.len(), b.len());
    let mut out = CVector::zeros(na * nb);
    for i in 0..na {
        for j in 0..nb {
            out[i * nb + j] = a[i] * b[j];
        }
    }
    out
}

/// Largest entry magnitude of a matrix.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// Max-entry residual against the adjoint.
pub fn hermiticity_residual(m: &CMatrix) -> f64 {
    max_abs(&(m - m.adjoint()))
}

/// Max-entry residual of `M² − I`.
pub fn dichotomy_residual(m: &CMatrix) -> f64 {
    let d = m.nrows();
    max_abs(&(m * m - CMatrix::identity(d, d)))
}

/// True when `o` is Hermitian and squares to the identity within `tolerance`.
pub fn check_dichotomic(o: &Observable, tolerance: f64) -> bool {
    dichotomy_residual(&o.matrix) <= tolerance
}

/// Schmidt decomposition of `psi` across the cut after `split` subsystems.
///
/// Left block = factors `0..split`, right block = the rest.  Phases are fixed
/// deterministically: the largest-magnitude entry of each left vector is made
/// real positive.
pub fn schmidt_decompose(psi: &StateVector, split: usize) -> Result<SchmidtForm> {
    if split == 0 || split >= psi.dims.len() {
        return Err(Error::Shape(format!(
            "split {split} invalid for {} subsystems",
            psi.dims.len()
        )));
    }
    let left_dims = psi.dims[..split].to_vec();
    let right_dims = psi.dims[split..].to_vec();
    let ln: usize = left_dims.iter().product();
    let rn: usize = right_dims.iter().product();
    let m = DMatrix::from_fn(ln, rn, |i, j| psi.amplitudes[i * rn + j]);
    let svd = m.svd(true, true);
    let u = svd.u.ok_or_else(|| Error::Shape("SVD did not return U".into()))?;
    let v_t = svd.v_t.ok_or_else(|| Error::Shape("SVD did not return V^H".into()))?;
    let k = svd.singular_values.len();
    let mut entries: Vec<(f64, CVector, CVector)> = Vec::with_capacity(k);
    for idx in 0..k {
        let mut lvec = CVector::from_iterator(ln, u.column(idx).iter().cloned());
        let mut rvec = CVector::from_iterator(rn, v_t.row(idx).iter().cloned());
        // Deterministic phase: rotate the dominant left entry onto the
        // positive real axis, absorbing the opposite phase on the right.
        let (mut best, mut best_mag) = (0usize, 0.0f64);
        for (i, c) in lvec.iter().enumerate() {
            if c.norm() > best_mag {
                best_mag = c.norm();
                best = i;
            }
        }
        if best_mag > 1e-14 {
            let phase = lvec[best] / C64::new(best_mag, 0.0);
            let conj = phase.conj();
            lvec *= conj;
            rvec *= phase;
        }
        entries.push((svd.singular_values[idx], lvec, rvec));
    }
    entries.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    let mut form = SchmidtForm {
        coefficients: Vec::with_capacity(k),
        left: Vec::with_capacity(k),
        right: Vec::with_capacity(k),
        left_dims,
        right_dims,
    };
    for (lam, l, r) in entries {
        form.coefficients.push(lam);
        form.left.push(l);
        form.right.push(r);
    }
    Ok(form)
}

/// Euclidean distance ‖u − v‖ and fidelity |⟨u|v⟩|² between two states.
///
/// The distance is phase-sensitive by design; callers wanting the
/// phase-optimized variant can use [`phase_optimized_distance`].
pub fn distance_and_fidelity(u: &StateVector, v: &StateVector) -> Result<(f64, f64)> {
    if u.amplitudes.len() != v.amplitudes.len() {
        return Err(Error::Shape("states live on different total dimensions".into()));
    }
    let diff = &u.amplitudes - &v.amplitudes;
    let overlap = u.amplitudes.dotc(&v.amplitudes);
    Ok((diff.norm(), overlap.norm_sqr()))
}

/// min over global phases φ of ‖u − e^{iφ}v‖ = √(‖u‖² + ‖v‖² − 2|⟨u|v⟩|).
pub fn phase_optimized_distance(u: &StateVector, v: &StateVector) -> Result<f64> {
    if u.amplitudes.len() != v.amplitudes.len() {
        return Err(Error::Shape("states live on different total dimensions".into()));
    }
    let overlap = u.amplitudes.dotc(&v.amplitudes).norm();
    let sq = u.amplitudes.norm_squared() + v.amplitudes.norm_squared() - 2.0 * overlap;
    Ok(sq.max(0.0).sqrt())
}

/// Hermitian matrix sign function: eigenvalues at or above −[`tol::SIGN_ZERO`]
/// map to +1, the rest to −1.  Zero modes therefore land on +1.
pub fn matrix_sign(h: &CMatrix) -> Result<CMatrix> {
    if h.nrows() != h.ncols() {
        return Err(Error::Shape("matrix sign needs a square matrix".into()));
    }
    let (values, vectors) = hermitian_eigen(h);
    let d = h.nrows();
    let mut out = CMatrix::zeros(d, d);
    for k in 0..d {
        let s = if values[k] <= -tol::SIGN_ZERO { -1.0 } else { 1.0 };
        let col = vectors.column(k);
        for i in 0..d {
            for j in 0..d {
                out[(i, j)] += C64::new(s, 0.0) * col[i] * col[j].conj();
            }
        }
    }
    Ok(out)
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
///
/// Implemented as cyclic complex Jacobi rather than nalgebra's
/// `symmetric_eigen`: the latter can return an orthonormal basis that fails
/// `HV = VΛ` outright on complex Hermitian input with degenerate spectrum,
/// which silently corrupts every consumer.  Jacobi costs O(d³) per sweep —
/// immaterial at the dimensions used here — and its accumulated basis is a
/// product of exact unitaries.
pub fn hermitian_eigen(h: &CMatrix) -> (Vec<f64>, CMatrix) {
    let d = h.nrows();
    let mut a = (h + h.adjoint()) * C64::new(0.5, 0.0);
    let mut v = CMatrix::identity(d, d);
    let scale = max_abs(&a).max(f64::MIN_POSITIVE);

    for _sweep in 0..60 {
        let mut off = 0.0f64;
        for p in 0..d {
            for q in (p + 1)..d {
                off += a[(p, q)].norm_sqr();
            }
        }
        if (2.0 * off).sqrt() <= 1e-15 * scale * d as f64 {
            break;
        }
        for p in 0..d {
            for q in (p + 1)..d {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag == 0.0 {
                    continue;
                }
                // Factor the phase out of a_pq, then solve the real 2×2
                // problem: with σ = (a_pp − a_qq)/2|a_pq| the inner rotation
                // tangent is the small root of t² + 2σt − 1 = 0.
                let phase = apq / C64::new(mag, 0.0);
                let sigma = (a[(p, p)].re - a[(q, q)].re) / (2.0 * mag);
                let t = if sigma >= 0.0 {
                    1.0 / (sigma + (1.0 + sigma * sigma).sqrt())
                } else {
                    -1.0 / (-sigma + (1.0 + sigma * sigma).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // 2×2 unitary U = [[c, −s], [e^{−iβ}s, e^{−iβ}c]] on the
                // (p,q) plane, β the phase of a_pq; update A ← U†AU, V ← VU.
                let cp = C64::new(c, 0.0);
                let sp = C64::new(s, 0.0);
                let pb = phase.conj();
                for i in 0..d {
                    let (ap, aq) = (a[(i, p)], a[(i, q)]);
                    a[(i, p)] = cp * ap + sp * pb * aq;
                    a[(i, q)] = -sp * ap + cp * pb * aq;
                    let (vp, vq) = (v[(i, p)], v[(i, q)]);
                    v[(i, p)] = cp * vp + sp * pb * vq;
                    v[(i, q)] = -sp * vp + cp * pb * vq;
                }
                for j in 0..d {
                    let (ap, aq) = (a[(p, j)], a[(q, j)]);
                    a[(p, j)] = cp * ap + sp * phase * aq;
                    a[(q, j)] = -sp * ap + cp * phase * aq;
                }
                a[(p, q)] = C64::new(0.0, 0.0);
                a[(q, p)] = C64::new(0.0, 0.0);
                a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
            }
        }
    }

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.partial_cmp(&a[(j, j)].re).unwrap());
    let values: Vec<f64> = order.iter().map(|&k| a[(k, k)].re).collect();
    let mut vectors = CMatrix::zeros(d, d);
    for (new, &old) in order.iter().enumerate() {
        vectors.set_column(new, &v.column(old));
    }
    (values, vectors)
}

/// Seeded standard complex Gaussian.
fn gaussian_c64<R: Rng>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im)
}

/// Haar-random unitary from the QR decomposition of a complex Ginibre matrix,
/// with the R diagonal's phases folded into Q so the distribution is uniform.
pub fn random_unitary<R: Rng>(dim: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(dim, dim, |_, _| gaussian_c64(rng));
    let qr = g.qr();
    let q = qr.q();
    let r = qr.r();
    let mut u = q;
    for j in 0..dim {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 1e-300 { rjj / C64::new(rjj.norm(), 0.0) } else { C64::new(1.0, 0.0) };
        for i in 0..dim {
            u[(i, j)] *= phase;
        }
    }
    u
}

/// Seeded random unit vector on the given subsystem dimensions.
pub fn random_state<R: Rng>(dims: &[usize], rng: &mut R) -> StateVector {
    let n: usize = dims.iter().product();
    let amps = CVector::from_fn(n, |_, _| gaussian_c64(rng));
    let norm = amps.norm();
    StateVector {
        amplitudes: amps / C64::new(norm, 0.0),
        dims: dims.to_vec(),
    }
}

/// Deterministic RNG used by every seeded operation in the crate.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Embeds a two-party realization into larger local spaces.
///
/// Each party is tensored with a junk register of the requested dimension
/// (initialized to |0⟩) and the enlarged spaces are scrambled by seeded Haar
/// unitaries (Alice's drawn first).  Correlations, and hence the Bell value,
/// are preserved exactly.  Junk dimensions of 1 leave the realization
/// untouched.
pub fn inflate_with_junk(
    r: &Realization,
    junk_dims: (usize, usize),
    seed: u64,
) -> Result<Realization> {
    let (ja, jb) = junk_dims;
    if ja == 0 || jb == 0 {
        return Err(Error::Shape("junk dimensions must be at least 1".into()));
    }
    if ja == 1 && jb == 1 {
        return Ok(r.clone());
    }
    let (da, db) = (r.state.dims[0], r.state.dims[1]);
    let mut rng = seeded_rng(seed);
    let ua = random_unitary(da * ja, &mut rng);
    let ub = random_unitary(db * jb, &mut rng);

    // (A, B) ⊗ |0⟩_jA ⊗ |0⟩_jB, reordered to (A, jA, B, jB), then each party
    // merged with its junk register.
    let junk = StateVector::basis(&[ja, jb], &[0, 0])?;
    let full = r.state.tensor(&junk); // dims [dA, dB, jA, jB]
    let grouped = full
        .permute_subsystems(&[0, 2, 1, 3])?
        .regroup(vec![da * ja, db * jb])?;
    let state = grouped.apply_on(0, &ua)?.apply_on(1, &ub)?;

    let lift = |obs: &Observable, junk_dim: usize, u: &CMatrix| -> Result<Observable> {
        let inflated = kron(&obs.matrix, &CMatrix::identity(junk_dim, junk_dim));
        Observable::new(u * inflated * u.adjoint())
    };
    let alice = r
        .alice
        .iter()
        .map(|o| lift(o, ja, &ua))
        .collect::<Result<Vec<_>>>()?;
    let bob = r
        .bob
        .iter()
        .map(|o| lift(o, jb, &ub))
        .collect::<Result<Vec<_>>>()?;
    Realization::new(state, alice, bob)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn pauli_z() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)])
    }

    fn pauli_x() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)])
    }

    #[test]
    fn tensor_of_identities_is_identity() {
        let i2 = Tensor::Matrix(CMatrix::identity(2, 2));
        let out = tensor_product(&i2, &i2).unwrap();
        match out {
            Tensor::Matrix(m) => assert_eq!(m, CMatrix::identity(4, 4)),
            _ => panic!("expected a matrix"),
        }
    }

    #[test]
    fn tensor_of_basis_vectors() {
        let e0 = Tensor::Vector(CVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]));
        let e1 = Tensor::Vector(CVector::from_vec(vec![c(0.0, 0.0), c(1.0, 0.0)]));
        match tensor_product(&e0, &e1).unwrap() {
            Tensor::Vector(v) => {
                let expect = CVector::from_vec(vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
                assert_eq!(v, expect);
            }
            _ => panic!("expected a vector"),
        }
    }

    #[test]
    fn mixed_tensor_operands_are_rejected() {
        let m = Tensor::Matrix(CMatrix::identity(2, 2));
        let v = Tensor::Vector(CVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]));
        assert!(matches!(tensor_product(&m, &v), Err(Error::Shape(_))));
        assert!(matches!(tensor_product(&v, &m), Err(Error::Shape(_))));
    }

    #[test]
    fn z_tensor_z_fixes_phi_plus() {
        let inv = 1.0 / 2.0f64.sqrt();
        let phi = StateVector::new(
            CVector::from_vec(vec![c(inv, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(inv, 0.0)]),
            vec![2, 2],
        )
        .unwrap();
        let zz = kron(&pauli_z(), &pauli_z());
        let out = phi.expectation(&zz).unwrap();
        assert!((out - c(1.0, 0.0)).norm() < 1e-14);
        let applied = phi.apply_on(0, &pauli_z()).unwrap().apply_on(1, &pauli_z()).unwrap();
        let (dist, fid) = distance_and_fidelity(&applied, &phi).unwrap();
        assert!(dist < 1e-14);
        assert!((fid - 1.0).abs() < 1e-14);
    }

    #[test]
    fn schmidt_of_phi_plus() {
        let inv = 1.0 / 2.0f64.sqrt();
        let phi = StateVector::new(
            CVector::from_vec(vec![c(inv, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(inv, 0.0)]),
            vec![2, 2],
        )
        .unwrap();
        let form = schmidt_decompose(&phi, 1).unwrap();
        assert!((form.coefficients[0] - inv).abs() < 1e-12);
        assert!((form.coefficients[1] - inv).abs() < 1e-12);
    }

    #[test]
    fn schmidt_of_tilted_state() {
        let theta = std::f64::consts::PI / 8.0;
        let psi = StateVector::new(
            CVector::from_vec(vec![
                c(theta.cos(), 0.0),
                c(0.0, 0.0),
                c(0.0, 0.0),
                c(theta.sin(), 0.0),
            ]),
            vec![2, 2],
        )
        .unwrap();
        let form = schmidt_decompose(&psi, 1).unwrap();
        assert!((form.coefficients[0] - theta.cos()).abs() < 1e-12);
        assert!((form.coefficients[1] - theta.sin()).abs() < 1e-12);
    }

    #[test]
    fn schmidt_reassembles_random_states() {
        let mut rng = seeded_rng(7);
        for _ in 0..200 {
            let psi = random_state(&[3, 3], &mut rng);
            let form = schmidt_decompose(&psi, 1).unwrap();
            let back = form.reconstruct();
            let (dist, _) = distance_and_fidelity(&back, &psi).unwrap();
            assert!(dist < 1e-10, "reassembly distance {dist}");
            let sq: f64 = form.coefficients.iter().map(|l| l * l).sum();
            assert!((sq - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn schmidt_rejects_bad_split() {
        let psi = StateVector::basis(&[2, 2], &[0, 0]).unwrap();
        assert!(schmidt_decompose(&psi, 0).is_err());
        assert!(schmidt_decompose(&psi, 2).is_err());
    }

    #[test]
    fn distance_and_fidelity_cases() {
        let u = StateVector::basis(&[4], &[0]).unwrap();
        let v = StateVector::basis(&[4], &[1]).unwrap();
        let (d0, f0) = distance_and_fidelity(&u, &u).unwrap();
        assert!(d0 < 1e-15 && (f0 - 1.0).abs() < 1e-15);
        let (d1, f1) = distance_and_fidelity(&u, &v).unwrap();
        assert!((d1 - 2.0f64.sqrt()).abs() < 1e-15 && f1 < 1e-15);

        // A global phase moves the plain distance but not the fidelity:
        // ‖u − e^{iπ/3}u‖ = |1 − e^{iπ/3}| = 1.
        let phase = C64::from_polar(1.0, std::f64::consts::PI / 3.0);
        let w = StateVector::new(u.amplitudes.clone() * phase, vec![4]).unwrap();
        let (d2, f2) = distance_and_fidelity(&u, &w).unwrap();
        assert!((d2 - 1.0).abs() < 1e-14);
        assert!((f2 - 1.0).abs() < 1e-14);
        assert!(phase_optimized_distance(&u, &w).unwrap() < 1e-7);

        let bad = StateVector::basis(&[3], &[0]).unwrap();
        assert!(distance_and_fidelity(&u, &bad).is_err());
    }

    #[test]
    fn dichotomy_checks() {
        let z = Observable::new(pauli_z()).unwrap();
        assert!(check_dichotomic(&z, tol::STRUCTURAL));
        let half = Observable::new(pauli_z() * c(0.5, 0.0)).unwrap();
        assert!(!check_dichotomic(&half, tol::STRUCTURAL));
        assert!(Observable::dichotomic(pauli_z() * c(0.5, 0.0)).is_err());
    }

    #[test]
    fn matrix_sign_conventions() {
        // All-zero raw operator: every eigenvalue is a zero mode, so the sign
        // collapses to the identity.
        let zero = CMatrix::zeros(3, 3);
        let s = matrix_sign(&zero).unwrap();
        assert!(max_abs(&(s - CMatrix::identity(3, 3))) < 1e-12);

        let m = CMatrix::from_row_slice(
            2,
            2,
            &[c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-3.0, 0.0)],
        );
        let s = matrix_sign(&m).unwrap();
        assert!(max_abs(&(s - pauli_z())) < 1e-12);
    }

    #[test]
    fn hermitian_eigen_handles_degenerate_complex_spectra() {
        // Conjugated involutions have fourfold-degenerate ±1 eigenvalues; a
        // correct decomposition must reproduce them and stay unitary.  Seeds
        // cover the regime where nalgebra's own complex solver returns
        // orthonormal vectors with `‖HV − VΛ‖ = O(1)`.
        let mut rng = seeded_rng(77);
        for d in [4usize, 8, 12] {
            for _ in 0..20 {
                let u = random_unitary(d, &mut rng);
                let mut diag = CMatrix::zeros(d, d);
                for k in 0..d {
                    diag[(k, k)] = c(if k % 2 == 0 { 1.0 } else { -1.0 }, 0.0);
                }
                let h = &u * diag * u.adjoint();
                let (values, vectors) = hermitian_eigen(&h);
                let unit = max_abs(&(vectors.adjoint() * &vectors - CMatrix::identity(d, d)));
                assert!(unit < 1e-12, "eigenbasis not unitary: {unit:.3e}");
                let mut lam = CMatrix::zeros(d, d);
                for k in 0..d {
                    lam[(k, k)] = c(values[k], 0.0);
                    let expect = if k < d / 2 { -1.0 } else { 1.0 };
                    assert!((values[k] - expect).abs() < 1e-12);
                }
                let resid = max_abs(&(&h * &vectors - &vectors * lam));
                assert!(resid < 1e-12, "HV − VΛ = {resid:.3e}");

                // The sign of an exact involution is the involution itself.
                let s = matrix_sign(&h).unwrap();
                assert!(max_abs(&(&s - &h)) < 1e-12);
            }
        }
    }

    #[test]
    fn random_unitary_is_unitary_and_deterministic() {
        let mut rng = seeded_rng(42);
        let u = random_unitary(5, &mut rng);
        let res = max_abs(&(&u * u.adjoint() - CMatrix::identity(5, 5)));
        assert!(res < 1e-12, "unitarity residual {res}");
        let mut rng2 = seeded_rng(42);
        let u2 = random_unitary(5, &mut rng2);
        assert_eq!(u, u2);
    }

    #[test]
    fn apply_on_matches_full_kronecker() {
        let mut rng = seeded_rng(3);
        let psi = random_state(&[2, 3], &mut rng);
        let op = {
            let g = CMatrix::from_fn(3, 3, |_, _| {
                c(
                    rand::Rng::gen::<f64>(&mut rng) - 0.5,
                    rand::Rng::gen::<f64>(&mut rng) - 0.5,
                )
            });
            &g + g.adjoint()
        };
        let via_sub = psi.apply_on(1, &op).unwrap();
        let full = kron(&CMatrix::identity(2, 2), &op);
        let direct = CVector::from_vec((full * &psi.amplitudes).iter().cloned().collect::<Vec<_>>());
        assert!((via_sub.amplitudes - direct).norm() < 1e-12);
    }

    #[test]
    fn controlled_apply_matches_block_action() {
        let mut rng = seeded_rng(9);
        let psi = random_state(&[2, 2], &mut rng);
        let x = pauli_x();
        let id = CMatrix::identity(2, 2);
        // Control on factor 0, target factor 1 — a CNOT.
        let out = psi.controlled_apply(0, 1, &[id.clone(), x.clone()]).unwrap();
        let cnot = {
            let mut m = CMatrix::zeros(4, 4);
            m[(0, 0)] = c(1.0, 0.0);
            m[(1, 1)] = c(1.0, 0.0);
            m[(2, 3)] = c(1.0, 0.0);
            m[(3, 2)] = c(1.0, 0.0);
            m
        };
        let direct = &cnot * &psi.amplitudes;
        assert!((out.amplitudes - direct).norm() < 1e-14);
    }

    #[test]
    fn permute_subsystems_roundtrip() {
        let mut rng = seeded_rng(11);
        let psi = random_state(&[2, 3, 4], &mut rng);
        let perm = psi.permute_subsystems(&[2, 0, 1]).unwrap();
        assert_eq!(perm.dims, vec![4, 2, 3]);
        let back = perm.permute_subsystems(&[1, 2, 0]).unwrap();
        let (dist, _) = distance_and_fidelity(&back, &psi).unwrap();
        assert!(dist < 1e-15);
    }

    proptest! {
        #[test]
        fn norm_identity_holds(seed in 0u64..5000) {
            let mut rng = seeded_rng(seed);
            let u = random_state(&[4], &mut rng);
            let v = random_state(&[4], &mut rng);
            let (dist, _) = distance_and_fidelity(&u, &v).unwrap();
            let re = u.inner(&v).unwrap().re;
            let expect = (2.0 - 2.0 * re).max(0.0).sqrt();
            prop_assert!((dist - expect).abs() < 1e-10);
        }

        #[test]
        fn tensor_product_is_associative(seed in 0u64..2000) {
            let mut rng = seeded_rng(seed);
            let m = |rng: &mut ChaCha8Rng| CMatrix::from_fn(2, 2, |_, _| gaussian_c64(rng));
            let (a, b, cm) = (m(&mut rng), m(&mut rng), m(&mut rng));
            let left = kron(&kron(&a, &b), &cm);
            let right = kron(&a, &kron(&b, &cm));
            prop_assert!(max_abs(&(left - right)) < 1e-12);
        }
    }
}
