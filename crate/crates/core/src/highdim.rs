//! Correlation-table self-test of maximally entangled states of even local
//! dimension.
//!
//! Both parties measure in three bases: the computational basis, a basis
//! rotated inside the "pair" blocks `(2m, 2m+1)`, and a basis rotated inside
//! the "shifted" blocks `(2n+1, 2n+2 mod d)`.  The resulting table of joint
//! probabilities has a rigid block pattern whose entries are squared cosines
//! and sines of the rotation angles; the pattern alone pins down the state
//! `Σᵢ|ii⟩/√d` and the measurements up to local isometry.
//!
//! The verifier side reconstructs the angles from a table
//! ([`verify_block_structure`]), rebuilds block observables and flip
//! operators from the measurement projectors, checks the algebraic
//! identities a faithful realization must satisfy, and runs a qudit swap
//! circuit ([`highdim_swap_circuit`]) that pulls the entangled pair into a
//! fresh pair of d-level ancillas.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qalg::{
    distance_and_fidelity, kron, max_abs, random_unitary, seeded_rng, ProjectorFamily, StateVector,
};
use crate::{tol, C64, CMatrix, CVector};

/// Rotation angles for the four structured measurement bases.
///
/// `theta[m]`/`phi[m]` rotate Bob's/Alice's second basis inside pair block
/// `(2m, 2m+1)`; `theta_shift[n]`/`phi_shift[n]` rotate the third basis
/// inside shifted block `(2n+1, 2n+2 mod d)`.  All lists have length `d/2`.
/// The observable-level mixing angle of each block is twice the rotation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngleLists {
    pub theta: Vec<f64>,
    pub phi: Vec<f64>,
    pub theta_shift: Vec<f64>,
    pub phi_shift: Vec<f64>,
}

impl AngleLists {
    /// Validates list lengths and keeps every rotation away from the block
    /// degeneracies at 0 and π/2 (where a rotated basis coincides with the
    /// computational one and the flip operators lose their denominator).
    pub fn new(
        d: usize,
        theta: Vec<f64>,
        phi: Vec<f64>,
        theta_shift: Vec<f64>,
        phi_shift: Vec<f64>,
    ) -> Result<Self> {
        check_even_dimension(d)?;
        let half = d / 2;
        for (name, list) in [
            ("theta", &theta),
            ("phi", &phi),
            ("theta_shift", &theta_shift),
            ("phi_shift", &phi_shift),
        ] {
            if list.len() != half {
                return Err(Error::InvalidInput(format!(
                    "{name} needs {half} angles for d = {d}, got {}",
                    list.len()
                )));
            }
            for &a in list.iter() {
                if !(0.0..=std::f64::consts::FRAC_PI_2).contains(&a)
                    || (2.0 * a).sin().abs() < tol::ANGLE_CUTOFF
                {
                    return Err(Error::InvalidInput(format!(
                        "{name} angle {a} outside (0, π/2) or too close to a degeneracy"
                    )));
                }
            }
        }
        Ok(AngleLists { theta, phi, theta_shift, phi_shift })
    }

    /// π/4 rotations for the B-side bases, π/8 for the A-side.
    pub fn defaults(d: usize) -> Result<Self> {
        check_even_dimension(d)?;
        let half = d / 2;
        AngleLists::new(
            d,
            vec![std::f64::consts::FRAC_PI_4; half],
            vec![std::f64::consts::PI / 8.0; half],
            vec![std::f64::consts::FRAC_PI_4; half],
            vec![std::f64::consts::PI / 8.0; half],
        )
    }
}

fn check_even_dimension(d: usize) -> Result<()> {
    if d < 2 || d % 2 != 0 {
        return Err(Error::OddDimension { d });
    }
    Ok(())
}

/// Pair blocks `(2m, 2m+1)`.
fn pair_blocks(d: usize) -> Vec<(usize, usize)> {
    (0..d / 2).map(|m| (2 * m, 2 * m + 1)).collect()
}

/// Shifted blocks `(2n+1, 2n+2 mod d)`; the last wraps around to 0.
fn shifted_blocks(d: usize) -> Vec<(usize, usize)> {
    (0..d / 2).map(|n| (2 * n + 1, (2 * n + 2) % d)).collect()
}

/// A bipartite state with three projective measurements per party.
#[derive(Debug, Clone)]
pub struct QuditRealization {
    /// Bipartite state, dims `[dA, dB]`.
    pub state: StateVector,
    /// Alice's measurements `[A0, A1, A2]`, each a complete projector family.
    pub alice: Vec<ProjectorFamily>,
    /// Bob's measurements `[B0, B1, B2]`.
    pub bob: Vec<ProjectorFamily>,
}

impl QuditRealization {
    /// Validates shapes: three complete families per party, matching outcome
    /// counts, projector dimensions matching the state.
    pub fn new(
        state: StateVector,
        alice: Vec<ProjectorFamily>,
        bob: Vec<ProjectorFamily>,
    ) -> Result<Self> {
        if state.dims.len() != 2 {
            return Err(Error::Shape(format!(
                "qudit realization state must be bipartite, got dims {:?}",
                state.dims
            )));
        }
        if alice.len() != 3 || bob.len() != 3 {
            return Err(Error::Shape("need exactly three measurements per party".into()));
        }
        let outcomes = alice[0].len();
        for (fams, dim) in [(&alice, state.dims[0]), (&bob, state.dims[1])] {
            for f in fams.iter() {
                if f.dim() != dim {
                    return Err(Error::Shape(format!(
                        "projector dimension {} does not match party dimension {dim}",
                        f.dim()
                    )));
                }
                if f.len() != outcomes {
                    return Err(Error::Shape(format!(
                        "measurements disagree on outcome count ({} vs {outcomes})",
                        f.len()
                    )));
                }
            }
        }
        check_even_dimension(outcomes)?;
        Ok(QuditRealization { state, alice, bob })
    }

    /// Number of outcomes per measurement (the certified dimension d).
    pub fn outcomes(&self) -> usize {
        self.alice[0].len()
    }

    /// Party dimensions `(dA, dB)`.
    pub fn dims(&self) -> (usize, usize) {
        (self.state.dims[0], self.state.dims[1])
    }
}

/// Rank-one family rotating each `block = (p, q)` by its angle:
/// `v_p = cos t·e_p + sin t·e_q`, `v_q = −sin t·e_p + cos t·e_q`.
fn rotated_family(d: usize, blocks: &[(usize, usize)], angles: &[f64]) -> Result<ProjectorFamily> {
    let mut vectors = vec![CVector::zeros(d); d];
    for (&(p, q), &t) in blocks.iter().zip(angles.iter()) {
        let (c, s) = (C64::new(t.cos(), 0.0), C64::new(t.sin(), 0.0));
        let mut vp = CVector::zeros(d);
        vp[p] = c;
        vp[q] = s;
        let mut vq = CVector::zeros(d);
        vq[p] = -s;
        vq[q] = c;
        vectors[p] = vp;
        vectors[q] = vq;
    }
    ProjectorFamily::new(vectors.iter().map(|v| v * v.adjoint()).collect())
}

/// The reference realization: state `Σᵢ|ii⟩/√d`, computational first bases,
/// pair-rotated second bases, shift-rotated third bases.
pub fn highdim_ideal_realization(d: usize, angles: &AngleLists) -> Result<QuditRealization> {
    check_even_dimension(d)?;
    if angles.theta.len() != d / 2 {
        return Err(Error::InvalidInput(format!(
            "angle lists are sized for d = {}, not d = {d}",
            2 * angles.theta.len()
        )));
    }
    let mut amplitudes = CVector::zeros(d * d);
    let w = C64::new(1.0 / (d as f64).sqrt(), 0.0);
    for i in 0..d {
        amplitudes[i * d + i] = w;
    }
    let state = StateVector::new(amplitudes, vec![d, d])?;

    let computational = ProjectorFamily::new(
        (0..d)
            .map(|i| {
                let mut e = CVector::zeros(d);
                e[i] = C64::new(1.0, 0.0);
                &e * e.adjoint()
            })
            .collect(),
    )?;
    let pair = pair_blocks(d);
    let shift = shifted_blocks(d);
    let alice = vec![
        computational.clone(),
        rotated_family(d, &pair, &angles.phi)?,
        rotated_family(d, &shift, &angles.phi_shift)?,
    ];
    let bob = vec![
        computational,
        rotated_family(d, &pair, &angles.theta)?,
        rotated_family(d, &shift, &angles.theta_shift)?,
    ];
    QuditRealization::new(state, alice, bob)
}

/// Joint outcome probabilities for all nine basis pairs, flattened as
/// `probabilities[((x·3 + y)·d + a)·d + b] = p(a, b | x, y)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationTable {
    pub d: usize,
    pub probabilities: Vec<f64>,
}

impl CorrelationTable {
    /// `p(a, b | x, y)`.
    pub fn get(&self, x: usize, y: usize, a: usize, b: usize) -> f64 {
        self.probabilities[((x * 3 + y) * self.d + a) * self.d + b]
    }

    /// All entries as `(x, y, a, b, p)` rows in lexicographic order.
    pub fn rows(&self) -> Vec<(usize, usize, usize, usize, f64)> {
        let mut out = Vec::with_capacity(9 * self.d * self.d);
        for x in 0..3 {
            for y in 0..3 {
                for a in 0..self.d {
                    for b in 0..self.d {
                        out.push((x, y, a, b, self.get(x, y, a, b)));
                    }
                }
            }
        }
        out
    }

    /// Validates shape, entry range, and per-pair normalization.
    pub fn validate(&self) -> Result<()> {
        check_even_dimension(self.d)?;
        if self.probabilities.len() != 9 * self.d * self.d {
            return Err(Error::Shape(format!(
                "table needs {} entries for d = {}, got {}",
                9 * self.d * self.d,
                self.d,
                self.probabilities.len()
            )));
        }
        for &p in &self.probabilities {
            if !(-tol::STRUCTURAL..=1.0 + tol::STRUCTURAL).contains(&p) {
                return Err(Error::InvalidInput(format!("probability {p} outside [0, 1]")));
            }
        }
        for x in 0..3 {
            for y in 0..3 {
                let total: f64 = (0..self.d)
                    .flat_map(|a| (0..self.d).map(move |b| (a, b)))
                    .map(|(a, b)| self.get(x, y, a, b))
                    .sum();
                if (total - 1.0).abs() > tol::STRUCTURAL {
                    return Err(Error::InvalidInput(format!(
                        "p(·,·|{x},{y}) sums to {total}, not 1"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Evaluates `p(a, b | x, y) = ⟨ψ| P^x_a ⊗ Q^y_b |ψ⟩` for all pairs.
pub fn correlation_table(r: &QuditRealization) -> Result<CorrelationTable> {
    let d = r.outcomes();
    let (da, db) = r.dims();
    let eye_a = CMatrix::identity(da, da);
    let eye_b = CMatrix::identity(db, db);
    let mut probabilities = vec![0.0; 9 * d * d];
    for (x, fam_a) in r.alice.iter().enumerate() {
        // Cache the half-applied state per Alice outcome.
        let halves: Vec<CVector> = fam_a
            .projectors
            .iter()
            .map(|p| kron(p, &eye_b) * &r.state.amplitudes)
            .collect();
        for (y, fam_b) in r.bob.iter().enumerate() {
            for (a, half) in halves.iter().enumerate() {
                for (b, q) in fam_b.projectors.iter().enumerate() {
                    let full = kron(&eye_a, q) * half;
                    let p = half.dotc(&full).re;
                    probabilities[((x * 3 + y) * d + a) * d + b] = p.max(0.0);
                }
            }
        }
    }
    let table = CorrelationTable { d, probabilities };
    table.validate()?;
    Ok(table)
}

/// What the verifier reads off a correlation table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StructureReport {
    pub d: usize,
    /// Worst `|p(a,b|0,0) − δ_ab/d|`.
    pub diag_residual: f64,
    /// Probability mass outside the pair blocks for `(x,y)` in
    /// `{(0,1),(1,0),(1,1)}`.
    pub pair_support_residual: f64,
    /// Mass outside the shifted blocks for `{(0,2),(2,0),(2,2)}`.
    pub shift_support_residual: f64,
    /// Worst deviation from the cos²/sin² pattern rebuilt from the recovered
    /// angles, over the seven structured basis pairs.
    pub pattern_residual: f64,
    /// Table entry `(x, y, a, b)` realizing `pattern_residual`.
    pub worst_entry: (usize, usize, usize, usize),
    /// Whether `(A1,B1)` fits `cos²(θ−φ)` (same-handed rotations) rather
    /// than `cos²(θ+φ)`.
    pub same_handed_pair: bool,
    /// The analogous orientation for the shifted bases.
    pub same_handed_shift: bool,
    /// Rotation angles recovered from the table, all in (0, π/2).
    pub recovered: AngleLists,
}

/// Reads the block pattern off a table: checks the `δ_ab/d` diagonal, the
/// block supports, recovers every rotation angle, and measures how well the
/// cos²/sin² pattern at the recovered angles explains the table.
pub fn verify_block_structure(table: &CorrelationTable) -> Result<StructureReport> {
    table.validate()?;
    let d = table.d;
    let inv_d = 1.0 / d as f64;
    let pair = pair_blocks(d);
    let shift = shifted_blocks(d);

    let mut diag_residual: f64 = 0.0;
    for a in 0..d {
        for b in 0..d {
            let expect = if a == b { inv_d } else { 0.0 };
            diag_residual = diag_residual.max((table.get(0, 0, a, b) - expect).abs());
        }
    }

    let in_same_block = |blocks: &[(usize, usize)], a: usize, b: usize| {
        blocks.iter().any(|&(p, q)| {
            (a == p || a == q) && (b == p || b == q)
        })
    };
    let support = |xs: &[(usize, usize)], blocks: &[(usize, usize)]| -> f64 {
        let mut worst: f64 = 0.0;
        for &(x, y) in xs {
            for a in 0..d {
                for b in 0..d {
                    if !in_same_block(blocks, a, b) {
                        worst = worst.max(table.get(x, y, a, b));
                    }
                }
            }
        }
        worst
    };
    let pair_support_residual = support(&[(0, 1), (1, 0), (1, 1)], &pair);
    let shift_support_residual = support(&[(0, 2), (2, 0), (2, 2)], &shift);

    // Angle recovery: tan² of the rotation is the off-diagonal / diagonal
    // block ratio in the half-rotated pairs.
    let recover = |x: usize, y: usize, blocks: &[(usize, usize)], b_side: bool| -> Vec<f64> {
        blocks
            .iter()
            .map(|&(p, q)| {
                let (diag, off) = if b_side {
                    (table.get(x, y, p, p), table.get(x, y, p, q))
                } else {
                    (table.get(x, y, p, p), table.get(x, y, q, p))
                };
                f64::atan2(off.max(0.0).sqrt(), diag.max(0.0).sqrt())
            })
            .collect()
    };
    let theta = recover(0, 1, &pair, true);
    let phi = recover(1, 0, &pair, false);
    let theta_shift = recover(0, 2, &shift, true);
    let phi_shift = recover(2, 0, &shift, false);

    // Block pattern at angles (rotA, rotB) inside `block`, as seen from the
    // table convention p(a,b) = |⟨u_a | v_b⟩|²/d.
    let block_pattern = |rot_a: f64, rot_b: f64, p_fast: bool| -> [[f64; 2]; 2] {
        let delta = if p_fast { rot_b - rot_a } else { rot_b + rot_a };
        let (c2, s2) = (delta.cos().powi(2) * inv_d, delta.sin().powi(2) * inv_d);
        [[c2, s2], [s2, c2]]
    };

    // Handedness: does (A1,B1) look like cos²(θ−φ) or cos²(θ+φ)?
    let handedness = |x: usize, y: usize, blocks: &[(usize, usize)], rot_a: &[f64], rot_b: &[f64]| {
        let mut same = 0.0;
        let mut opposite = 0.0;
        for (k, &(p, _)) in blocks.iter().enumerate() {
            let got = table.get(x, y, p, p);
            same += (got - (rot_b[k] - rot_a[k]).cos().powi(2) * inv_d).abs();
            opposite += (got - (rot_b[k] + rot_a[k]).cos().powi(2) * inv_d).abs();
        }
        same <= opposite
    };
    let same_handed_pair = handedness(1, 1, &pair, &phi, &theta);
    let same_handed_shift = handedness(2, 2, &shift, &phi_shift, &theta_shift);

    // Residual of the whole pattern across the seven structured pairs.
    let zero = vec![0.0; d / 2];
    let checks: [(usize, usize, &[(usize, usize)], &[f64], &[f64], bool); 7] = [
        (0, 0, &pair, &zero, &zero, true),
        (0, 1, &pair, &zero, &theta, true),
        (1, 0, &pair, &phi, &zero, true),
        (1, 1, &pair, &phi, &theta, same_handed_pair),
        (0, 2, &shift, &zero, &theta_shift, true),
        (2, 0, &shift, &phi_shift, &zero, true),
        (2, 2, &shift, &phi_shift, &theta_shift, same_handed_shift),
    ];
    let mut pattern_residual: f64 = 0.0;
    let mut worst_entry = (0, 0, 0, 0);
    for (x, y, blocks, rot_a, rot_b, same_handed) in checks {
        let mut expect = vec![vec![0.0; d]; d];
        for (k, &(p, q)) in blocks.iter().enumerate() {
            let pat = block_pattern(rot_a[k], rot_b[k], same_handed);
            expect[p][p] = pat[0][0];
            expect[p][q] = pat[0][1];
            expect[q][p] = pat[1][0];
            expect[q][q] = pat[1][1];
        }
        for a in 0..d {
            for b in 0..d {
                let dev = (table.get(x, y, a, b) - expect[a][b]).abs();
                if dev > pattern_residual {
                    pattern_residual = dev;
                    worst_entry = (x, y, a, b);
                }
            }
        }
    }

    Ok(StructureReport {
        d,
        diag_residual,
        pair_support_residual,
        shift_support_residual,
        pattern_residual,
        worst_entry,
        same_handed_pair,
        same_handed_shift,
        recovered: AngleLists { theta, phi, theta_shift, phi_shift },
    })
}

/// Block observables one party derives from its projector families.
#[derive(Debug, Clone)]
pub struct PartyBlocks {
    /// `Π^0_p − Π^0_q` per pair block (Z-like).
    pub pair_z: Vec<CMatrix>,
    /// `Π^1_p − Π^1_q` per pair block (rotated).
    pub pair_rot: Vec<CMatrix>,
    /// `Π^0_p + Π^0_q` per pair block.
    pub pair_id: Vec<CMatrix>,
    /// Z-like on shifted blocks, from measurement 0.
    pub shift_z: Vec<CMatrix>,
    /// Rotated on shifted blocks, from measurement 2.
    pub shift_rot: Vec<CMatrix>,
    /// Block identities on shifted blocks.
    pub shift_id: Vec<CMatrix>,
}

/// Both parties' block observables.
#[derive(Debug, Clone)]
pub struct BlockOperators {
    pub alice: PartyBlocks,
    pub bob: PartyBlocks,
}

/// Residual norms of the identities a faithful realization satisfies
/// exactly; each field is the worst case over parties and blocks.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct IdentityResiduals {
    /// `‖(P^0_i ⊗ I − I ⊗ Q^0_i)ψ‖`.
    pub projector_transfer: f64,
    /// `|‖z ψ‖ − √(2/d)|` for every block-Z.
    pub block_z_norm: f64,
    /// `|‖(rot − cos(2t)·z)ψ‖ − sin(2t)·√(2/d)|`.
    pub block_x_norm: f64,
    /// `|⟨z ψ, (rot − cos(2t)·z)ψ⟩|`.
    pub block_orthogonality: f64,
    /// `‖({z, rot} − 2cos(2t)·id)ψ‖`.
    pub block_anticommutator: f64,
    /// `‖(z_A ⊗ I − I ⊗ z_B)ψ‖` per block.
    pub block_z_transfer: f64,
}

fn on_alice(m: &CMatrix, db: usize) -> CMatrix {
    kron(m, &CMatrix::identity(db, db))
}

fn on_bob(m: &CMatrix, da: usize) -> CMatrix {
    kron(&CMatrix::identity(da, da), m)
}

fn party_blocks(fams: &[ProjectorFamily], d: usize) -> PartyBlocks {
    let block_ops = |fam: &ProjectorFamily, blocks: &[(usize, usize)]| -> (Vec<CMatrix>, Vec<CMatrix>) {
        let mut diff = Vec::new();
        let mut sum = Vec::new();
        for &(p, q) in blocks {
            diff.push(&fam.projectors[p] - &fam.projectors[q]);
            sum.push(&fam.projectors[p] + &fam.projectors[q]);
        }
        (diff, sum)
    };
    let pair = pair_blocks(d);
    let shift = shifted_blocks(d);
    let (pair_z, pair_id) = block_ops(&fams[0], &pair);
    let (pair_rot, _) = block_ops(&fams[1], &pair);
    let (shift_z, shift_id) = block_ops(&fams[0], &shift);
    let (shift_rot, _) = block_ops(&fams[2], &shift);
    PartyBlocks { pair_z, pair_rot, pair_id, shift_z, shift_rot, shift_id }
}

/// Builds both parties' block observables and evaluates the identity
/// residuals against the realization's state.
pub fn block_operators(
    r: &QuditRealization,
    angles: &AngleLists,
) -> Result<(BlockOperators, IdentityResiduals)> {
    let d = r.outcomes();
    if angles.theta.len() != d / 2 {
        return Err(Error::InvalidInput(format!(
            "angle lists sized for d = {}, realization has d = {d}",
            2 * angles.theta.len()
        )));
    }
    let (da, db) = r.dims();
    let psi = &r.state.amplitudes;
    let blocks = BlockOperators {
        alice: party_blocks(&r.alice, d),
        bob: party_blocks(&r.bob, d),
    };

    let norm_target = (2.0 / d as f64).sqrt();
    let mut res = IdentityResiduals {
        projector_transfer: 0.0,
        block_z_norm: 0.0,
        block_x_norm: 0.0,
        block_orthogonality: 0.0,
        block_anticommutator: 0.0,
        block_z_transfer: 0.0,
    };

    for i in 0..d {
        let lhs = on_alice(&r.alice[0].projectors[i], db) * psi;
        let rhs = on_bob(&r.bob[0].projectors[i], da) * psi;
        res.projector_transfer = res.projector_transfer.max((lhs - rhs).norm());
    }

    // (party blocks, mixing angles per block family, embed closure)
    let mut check_party = |pb: &PartyBlocks, pair_mix: &[f64], shift_mix: &[f64], alice_side: bool| {
        let embed = |m: &CMatrix| if alice_side { on_alice(m, db) } else { on_bob(m, da) };
        let groups = [
            (&pb.pair_z, &pb.pair_rot, &pb.pair_id, pair_mix),
            (&pb.shift_z, &pb.shift_rot, &pb.shift_id, shift_mix),
        ];
        for (zs, rots, ids, mixes) in groups {
            for k in 0..zs.len() {
                let mix = mixes[k];
                let z = embed(&zs[k]);
                let rot = embed(&rots[k]);
                let id = embed(&ids[k]);
                let zpsi = &z * psi;
                let xpsi = &rot * psi - &zpsi * C64::new(mix.cos(), 0.0);
                res.block_z_norm = res.block_z_norm.max((zpsi.norm() - norm_target).abs());
                res.block_x_norm = res
                    .block_x_norm
                    .max((xpsi.norm() - mix.sin().abs() * norm_target).abs());
                res.block_orthogonality = res.block_orthogonality.max(zpsi.dotc(&xpsi).norm());
                let anti = (&z * &rot + &rot * &z - id * C64::new(2.0 * mix.cos(), 0.0)) * psi;
                res.block_anticommutator = res.block_anticommutator.max(anti.norm());
            }
        }
    };
    let mix2 = |list: &[f64]| -> Vec<f64> { list.iter().map(|t| 2.0 * t).collect() };
    check_party(&blocks.alice, &mix2(&angles.phi), &mix2(&angles.phi_shift), true);
    check_party(&blocks.bob, &mix2(&angles.theta), &mix2(&angles.theta_shift), false);

    for (za, zb) in blocks
        .alice
        .pair_z
        .iter()
        .zip(blocks.bob.pair_z.iter())
        .chain(blocks.alice.shift_z.iter().zip(blocks.bob.shift_z.iter()))
    {
        let diff = (on_alice(za, db) - on_bob(zb, da)) * psi;
        res.block_z_transfer = res.block_z_transfer.max(diff.norm());
    }

    Ok((blocks, res))
}

/// Dichotomic flip operators, one per block and party: the block X recovered
/// from `(rot − cos(2t)·z)/sin(2t)`, extended by the identity off the block.
#[derive(Debug, Clone)]
pub struct FlipOperators {
    /// Alice's pair-block flips `X^A_m`.
    pub alice_pair: Vec<CMatrix>,
    /// Alice's shifted-block flips `Y^A_n`.
    pub alice_shift: Vec<CMatrix>,
    /// Bob's pair-block flips `X^B_m`.
    pub bob_pair: Vec<CMatrix>,
    /// Bob's shifted-block flips `Y^B_n`.
    pub bob_shift: Vec<CMatrix>,
}

/// Builds the flips and enforces their defining algebra: each must be an
/// involution fixing the block complement.
pub fn build_flip_operators(
    r: &QuditRealization,
    blocks: &BlockOperators,
    angles: &AngleLists,
) -> Result<FlipOperators> {
    let (da, db) = r.dims();
    let make = |zs: &[CMatrix],
                rots: &[CMatrix],
                ids: &[CMatrix],
                rotations: &[f64],
                dim: usize|
     -> Result<Vec<CMatrix>> {
        let eye = CMatrix::identity(dim, dim);
        zs.iter()
            .zip(rots.iter())
            .zip(ids.iter())
            .zip(rotations.iter())
            .map(|(((z, rot), id), &t)| {
                let mix = 2.0 * t;
                if mix.sin().abs() < tol::ANGLE_CUTOFF {
                    return Err(Error::Degenerate(format!(
                        "flip undefined at rotation {t} (sin of mixing angle vanishes)",
                    )));
                }
                let x_block = (rot - z * C64::new(mix.cos(), 0.0)) * C64::new(1.0 / mix.sin(), 0.0);
                let flip = &x_block + &eye - id;
                let dich = crate::qalg::dichotomy_residual(&flip);
                if dich > tol::STRUCTURAL {
                    return Err(Error::NotDichotomic { residual: dich });
                }
                let fixes = max_abs(&(&flip * (&eye - id) - (&eye - id)));
                if fixes > tol::STRUCTURAL {
                    return Err(Error::identity("flip fixes the block complement", fixes));
                }
                Ok(flip)
            })
            .collect()
    };
    Ok(FlipOperators {
        alice_pair: make(
            &blocks.alice.pair_z,
            &blocks.alice.pair_rot,
            &blocks.alice.pair_id,
            &angles.phi,
            da,
        )?,
        alice_shift: make(
            &blocks.alice.shift_z,
            &blocks.alice.shift_rot,
            &blocks.alice.shift_id,
            &angles.phi_shift,
            da,
        )?,
        bob_pair: make(
            &blocks.bob.pair_z,
            &blocks.bob.pair_rot,
            &blocks.bob.pair_id,
            &angles.theta,
            db,
        )?,
        bob_shift: make(
            &blocks.bob.shift_z,
            &blocks.bob.shift_rot,
            &blocks.bob.shift_id,
            &angles.theta_shift,
            db,
        )?,
    })
}

/// Ladder operators `X^{(i)}` built by alternating pair and shifted flips:
/// `X^{(0)} = I`, `X^{(i)} = X_0 Y_0 X_1 Y_1 …` truncated to `i` factors, so
/// that `X^{(i)}|i⟩ = |0⟩` on a faithful realization.
pub fn composite_flips(pair: &[CMatrix], shift: &[CMatrix], d: usize) -> Vec<CMatrix> {
    let dim = pair[0].nrows();
    let mut out = Vec::with_capacity(d);
    let mut current = CMatrix::identity(dim, dim);
    out.push(current.clone());
    for i in 1..d {
        let factor = if i % 2 == 1 { &pair[i / 2] } else { &shift[i / 2 - 1] };
        current *= factor;
        out.push(current.clone());
    }
    out
}

/// Both parties' ladders.
#[derive(Debug, Clone)]
pub struct CompositeFlips {
    pub alice: Vec<CMatrix>,
    pub bob: Vec<CMatrix>,
}

/// Worst residual of the ladder transfer condition
/// `X_A^{(i)} P_B^{(i)} ψ = (X_B^{(i)})† P_A^{(0)} ψ`.
pub fn ladder_transfer_residual(r: &QuditRealization, flips: &CompositeFlips) -> f64 {
    let d = r.outcomes();
    let (da, db) = r.dims();
    let psi = &r.state.amplitudes;
    let mut worst: f64 = 0.0;
    for i in 0..d {
        let lhs = on_alice(&flips.alice[i], db) * (on_bob(&r.bob[0].projectors[i], da) * psi);
        let rhs = on_bob(&flips.bob[i].adjoint(), da) * (on_alice(&r.alice[0].projectors[0], db) * psi);
        worst = worst.max((lhs - rhs).norm());
    }
    worst
}

/// Discrete Fourier transform matrix `F|k⟩ = Σⱼ ω^{jk}|j⟩/√d`.
fn fourier(d: usize) -> CMatrix {
    let w = 2.0 * std::f64::consts::PI / d as f64;
    let s = 1.0 / (d as f64).sqrt();
    CMatrix::from_fn(d, d, |j, k| C64::from_polar(s, w * (j * k) as f64))
}

/// The qudit swap circuit: Fourier on both d-level ancillas, controlled
/// clock `Z^k` onto each party, inverse Fourier, controlled ladder `X^{(k)}`.
/// The clock is `Z = Σ_a ω^a P^0_a`, unitary whenever the measurement-0
/// family is complete; its unitarity is re-checked here.
pub fn highdim_swap_circuit(
    r: &QuditRealization,
    flips: &CompositeFlips,
) -> Result<StateVector> {
    let d = r.outcomes();
    let (da, db) = r.dims();
    if flips.alice.len() != d || flips.bob.len() != d {
        return Err(Error::Shape(format!("need {d} ladder operators per party")));
    }
    let w = 2.0 * std::f64::consts::PI / d as f64;
    let clock = |fam: &ProjectorFamily, dim: usize| -> Result<Vec<CMatrix>> {
        let mut z = CMatrix::zeros(dim, dim);
        for (a, p) in fam.projectors.iter().enumerate() {
            z += p * C64::from_polar(1.0, w * a as f64);
        }
        let residual = max_abs(&(&z * z.adjoint() - CMatrix::identity(dim, dim)));
        if residual > tol::STRUCTURAL {
            return Err(Error::NotUnitary { residual });
        }
        let mut powers = Vec::with_capacity(d);
        let mut cur = CMatrix::identity(dim, dim);
        for _ in 0..d {
            powers.push(cur.clone());
            cur = &cur * &z;
        }
        Ok(powers)
    };
    let za_powers = clock(&r.alice[0], da)?;
    let zb_powers = clock(&r.bob[0], db)?;

    let anc = StateVector::basis(&[d, d], &[0, 0])?;
    let mut state = r.state.tensor(&anc); // dims [da, db, d, d]
    let f = fourier(d);
    let f_inv = f.adjoint();

    state = state.apply_on(2, &f)?;
    state = state.apply_on(3, &f)?;
    state = state.controlled_apply(2, 0, &za_powers)?;
    state = state.controlled_apply(3, 1, &zb_powers)?;
    state = state.apply_on(2, &f_inv)?;
    state = state.apply_on(3, &f_inv)?;
    state = state.controlled_apply(2, 0, &flips.alice)?;
    state = state.controlled_apply(3, 1, &flips.bob)?;
    Ok(state)
}

/// Full verdict of the high-dimensional pipeline on one realization.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HighdimReport {
    pub d: usize,
    /// Table-level structure and angle recovery.
    pub structure: StructureReport,
    /// Operator identity residuals.
    pub identities: IdentityResiduals,
    /// Worst ladder transfer residual.
    pub ladder_transfer: f64,
    /// Norm of `√d·(P^0_0 ⊗ Q^0_0)ψ` before normalization.
    pub junk_prenorm: f64,
    /// `‖Φψ − ξ ⊗ Σᵢ|ii⟩/√d‖` with the explicit junk candidate ξ.
    pub distance: f64,
    /// Squared overlap with the target.
    pub fidelity: f64,
}

/// Runs the whole pipeline: table, structure verification, block operators,
/// flips, swap circuit, and comparison against `ξ ⊗ Σᵢ|ii⟩/√d` where
/// `ξ ∝ (P^0_0 ⊗ Q^0_0)ψ`.
pub fn highdim_report(r: &QuditRealization, angles: &AngleLists) -> Result<HighdimReport> {
    let d = r.outcomes();
    let table = correlation_table(r)?;
    let structure = verify_block_structure(&table)?;
    let (blocks, identities) = block_operators(r, angles)?;
    let flips = build_flip_operators(r, &blocks, angles)?;
    let composites = CompositeFlips {
        alice: composite_flips(&flips.alice_pair, &flips.alice_shift, d),
        bob: composite_flips(&flips.bob_pair, &flips.bob_shift, d),
    };
    let ladder_transfer = ladder_transfer_residual(r, &composites);
    let swapped = highdim_swap_circuit(r, &composites)?;

    let (da, db) = r.dims();
    let junk_raw = on_alice(&r.alice[0].projectors[0], db)
        * (on_bob(&r.bob[0].projectors[0], da) * &r.state.amplitudes)
        * C64::new((d as f64).sqrt(), 0.0);
    let junk_prenorm = junk_raw.norm();
    if junk_prenorm < tol::ANGLE_CUTOFF {
        return Err(Error::Degenerate(format!(
            "junk candidate (P^0_0 ⊗ Q^0_0)ψ nearly vanishes (norm {junk_prenorm:.3e})"
        )));
    }
    let junk = StateVector::new(junk_raw / C64::new(junk_prenorm, 0.0), vec![da, db])?;

    let mut target_anc = CVector::zeros(d * d);
    let amp = C64::new(1.0 / (d as f64).sqrt(), 0.0);
    for i in 0..d {
        target_anc[i * d + i] = amp;
    }
    let target = junk.tensor(&StateVector::new(target_anc, vec![d, d])?);
    let (distance, fidelity) = distance_and_fidelity(&swapped, &target)?;

    Ok(HighdimReport {
        d,
        structure,
        identities,
        ladder_transfer,
        junk_prenorm,
        distance,
        fidelity,
    })
}

/// Hides each party behind a junk register and a random local unitary,
/// exactly as [`crate::qalg::inflate_with_junk`] does for the two-observable
/// scenario.  Projectors are lifted as `U (P ⊗ I) U†`.
pub fn inflate_qudit_with_junk(
    r: &QuditRealization,
    junk_dims: (usize, usize),
    seed: u64,
) -> Result<QuditRealization> {
    let (ja, jb) = junk_dims;
    if ja == 0 || jb == 0 {
        return Err(Error::Shape("junk dimensions must be at least 1".into()));
    }
    if ja == 1 && jb == 1 {
        return Ok(r.clone());
    }
    let (da, db) = r.dims();
    let mut rng = seeded_rng(seed);
    let ua = random_unitary(da * ja, &mut rng);
    let ub = random_unitary(db * jb, &mut rng);

    let junk = StateVector::basis(&[ja, jb], &[0, 0])?;
    let full = r.state.tensor(&junk);
    let grouped = full
        .permute_subsystems(&[0, 2, 1, 3])?
        .regroup(vec![da * ja, db * jb])?;
    let state = grouped.apply_on(0, &ua)?.apply_on(1, &ub)?;

    let lift = |fam: &ProjectorFamily, junk_dim: usize, u: &CMatrix| -> Result<ProjectorFamily> {
        ProjectorFamily::new(
            fam.projectors
                .iter()
                .map(|p| u * kron(p, &CMatrix::identity(junk_dim, junk_dim)) * u.adjoint())
                .collect(),
        )
    };
    let alice = r.alice.iter().map(|f| lift(f, ja, &ua)).collect::<Result<Vec<_>>>()?;
    let bob = r.bob.iter().map(|f| lift(f, jb, &ub)).collect::<Result<Vec<_>>>()?;
    QuditRealization::new(state, alice, bob)
}
