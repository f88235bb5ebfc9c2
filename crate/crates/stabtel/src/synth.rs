//! Protocol synthesis: the receiver's basis-change unitary, per-sender
//! measurement families, and the outcome-indexed Pauli correction.
//!
//! The unitary construction follows the eigenbasis route: for a witness
//! family `Z̄_1..Z̄_s`, `X̄_1..X̄_t` (base commutation `δ_ij`), build the
//! simultaneous eigenbasis of the Z̄'s one eigenvalue pattern at a time by
//! slicing with eigenvalue-labeled projectors, generate the remaining
//! patterns by applying X̄ powers, pair the family with the analogous
//! computational-basis family, and sum outer products. Witness operators
//! are restrictions and may carry shifted spectra; each is first
//! γ-calibrated so its eigenvalues are exactly `{ω^j}`, and the applied
//! calibration is reported so the measurement assembly can fold it into
//! the sender-side factors.

use crate::cmat::{C64, CMatrix, MonomialOp};
use num_complex::Complex64;
use stabtel_core::decomp::{Decomposition, DecompositionError, Partition};
use stabtel_core::pauli::{PauliError, PauliOperator};
use thiserror::Error;

#[derive(Error, Debug)]
pub enum SynthError {
    #[error("{0}")]
    Pauli(#[from] PauliError),
    #[error("{0}")]
    Decomposition(#[from] DecompositionError),
    #[error("witness violates {relation}: operators {first} and {second} have commutation exponent {got}, want {want}")]
    WitnessRelation {
        relation: &'static str,
        first: usize,
        second: usize,
        got: u64,
        want: u64,
    },
    #[error("{count} z-witnesses exceed the {qudits} receiver qudits")]
    TooManyWitnesses { count: usize, qudits: usize },
    #[error("joint eigenspace has dimension {got}, expected {expected} (degenerate witness family)")]
    DegenerateEigenspace { expected: usize, got: usize },
    #[error("synthesized operator failed its unitarity/conjugation check (residual {residual:.3e})")]
    ResidualTooLarge { residual: f64 },
    #[error("receiver dimension exceeds the budget {budget}")]
    BudgetExceeded { budget: usize },
    #[error("the decomposition carries zero total capacity; nothing to teleport")]
    ZeroCapacity,
}

/// Residual bound enforced on the synthesized unitary and its conjugation
/// relations.
pub const CONJUGATION_TOL: f64 = 1e-10;

/// Result of the receiver-unitary construction: the matrix plus the
/// γ-calibration applied to each witness operator. The conjugation
/// relations hold for the calibrated operators:
/// `U · mat(γ^{z_cal[i]} Z̄_i) · U† = mat(Z_i)` and likewise for X̄.
#[derive(Clone, Debug)]
pub struct ReceiverUnitary {
    pub matrix: CMatrix,
    pub z_calibrations: Vec<i64>,
    pub x_calibrations: Vec<i64>,
}

fn check_witness_relations(
    z_ops: &[PauliOperator],
    x_ops: &[PauliOperator],
) -> Result<(), SynthError> {
    for (i, z) in z_ops.iter().enumerate() {
        for (j, z2) in z_ops.iter().enumerate().skip(i + 1) {
            let got = z.commutation_exponent(z2)?;
            if got != 0 {
                return Err(SynthError::WitnessRelation {
                    relation: "z-z commutation",
                    first: i,
                    second: j,
                    got,
                    want: 0,
                });
            }
        }
        for (j, x) in x_ops.iter().enumerate() {
            let want = u64::from(i == j);
            let got = z.commutation_exponent(x)?;
            if got != want {
                return Err(SynthError::WitnessRelation {
                    relation: "z-x commutation",
                    first: i,
                    second: j,
                    got,
                    want,
                });
            }
        }
    }
    for (i, x) in x_ops.iter().enumerate() {
        for (j, x2) in x_ops.iter().enumerate().skip(i + 1) {
            let got = x.commutation_exponent(x2)?;
            if got != 0 {
                return Err(SynthError::WitnessRelation {
                    relation: "x-x commutation",
                    first: i,
                    second: j,
                    got,
                    want: 0,
                });
            }
        }
    }
    Ok(())
}

/// Eigenvalue-`ω^eigen` projector of a (plain-spectrum) operator applied
/// to `acc` from the left.
fn apply_eigen_projector(op: &PauliOperator, eigen: u64, acc: &CMatrix) -> CMatrix {
    let d = op.dim();
    let mut out = CMatrix::zeros(acc.rows(), acc.cols());
    let inv_d = 1.0 / d as f64;
    for j in 0..d {
        let power = MonomialOp::from_pauli(&op.power(j));
        let angle = -2.0 * std::f64::consts::PI * (j as f64) * (eigen as f64) / d as f64;
        let coef = Complex64::from_polar(inv_d, angle);
        let term = power.apply_left(acc);
        out = out.add(&term.scale(coef));
    }
    out
}

/// Build the receiver unitary from witness base operators on `q` qudits.
///
/// Preconditions (checked): z's commute pairwise, x's commute pairwise,
/// `comm(Z̄_i, X̄_j) = δ_ij`, and `len(x) <= len(z) <= q`. Fails cleanly if
/// the witness family produces non-uniform joint eigenspaces (possible
/// over composite moduli).
pub fn synthesize_receiver_unitary(
    z_ops: &[PauliOperator],
    x_ops: &[PauliOperator],
) -> Result<ReceiverUnitary, SynthError> {
    let Some(sample) = z_ops.first().or_else(|| x_ops.first()) else {
        // no witnesses at all: the identity on a single qudit is enough
        // for callers, but they are expected to special-case this
        return Ok(ReceiverUnitary {
            matrix: CMatrix::identity(1),
            z_calibrations: Vec::new(),
            x_calibrations: Vec::new(),
        });
    };
    let q = sample.qudits();
    let d = sample.dim() as usize;
    if x_ops.len() > z_ops.len() {
        return Err(SynthError::WitnessRelation {
            relation: "family shape (t <= s)",
            first: x_ops.len(),
            second: z_ops.len(),
            got: x_ops.len() as u64,
            want: z_ops.len() as u64,
        });
    }
    if z_ops.len() > q {
        return Err(SynthError::TooManyWitnesses {
            count: z_ops.len(),
            qudits: q,
        });
    }
    check_witness_relations(z_ops, x_ops)?;
    let s = z_ops.len();
    let t = x_ops.len();
    let total = d.pow(q as u32);
    // γ-calibrate every witness so its spectrum is exactly {ω^j}; among
    // the valid calibrations (unique mod 2·step) pick the one that keeps
    // the downstream measurement phase minimal: zero if allowed, else the
    // largest representative below 2d
    let pick = |op: &PauliOperator| -> i64 {
        let minimal = op.plain_calibration();
        if minimal == 0 {
            return 0;
        }
        let period = 2 * op.spectrum_class().step as i64;
        let two_d = 2 * op.dim() as i64;
        minimal + period * ((two_d - 1 - minimal) / period)
    };
    let z_cal: Vec<i64> = z_ops.iter().map(pick).collect();
    let x_cal: Vec<i64> = x_ops.iter().map(pick).collect();
    let zc: Vec<PauliOperator> = z_ops
        .iter()
        .zip(&z_cal)
        .map(|(op, &c)| op.with_phase_shift(c))
        .collect();
    let xc: Vec<PauliOperator> = x_ops
        .iter()
        .zip(&x_cal)
        .map(|(op, &c)| op.with_phase_shift(c))
        .collect();
    // x-monomial powers for the head shifts
    let x_monomials: Vec<Vec<MonomialOp>> = xc
        .iter()
        .map(|op| {
            (0..d as u64)
                .map(|k| MonomialOp::from_pauli(&op.power(k)))
                .collect()
        })
        .collect();
    let degeneracy = d.pow((q - s) as u32);
    let mut unitary = CMatrix::zeros(total, total);
    let tail_count = d.pow((s - t) as u32);
    for tail_idx in 0..tail_count {
        // tail digits y, big-endian over the s-t tail witnesses
        let mut y = vec![0u64; s - t];
        let mut rest = tail_idx;
        for slot in (0..s - t).rev() {
            y[slot] = (rest % d) as u64;
            rest /= d;
        }
        // base family: joint eigenspace of the z-witnesses at (0,..,0, y)
        let mut proj = CMatrix::identity(total);
        for (i, op) in zc.iter().enumerate() {
            let eigen = if i < t { 0 } else { y[i - t] };
            proj = apply_eigen_projector(op, eigen, &proj);
        }
        let basis = orthonormal_columns(&proj, degeneracy)?;
        for head_idx in 0..d.pow(t as u32) {
            let mut h = vec![0u64; t];
            let mut rest = head_idx;
            for slot in (0..t).rev() {
                h[slot] = (rest % d) as u64;
                rest /= d;
            }
            for (alpha, base_vec) in basis.iter().enumerate() {
                let mut w = base_vec.clone();
                for (j, &hj) in h.iter().enumerate() {
                    if hj != 0 {
                        w = x_monomials[j][hj as usize].apply_vec(&w);
                    }
                }
                // computational counterpart |h, y, alpha>
                let mut col = 0usize;
                for &hj in &h {
                    col = col * d + hj as usize;
                }
                for &yj in &y {
                    col = col * d + yj as usize;
                }
                col = col * degeneracy + alpha;
                unitary.set_column(col, &w);
            }
        }
    }
    // the outer-product sum maps the computational family onto the witness
    // eigenbasis; the protocol applies the reverse change of basis
    let unitary = unitary.adjoint();
    let residual = unitary
        .mul(&unitary.adjoint())
        .max_abs_diff(&CMatrix::identity(total));
    if residual > CONJUGATION_TOL {
        return Err(SynthError::ResidualTooLarge { residual });
    }
    // conjugation relations, checked densely while everything is small
    for (i, op) in zc.iter().enumerate() {
        let target = MonomialOp::from_pauli(&PauliOperator::single(op.dim(), q, i, 0, 1)?);
        let got = unitary
            .mul(&MonomialOp::from_pauli(op).to_dense())
            .mul(&unitary.adjoint());
        let r = got.max_abs_diff(&target.to_dense());
        if r > CONJUGATION_TOL {
            return Err(SynthError::ResidualTooLarge { residual: r });
        }
    }
    for (j, op) in xc.iter().enumerate() {
        let target = MonomialOp::from_pauli(&PauliOperator::single(op.dim(), q, j, 1, 0)?);
        let got = unitary
            .mul(&MonomialOp::from_pauli(op).to_dense())
            .mul(&unitary.adjoint());
        let r = got.max_abs_diff(&target.to_dense());
        if r > CONJUGATION_TOL {
            return Err(SynthError::ResidualTooLarge { residual: r });
        }
    }
    Ok(ReceiverUnitary {
        matrix: unitary,
        z_calibrations: z_cal,
        x_calibrations: x_cal,
    })
}

/// Deterministic modified Gram–Schmidt over the columns of `m` in index
/// order, with one re-orthogonalization pass. Returns exactly `expected`
/// orthonormal vectors or fails.
fn orthonormal_columns(m: &CMatrix, expected: usize) -> Result<Vec<Vec<C64>>, SynthError> {
    let mut basis: Vec<Vec<C64>> = Vec::with_capacity(expected);
    for j in 0..m.cols() {
        if basis.len() == expected {
            break;
        }
        let mut v = m.column(j);
        for _pass in 0..2 {
            for b in &basis {
                let overlap: C64 = b.iter().zip(&v).map(|(&bi, &vi)| bi.conj() * vi).sum();
                for (vi, &bi) in v.iter_mut().zip(b) {
                    *vi -= overlap * bi;
                }
            }
        }
        let norm: f64 = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-7 {
            for vi in v.iter_mut() {
                *vi /= norm;
            }
            basis.push(v);
        }
    }
    if basis.len() != expected {
        return Err(SynthError::DegenerateEigenspace {
            expected,
            got: basis.len(),
        });
    }
    Ok(basis)
}

/// The outcome-indexed correction `⊗_{i=1..b} Z^{-x_{2i}} X^{x_{2i-1}}`
/// on `b` qudits (outcome slots alternate Z-type, X-type).
pub fn correction_unitary(outcome: &[u64], dim: u64) -> Result<PauliOperator, PauliError> {
    CorrectionRule::canonical(outcome.len() / 2).operator(outcome, dim)
}

/// Parametrized correction map: destination qudit `i` receives
/// `Z^{z_coeff[i]·x_{2i+1}} X^{x_coeff[i]·x_{2i}}` (0-based slots). The
/// canonical rule has every `x_coeff = 1` and `z_coeff = -1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorrectionRule {
    pub x_coeff: Vec<i64>,
    pub z_coeff: Vec<i64>,
}

impl CorrectionRule {
    pub fn canonical(capacity: usize) -> Self {
        Self {
            x_coeff: vec![1; capacity],
            z_coeff: vec![-1; capacity],
        }
    }

    pub fn capacity(&self) -> usize {
        self.x_coeff.len()
    }

    /// Build the correction Pauli for one outcome vector.
    pub fn operator(&self, outcome: &[u64], dim: u64) -> Result<PauliOperator, PauliError> {
        let b = self.capacity();
        assert_eq!(outcome.len(), 2 * b, "outcome must have 2b slots");
        let d = dim as i64;
        let mut xs = vec![0i64; b];
        let mut zs = vec![0i64; b];
        let mut phase: i64 = 0;
        for i in 0..b {
            let a = (self.x_coeff[i] * outcome[2 * i] as i64).rem_euclid(d);
            let bz = (self.z_coeff[i] * outcome[2 * i + 1] as i64).rem_euclid(d);
            xs[i] = a;
            zs[i] = bz;
            // the site factor is Z^bz · X^a, i.e. ω^{bz·a} X^a Z^bz
            phase = (phase + 2 * bz * a).rem_euclid(2 * d);
        }
        PauliOperator::new(dim, phase, &xs, &zs)
    }
}

/// One sender's measurement family: `2a_i` commuting operators acting on
/// that sender's shared qudits followed by their `a_i` message qudits,
/// interleaved Z-type then X-type per teleported qudit.
#[derive(Clone, Debug)]
pub struct SenderMeasurement {
    /// Global (0-based) state-site indices of the sender's part, ascending.
    pub sender_sites: Vec<usize>,
    /// Operators on `sender_sites.len() + capacity` qudits.
    pub operators: Vec<PauliOperator>,
}

impl SenderMeasurement {
    pub fn capacity(&self) -> usize {
        self.operators.len() / 2
    }
}

/// A fully assembled teleportation protocol, ready for simulation or
/// serialization.
#[derive(Clone, Debug)]
pub struct ProtocolSpec {
    pub dim: u64,
    /// State-register size (message qudits come on top of this).
    pub qudits: usize,
    pub partition: Partition,
    pub capacities: Vec<usize>,
    /// Dense unitary on the receiver's part (sites ascending).
    pub receiver_unitary: CMatrix,
    /// Whether the receiver applies the unitary after hearing the
    /// outcomes (the two orders are equivalent; both are simulated).
    pub unitary_after_measurement: bool,
    pub measurements: Vec<SenderMeasurement>,
    /// Per sender: the destination sites inside the receiver's part.
    pub destinations: Vec<Vec<usize>>,
    pub correction: CorrectionRule,
}

impl ProtocolSpec {
    pub fn total_capacity(&self) -> usize {
        self.capacities.iter().sum()
    }

    pub fn receiver_sites(&self) -> &[usize] {
        self.partition.receiver()
    }

    /// All destination sites, ascending (sender order and site order
    /// coincide by construction).
    pub fn destination_sites(&self) -> Vec<usize> {
        self.destinations.iter().flatten().copied().collect()
    }
}

/// Build sender `i`'s measurement family from a verified decomposition and
/// the calibrations reported by the receiver-unitary synthesis.
pub fn build_sender_measurement(
    decomposition: &Decomposition,
    receiver_unitary: &ReceiverUnitary,
    sender: usize,
) -> Result<SenderMeasurement, SynthError> {
    let partition = decomposition.partition();
    let dim = decomposition.dim();
    let two_d = 2 * dim as i64;
    let sender_sites = partition.sender(sender).to_vec();
    let capacity = decomposition.sender_pairs()[sender].len();
    let offset: usize = decomposition.sender_pairs()[..sender]
        .iter()
        .map(|p| p.len())
        .sum();
    let q_i = sender_sites.len();
    let mut operators = Vec::with_capacity(2 * capacity);
    for (j, (z_el, x_el)) in decomposition.sender_pairs()[sender].iter().enumerate() {
        for (el, cal, message_is_z) in [
            (z_el, receiver_unitary.z_calibrations[offset + j], true),
            (x_el, receiver_unitary.x_calibrations[offset + j], false),
        ] {
            let restr = el.restrict(&sender_sites)?;
            let mut xs: Vec<i64> = restr.x_exp().iter().map(|&v| v as i64).collect();
            let mut zs: Vec<i64> = restr.z_exp().iter().map(|&v| v as i64).collect();
            xs.resize(q_i + capacity, 0);
            zs.resize(q_i + capacity, 0);
            if message_is_z {
                zs[q_i + j] = 1;
            } else {
                xs[q_i + j] = 1;
            }
            // the conjugated element is γ^{-cal} · (sender factor ⊗ Z/X):
            // the witness already carried the element's own phase, so only
            // the calibration shift survives on the sender side
            let phase = (-cal).rem_euclid(two_d);
            let op = PauliOperator::new(dim, phase, &xs, &zs)?;
            debug_assert!(op.in_g_prime(), "measurement operators must be plain");
            operators.push(op);
        }
    }
    // the family must commute pairwise for the projectors to be compatible
    for i in 0..operators.len() {
        for j in i + 1..operators.len() {
            let e = operators[i].commutation_exponent(&operators[j])?;
            if e != 0 {
                return Err(SynthError::WitnessRelation {
                    relation: "measurement family commutation",
                    first: i,
                    second: j,
                    got: e,
                    want: 0,
                });
            }
        }
    }
    Ok(SenderMeasurement {
        sender_sites,
        operators,
    })
}

/// Assemble the full protocol from a verified decomposition.
///
/// `budget` bounds the receiver-part dimension `d^{|T_rec|}` (the
/// simulator applies its own bound to the full register separately).
pub fn synthesize_protocol(
    decomposition: &Decomposition,
    budget: usize,
) -> Result<ProtocolSpec, SynthError> {
    let partition = decomposition.partition().clone();
    let dim = decomposition.dim();
    let rec = partition.receiver().to_vec();
    let rec_dim = (dim as usize).checked_pow(rec.len() as u32);
    if rec_dim.is_none() || rec_dim.unwrap() > budget {
        return Err(SynthError::BudgetExceeded { budget });
    }
    let witness = decomposition.receiver_witness()?;
    let receiver_unitary = if witness.z_ops.is_empty() {
        ReceiverUnitary {
            matrix: CMatrix::identity(rec_dim.unwrap()),
            z_calibrations: Vec::new(),
            x_calibrations: Vec::new(),
        }
    } else {
        synthesize_receiver_unitary(&witness.z_ops, &witness.x_ops)?
    };
    let capacities = decomposition.capacities();
    let total: usize = capacities.iter().sum();
    let mut destinations = Vec::with_capacity(capacities.len());
    let mut cursor = 0usize;
    for &a in &capacities {
        destinations.push(rec[cursor..cursor + a].to_vec());
        cursor += a;
    }
    let mut measurements = Vec::with_capacity(capacities.len());
    for sender in 0..partition.sender_count() {
        measurements.push(build_sender_measurement(
            decomposition,
            &receiver_unitary,
            sender,
        )?);
    }
    Ok(ProtocolSpec {
        dim,
        qudits: partition.qudits(),
        partition,
        capacities,
        receiver_unitary: receiver_unitary.matrix,
        unitary_after_measurement: false,
        measurements,
        destinations,
        correction: CorrectionRule::canonical(total),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use stabtel_core::decomp::find_multipartite_decomposition;
    use stabtel_core::group::StabilizerGroup;

    fn op(dim: u64, text: &str) -> PauliOperator {
        PauliOperator::parse(dim, text).unwrap()
    }

    #[test]
    fn standard_form_witness_gives_identity_unitary() {
        let ru = synthesize_receiver_unitary(&[op(3, "Z")], &[op(3, "X")]).unwrap();
        assert!(ru.matrix.max_abs_diff(&CMatrix::identity(3)) < 1e-12);
        assert_eq!(ru.z_calibrations, vec![0]);
    }

    #[test]
    fn swapped_witness_yields_fourier_like_unitary() {
        // Z̄ = X, X̄ = Z on a qubit: U must conjugate X to Z and Z to X
        let ru = synthesize_receiver_unitary(&[op(2, "X")], &[op(2, "Z")]).unwrap();
        let u = &ru.matrix;
        let x = MonomialOp::from_pauli(&op(2, "X")).to_dense();
        let z = MonomialOp::from_pauli(&op(2, "Z")).to_dense();
        assert!(u.mul(&x).mul(&u.adjoint()).max_abs_diff(&z) < 1e-12);
        assert!(u.mul(&z).mul(&u.adjoint()).max_abs_diff(&x) < 1e-12);
    }

    #[test]
    fn rejects_bad_witness_relations() {
        // X̄_2 fails to commute with Z̄_1
        let err = synthesize_receiver_unitary(
            &[op(2, "Z I"), op(2, "I Z")],
            &[op(2, "X I"), op(2, "Z X")],
        )
        .unwrap_err();
        assert!(matches!(err, SynthError::WitnessRelation { .. }));
    }

    #[test]
    fn example2_receiver_unitary_conjugates_all_five() {
        let s = StabilizerGroup::parse(
            3,
            5,
            &[
                "X X^2 X Z Z",
                "Z^2 Z I X I",
                "Z Z Z I X",
                "X X Z X Z^2",
                "I I Z^2 X^2 I",
            ],
        )
        .unwrap();
        let partition = Partition::new(5, vec![vec![0, 1], vec![2, 3, 4]]).unwrap();
        let dec = find_multipartite_decomposition(&s, &partition).unwrap();
        let witness = dec.receiver_witness().unwrap();
        let ru = synthesize_receiver_unitary(&witness.z_ops, &witness.x_ops).unwrap();
        assert_eq!(ru.matrix.rows(), 27);
        // residuals were enforced internally; spot-check one relation
        let zc = witness.z_ops[0].with_phase_shift(ru.z_calibrations[0]);
        let lhs = ru
            .matrix
            .mul(&MonomialOp::from_pauli(&zc).to_dense())
            .mul(&ru.matrix.adjoint());
        let target = MonomialOp::from_pauli(&op(3, "Z I I")).to_dense();
        assert!(lhs.max_abs_diff(&target) < 1e-10);
    }

    #[test]
    fn correction_examples() {
        // zero outcome is the identity
        let v = correction_unitary(&[0, 0], 3).unwrap();
        assert!(v.is_identity());
        // b=1, d=3, x=(1,2): Z^{-2}X^1 = Z^1 X^1 up to the reorder phase
        let v = correction_unitary(&[1, 2], 3).unwrap();
        assert_eq!(v.x_exp(), &[1]);
        assert_eq!(v.z_exp(), &[1]);
        assert_eq!(v.phase(), 2, "Z·X reorder contributes ω");
        // b=2, d=2, x=(1,0,0,1): X ⊗ Z
        let v = correction_unitary(&[1, 0, 0, 1], 2).unwrap();
        assert_eq!(v.x_exp(), &[1, 0]);
        assert_eq!(v.z_exp(), &[0, 1]);
    }

    #[test]
    fn eight_qubit_fixture_sender_measurements() {
        let s = StabilizerGroup::parse(
            2,
            8,
            &[
                "X Y I I I Z Y I",
                "X Z I I I X Y I",
                "I I Z Y Z I Y X",
                "I I Z I X I Y Z",
                "I I Z Z X Y X Y",
                "I I X X Z Y Z Y",
                "Z X I Z X I I I",
            ],
        )
        .unwrap();
        let partition = Partition::new(8, vec![vec![0, 1], vec![2, 3, 4], vec![5, 6, 7]]).unwrap();
        let dec = find_multipartite_decomposition(&s, &partition).unwrap();
        let witness = dec.receiver_witness().unwrap();
        let ru = synthesize_receiver_unitary(&witness.z_ops, &witness.x_ops).unwrap();
        let alice = build_sender_measurement(&dec, &ru, 0).unwrap();
        assert_eq!(alice.operators.len(), 2);
        // h''_1 = X ⊗ Y ⊗ Z and h''_2 = X ⊗ Z ⊗ X on (site 1, site 2, M)
        assert_eq!(alice.operators[0], op(2, "X Y Z"));
        assert_eq!(alice.operators[1], op(2, "X Z X"));
        let bob = build_sender_measurement(&dec, &ru, 1).unwrap();
        assert_eq!(bob.operators.len(), 4);
        // the four operators of the two-qubit sender
        assert_eq!(bob.operators[0], op(2, "Z Y Z Z I"));
        assert_eq!(bob.operators[1], op(2, "Z I X X I"));
        assert_eq!(bob.operators[2], op(2, "Z Z X I Z"));
        assert_eq!(bob.operators[3], op(2, "X X Z I X"));
    }

    #[test]
    fn bell_protocol_measures_in_bell_basis() {
        let s = StabilizerGroup::parse(2, 2, &["Z^-1 Z", "X X"]).unwrap();
        let partition = Partition::new(2, vec![vec![0], vec![1]]).unwrap();
        let dec = find_multipartite_decomposition(&s, &partition).unwrap();
        let spec = synthesize_protocol(&dec, 1 << 13).unwrap();
        assert_eq!(spec.capacities, vec![1]);
        assert_eq!(spec.destinations, vec![vec![1]]);
        let m = &spec.measurements[0];
        // the family is {Z^{-1} ⊗ Z, X ⊗ X} on (site 0, message qudit)
        assert_eq!(m.operators[0], op(2, "Z Z"));
        assert_eq!(m.operators[1], op(2, "X X"));
    }
}
