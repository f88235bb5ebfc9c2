//! Brute-force dense density-matrix oracle.
//!
//! Materializes Pauli matrices and eigenvalue-labeled projectors, builds
//! stabilizer states, executes a synthesized protocol on arbitrary inputs,
//! and scores recovery by trace distance. Nothing here is clever: the
//! point is an independent, obviously-correct check of the algebraic
//! layers, within a configurable dimension budget.
//!
//! The one optimization worth its weight: instead of sandwiching full
//! register-sized projectors, the simulator expands the shared state and
//! the message states into pure components (an orthonormal basis of the
//! stabilizer projector's range times input eigenvectors) and applies the
//! measurement factors as monomial operators on state vectors. This is
//! algebraically identical and keeps full outcome enumeration cheap.

use crate::cmat::{C64, CMatrix, MonomialOp, apply_on_sites, partial_trace, partial_trace_outer};
use crate::synth::ProtocolSpec;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stabtel_core::group::{GroupError, StabilizerGroup};
use stabtel_core::pauli::{PauliError, PauliOperator};
use thiserror::Error;

/// Numerical tolerances used throughout the oracle. Construction-level
/// checks allow more slack than algebraic equality oracles; end-to-end
/// perfection is the loosest because errors accumulate through products of
/// register-sized operators.
pub mod tolerances {
    /// Hermiticity / trace-one checks on constructed density matrices.
    pub const CONSTRUCTION: f64 = 1e-10;
    /// Positive semidefiniteness: smallest eigenvalue may undershoot zero
    /// by at most this much.
    pub const PSD_EIGEN: f64 = -1e-9;
    /// Equality oracles (idempotency, completeness, homomorphism checks).
    pub const EQUALITY: f64 = 1e-12;
    /// End-to-end teleportation perfection threshold on trace distance.
    pub const PERFECTION: f64 = 1e-8;
    /// Enumerated outcome probabilities must sum to one within this.
    pub const PROBABILITY: f64 = 1e-9;
    /// Below this total probability a branch counts as impossible.
    pub const ZERO_BRANCH: f64 = 1e-12;
}

/// Simulation limits.
#[derive(Clone, Copy, Debug)]
pub struct SimConfig {
    /// Refuse total register dimensions above this.
    pub max_dim: usize,
    /// Enumerate outcomes when their count is at most this; the CLI falls
    /// back to sampling above it.
    pub enumerate_threshold: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            max_dim: 1 << 13,
            enumerate_threshold: 4096,
        }
    }
}

#[derive(Error, Debug)]
pub enum SimError {
    #[error("{0}")]
    Pauli(#[from] PauliError),
    #[error("{0}")]
    Group(#[from] GroupError),
    #[error("total dimension {dim} exceeds the budget {budget}")]
    BudgetExceeded { dim: usize, budget: usize },
    #[error("dimension mismatch: {detail}")]
    DimensionMismatch { detail: String },
    #[error("operators {first} and {second} do not commute (exponent {exponent})")]
    NonCommutingFamily {
        first: usize,
        second: usize,
        exponent: u64,
    },
    #[error("matrix failed the {check} check (residual {residual:.3e})")]
    NotADensityMatrix { check: &'static str, residual: f64 },
    #[error("every outcome has probability below {0:.1e}; the protocol description is inconsistent")]
    InconsistentProtocol(f64),
    #[error("stabilizer projector rank {got} disagrees with d^(n-k) = {expected}")]
    RankMismatch { expected: u128, got: usize },
}

/// A validated density matrix.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    mat: CMatrix,
}

impl DensityMatrix {
    /// Validate Hermiticity, unit trace, and positive semidefiniteness.
    pub fn new(mat: CMatrix) -> Result<Self, SimError> {
        if mat.rows() != mat.cols() {
            return Err(SimError::DimensionMismatch {
                detail: format!("{}x{} is not square", mat.rows(), mat.cols()),
            });
        }
        let herm = mat.hermitian_residual();
        if herm > tolerances::CONSTRUCTION {
            return Err(SimError::NotADensityMatrix {
                check: "hermiticity",
                residual: herm,
            });
        }
        let tr = mat.trace();
        let tr_res = (tr - Complex64::new(1.0, 0.0)).norm();
        if tr_res > tolerances::CONSTRUCTION {
            return Err(SimError::NotADensityMatrix {
                check: "unit trace",
                residual: tr_res,
            });
        }
        let min_eig = mat
            .hermitian_eigenvalues()
            .first()
            .copied()
            .unwrap_or(0.0);
        if min_eig < tolerances::PSD_EIGEN {
            return Err(SimError::NotADensityMatrix {
                check: "positivity",
                residual: min_eig.abs(),
            });
        }
        Ok(Self { mat })
    }

    /// Trusted constructor for matrices produced by the oracle itself.
    fn from_trusted(mat: CMatrix) -> Self {
        Self { mat }
    }

    pub fn from_pure(state: &[C64]) -> Self {
        let n = state.len();
        let norm: f64 = state.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let mat = CMatrix::from_fn(n, n, |i, j| state[i] * state[j].conj() / (norm * norm));
        Self { mat }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        let mut mat = CMatrix::zeros(dim, dim);
        for i in 0..dim {
            mat.set(i, i, Complex64::new(1.0 / dim as f64, 0.0));
        }
        Self { mat }
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn mat(&self) -> &CMatrix {
        &self.mat
    }

    pub fn purity(&self) -> f64 {
        self.mat.mul(&self.mat).trace().re
    }

    /// Spectral decomposition, discarding numerically-zero weights.
    pub fn components(&self) -> Vec<(f64, Vec<C64>)> {
        let (eigs, vecs) = self.mat.hermitian_eigen();
        let mut out = Vec::new();
        for (i, &w) in eigs.iter().enumerate() {
            if w > tolerances::ZERO_BRANCH {
                out.push((w, vecs.column(i)));
            }
        }
        out
    }
}

/// Exact dense matrix of one Pauli operator (the whole register).
pub fn pauli_matrix(op: &PauliOperator) -> CMatrix {
    MonomialOp::from_pauli(op).to_dense()
}

/// The projector onto the simultaneous eigenspace of a commuting family
/// with eigenvalues `ω^{outcomes[i]}`.
pub fn projector(gens: &[PauliOperator], outcomes: &[u64]) -> Result<CMatrix, SimError> {
    assert!(!gens.is_empty(), "need at least one operator");
    let d = gens[0].dim();
    let q = gens[0].qudits();
    if outcomes.len() != gens.len() {
        return Err(SimError::DimensionMismatch {
            detail: format!("{} outcomes for {} operators", outcomes.len(), gens.len()),
        });
    }
    for i in 0..gens.len() {
        for j in i + 1..gens.len() {
            let e = gens[i].commutation_exponent(&gens[j])?;
            if e != 0 {
                return Err(SimError::NonCommutingFamily {
                    first: i,
                    second: j,
                    exponent: e,
                });
            }
        }
    }
    let total = (d as usize).pow(q as u32);
    let mut acc = CMatrix::identity(total);
    for (op, &x) in gens.iter().zip(outcomes) {
        let mut next = CMatrix::zeros(total, total);
        for j in 0..d {
            let power = MonomialOp::from_pauli(&op.power(j));
            let angle = -2.0 * std::f64::consts::PI * (j as f64) * (x as f64) / d as f64;
            let coef = Complex64::from_polar(1.0 / d as f64, angle);
            next = next.add(&power.apply_left(&acc).scale(coef));
        }
        acc = next;
    }
    Ok(acc)
}

/// The stabilizer projector `P_S` (unnormalized) as a dense matrix.
pub fn stabilizer_projector(group: &StabilizerGroup, config: &SimConfig) -> Result<CMatrix, SimError> {
    let d = group.dim() as usize;
    let total = d
        .checked_pow(group.qudits() as u32)
        .filter(|&v| v <= config.max_dim)
        .ok_or(SimError::BudgetExceeded {
            dim: usize::MAX,
            budget: config.max_dim,
        })?;
    let mut acc = CMatrix::identity(total);
    for op in group.generators() {
        let mut next = CMatrix::zeros(total, total);
        for j in 0..group.dim() {
            let power = MonomialOp::from_pauli(&op.power(j));
            let coef = Complex64::new(1.0 / group.dim() as f64, 0.0);
            next = next.add(&power.apply_left(&acc).scale(coef));
        }
        acc = next;
    }
    Ok(acc)
}

/// The maximally mixed state over the stabilized subspace,
/// `ρ_S = P_S / tr(P_S)`, with the trace checked against `d^{n-k}`.
pub fn rho_s(group: &StabilizerGroup, config: &SimConfig) -> Result<DensityMatrix, SimError> {
    let p = stabilizer_projector(group, config)?;
    let tr = p.trace();
    let expected = group.projector_rank();
    if (tr.re - expected as f64).abs() > 1e-6 * expected as f64 || tr.im.abs() > 1e-9 {
        return Err(SimError::RankMismatch {
            expected,
            got: tr.re.round() as usize,
        });
    }
    Ok(DensityMatrix::from_trusted(
        p.scale(Complex64::new(1.0 / tr.re, 0.0)),
    ))
}

/// Orthonormal basis of the range of a (numerically exact) projector, by
/// greedy column Gram–Schmidt in index order.
fn projector_range_basis(p: &CMatrix, expected: usize) -> Result<Vec<Vec<C64>>, SimError> {
    let mut basis: Vec<Vec<C64>> = Vec::with_capacity(expected);
    for j in 0..p.cols() {
        if basis.len() == expected {
            break;
        }
        let mut v = p.column(j);
        for _ in 0..2 {
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
        return Err(SimError::RankMismatch {
            expected: expected as u128,
            got: basis.len(),
        });
    }
    Ok(basis)
}

/// Partial trace onto `keep` (ascending site indices) of a density matrix
/// over sites of dimensions `dims`.
pub fn reduced_density(
    rho: &DensityMatrix,
    dims: &[usize],
    keep: &[usize],
) -> Result<DensityMatrix, SimError> {
    let total: usize = dims.iter().product();
    if rho.dim() != total {
        return Err(SimError::DimensionMismatch {
            detail: format!("state dim {} vs site dims product {total}", rho.dim()),
        });
    }
    Ok(DensityMatrix::from_trusted(partial_trace(
        rho.mat(),
        dims,
        keep,
    )))
}

/// Trace distance `½·Σ singular values of (a - b)`; for the Hermitian
/// difference this is half the sum of absolute eigenvalues.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64, SimError> {
    if a.dim() != b.dim() {
        return Err(SimError::DimensionMismatch {
            detail: format!("{} vs {}", a.dim(), b.dim()),
        });
    }
    let diff = a.mat().sub(b.mat());
    Ok(diff.hermitian_eigenvalues().iter().map(|e| e.abs()).sum::<f64>() / 2.0)
}

/// Deterministic full-rank random density matrix (`G·G†` normalized for a
/// seeded complex Gaussian `G`, Box–Muller from ChaCha8).
pub fn random_density_matrix(dim: usize, seed: u64) -> DensityMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut normal = move || {
        let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
        let u2: f64 = rng.gen_range(0.0..1.0);
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (2.0 * std::f64::consts::PI * u2).sin_cos();
        (r * c, r * s)
    };
    let g = CMatrix::from_fn(dim, dim, |_, _| {
        let (re, im) = normal();
        Complex64::new(re, im)
    });
    let gg = g.mul(&g.adjoint());
    let tr = gg.trace().re;
    DensityMatrix::from_trusted(gg.scale(Complex64::new(1.0 / tr, 0.0)))
}

/// How `run_protocol` visits outcomes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SimMode {
    /// Visit every outcome in `Z_d^{2b}`, lexicographically.
    Enumerate,
    /// Ancestral sampling of `count` outcomes from the exact joint
    /// distribution, deterministic under `seed`.
    Sample { count: usize, seed: u64 },
}

/// Per-outcome record. Zero-probability branches carry no recovered state.
#[derive(Clone, Debug)]
pub struct OutcomeRecord {
    pub outcome: Vec<u64>,
    pub probability: f64,
    pub recovered: Option<DensityMatrix>,
    pub distance: Option<f64>,
}

/// Result of one protocol execution over one input tuple.
#[derive(Clone, Debug)]
pub struct SimulationResult {
    pub outcomes: Vec<OutcomeRecord>,
    /// Sum of visited outcome probabilities (1 when enumerating).
    pub probability_sum: f64,
    pub max_distance: f64,
    pub mean_distance: f64,
    pub enumerated: bool,
    /// Outcomes visited with probability below the zero-branch threshold.
    pub zero_probability_outcomes: usize,
}

impl SimulationResult {
    /// Perfection verdict at the documented threshold.
    pub fn perfect(&self) -> bool {
        self.max_distance < tolerances::PERFECTION
    }
}

/// Pure-state component of the expanded global input.
struct Component {
    weight: f64,
    state: Vec<C64>,
}

struct Executor {
    dim: usize,
    n_sites: usize,
    /// Per measurement slot: monomials of the operator's powers 0..d.
    slot_powers: Vec<Vec<MonomialOp>>,
    reference: CMatrix,
    destination_sites: Vec<usize>,
    dims: Vec<usize>,
    correction: crate::synth::CorrectionRule,
    pauli_dim: u64,
}

impl Executor {
    /// Apply the factor `(1/d)·Σ_j ω^{-j·value} H_slot^j` to a state.
    fn project_slot(&self, slot: usize, value: u64, state: &[C64]) -> Vec<C64> {
        let d = self.dim;
        let mut out = vec![C64::new(0.0, 0.0); state.len()];
        for j in 0..d {
            let angle = -2.0 * std::f64::consts::PI * (j as f64) * (value as f64) / d as f64;
            let coef = Complex64::from_polar(1.0 / d as f64, angle);
            self.slot_powers[slot][j].accumulate_vec(state, coef, &mut out);
        }
        out
    }

    /// Finish one outcome branch: correction, reduction, scoring.
    fn score_branch(
        &self,
        outcome: &[u64],
        components: &[Component],
        probability: f64,
    ) -> Result<OutcomeRecord, SimError> {
        if probability < tolerances::ZERO_BRANCH {
            return Ok(OutcomeRecord {
                outcome: outcome.to_vec(),
                probability,
                recovered: None,
                distance: None,
            });
        }
        let correction = self.correction.operator(outcome, self.pauli_dim)?;
        let correction_monomial =
            MonomialOp::from_pauli_on_sites(&correction, self.n_sites, &self.destination_sites);
        let mut reduced = CMatrix::zeros(self.reference.rows(), self.reference.cols());
        for comp in components {
            let corrected = correction_monomial.apply_vec(&comp.state);
            let contrib = partial_trace_outer(&corrected, &self.dims, &self.destination_sites);
            reduced = reduced.add(&contrib.scale(Complex64::new(comp.weight, 0.0)));
        }
        let recovered =
            DensityMatrix::from_trusted(reduced.scale(Complex64::new(1.0 / probability, 0.0)));
        let distance = trace_distance(
            &recovered,
            &DensityMatrix::from_trusted(self.reference.clone()),
        )?;
        Ok(OutcomeRecord {
            outcome: outcome.to_vec(),
            probability,
            recovered: Some(recovered),
            distance: Some(distance),
        })
    }
}

/// Execute a protocol on the given sender inputs.
///
/// Builds `ρ_S ⊗ σ_1 ⊗ ... ⊗ σ_m`, applies the receiver unitary (before
/// or after the measurements per the protocol's flag — the operators act
/// on disjoint subsystems, so both orders are simulated faithfully),
/// projects on each visited outcome, applies the outcome's correction,
/// reduces to the destination sites and compares against the inputs.
pub fn run_protocol(
    group: &StabilizerGroup,
    spec: &ProtocolSpec,
    inputs: &[DensityMatrix],
    mode: SimMode,
    config: &SimConfig,
) -> Result<SimulationResult, SimError> {
    let d = spec.dim as usize;
    let n = spec.qudits;
    let b = spec.total_capacity();
    if inputs.len() != spec.capacities.len() {
        return Err(SimError::DimensionMismatch {
            detail: format!(
                "{} inputs for {} senders",
                inputs.len(),
                spec.capacities.len()
            ),
        });
    }
    for (i, (input, &a)) in inputs.iter().zip(&spec.capacities).enumerate() {
        let want = d.pow(a as u32);
        if input.dim() != want {
            return Err(SimError::DimensionMismatch {
                detail: format!("input {i} has dimension {}, want {want}", input.dim()),
            });
        }
    }
    let n_sites = n + b;
    let total = d
        .checked_pow(n_sites as u32)
        .filter(|&v| v <= config.max_dim)
        .ok_or(SimError::BudgetExceeded {
            dim: usize::MAX,
            budget: config.max_dim,
        })?;
    let dims = vec![d; n_sites];

    // pure components of ρ_S ⊗ σ_1 ⊗ ... ⊗ σ_m
    let p_s = stabilizer_projector(group, config)?;
    let rank = group.projector_rank() as usize;
    let shared_basis = projector_range_basis(&p_s, rank)?;
    let mut components: Vec<Component> = Vec::new();
    let input_components: Vec<Vec<(f64, Vec<C64>)>> =
        inputs.iter().map(|s| s.components()).collect();
    let mut stack: Vec<(usize, f64, Vec<C64>)> = shared_basis
        .iter()
        .map(|v| (0usize, 1.0 / rank as f64, v.clone()))
        .collect();
    while let Some((sender, weight, state)) = stack.pop() {
        if sender == inputs.len() {
            components.push(Component { weight, state });
            continue;
        }
        for (w, vec) in &input_components[sender] {
            let mut joined = Vec::with_capacity(state.len() * vec.len());
            for &a in &state {
                for &v in vec {
                    joined.push(a * v);
                }
            }
            stack.push((sender + 1, weight * w, joined));
        }
    }
    debug_assert!(components.iter().all(|c| c.state.len() == total));

    // measurement slots in global outcome order; each sender's family
    // must commute pairwise or its projectors are not simultaneous
    let mut slot_powers: Vec<Vec<MonomialOp>> = Vec::with_capacity(2 * b);
    let mut message_cursor = n;
    for (sender, m) in spec.measurements.iter().enumerate() {
        for i in 0..m.operators.len() {
            for j in i + 1..m.operators.len() {
                let e = m.operators[i].commutation_exponent(&m.operators[j])?;
                if e != 0 {
                    return Err(SimError::NonCommutingFamily {
                        first: i,
                        second: j,
                        exponent: e,
                    });
                }
            }
        }
        let a = spec.capacities[sender];
        let mut sites = m.sender_sites.clone();
        sites.extend(message_cursor..message_cursor + a);
        for op in &m.operators {
            if op.qudits() != sites.len() {
                return Err(SimError::DimensionMismatch {
                    detail: format!(
                        "measurement operator acts on {} qudits, sender {} supplies {}",
                        op.qudits(),
                        sender,
                        sites.len()
                    ),
                });
            }
            let powers = (0..spec.dim)
                .map(|j| MonomialOp::from_pauli_on_sites(&op.power(j), n_sites, &sites))
                .collect();
            slot_powers.push(powers);
        }
        message_cursor += a;
    }

    // receiver unitary, applied before or after the measurement factors
    let receiver_sites = spec.receiver_sites().to_vec();
    let apply_unitary = |comps: &mut Vec<Component>| {
        for comp in comps.iter_mut() {
            comp.state = apply_on_sites(&comp.state, &dims, &receiver_sites, &spec.receiver_unitary);
        }
    };
    if !spec.unitary_after_measurement {
        apply_unitary(&mut components);
    }

    // reference state: σ_1 ⊗ ... ⊗ σ_m on the destination sites
    let mut reference = CMatrix::identity(1);
    for input in inputs {
        reference = reference.kron(input.mat());
    }
    let executor = Executor {
        dim: d,
        n_sites,
        slot_powers,
        reference,
        destination_sites: spec.destination_sites(),
        dims: dims.clone(),
        correction: spec.correction.clone(),
        pauli_dim: spec.dim,
    };

    let mut outcomes: Vec<OutcomeRecord> = Vec::new();
    match mode {
        SimMode::Enumerate => {
            let slots = 2 * b;
            let mut outcome = vec![0u64; slots];
            loop {
                // project every component through the outcome's factors
                let mut branch: Vec<Component> = Vec::with_capacity(components.len());
                let mut probability = 0.0f64;
                for comp in &components {
                    let mut state = comp.state.clone();
                    for (slot, &value) in outcome.iter().enumerate() {
                        state = executor.project_slot(slot, value, &state);
                    }
                    let norm_sq: f64 = state.iter().map(|c| c.norm_sqr()).sum();
                    probability += comp.weight * norm_sq;
                    branch.push(Component {
                        weight: comp.weight,
                        state,
                    });
                }
                if spec.unitary_after_measurement {
                    apply_unitary(&mut branch);
                }
                outcomes.push(executor.score_branch(&outcome, &branch, probability)?);
                // odometer
                let mut slot = slots;
                loop {
                    if slot == 0 {
                        break;
                    }
                    slot -= 1;
                    outcome[slot] += 1;
                    if outcome[slot] < spec.dim {
                        break;
                    }
                    outcome[slot] = 0;
                    if slot == 0 {
                        break;
                    }
                }
                if outcome.iter().all(|&v| v == 0) {
                    break;
                }
                if slots == 0 {
                    break;
                }
            }
        }
        SimMode::Sample { count, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let slots = 2 * b;
            let mut seen: std::collections::BTreeMap<Vec<u64>, usize> =
                std::collections::BTreeMap::new();
            for _ in 0..count {
                // ancestral sampling: choose each slot value from its exact
                // conditional distribution
                let mut branch: Vec<Component> = components
                    .iter()
                    .map(|c| Component {
                        weight: c.weight,
                        state: c.state.clone(),
                    })
                    .collect();
                let mut outcome = Vec::with_capacity(slots);
                for slot in 0..slots {
                    let mut probs = vec![0.0f64; d];
                    let mut projected: Vec<Vec<Component>> = (0..d).map(|_| Vec::new()).collect();
                    for comp in &branch {
                        for (value, bucket) in projected.iter_mut().enumerate() {
                            let state = executor.project_slot(slot, value as u64, &comp.state);
                            let norm_sq: f64 = state.iter().map(|c| c.norm_sqr()).sum();
                            probs[value] += comp.weight * norm_sq;
                            bucket.push(Component {
                                weight: comp.weight,
                                state,
                            });
                        }
                    }
                    let norm: f64 = probs.iter().sum();
                    if norm < tolerances::ZERO_BRANCH {
                        return Err(SimError::InconsistentProtocol(tolerances::ZERO_BRANCH));
                    }
                    let mut draw = rng.gen_range(0.0..norm);
                    let mut chosen = d - 1;
                    for (value, &p) in probs.iter().enumerate() {
                        if draw < p {
                            chosen = value;
                            break;
                        }
                        draw -= p;
                    }
                    outcome.push(chosen as u64);
                    branch = projected.swap_remove(chosen);
                }
                if seen.contains_key(&outcome) {
                    continue; // already scored this outcome
                }
                let probability: f64 = branch
                    .iter()
                    .map(|c| c.weight * c.state.iter().map(|x| x.norm_sqr()).sum::<f64>())
                    .sum();
                if spec.unitary_after_measurement {
                    apply_unitary(&mut branch);
                }
                let record = executor.score_branch(&outcome, &branch, probability)?;
                seen.insert(outcome, outcomes.len());
                outcomes.push(record);
            }
        }
    }

    let probability_sum: f64 = outcomes.iter().map(|o| o.probability).sum();
    if probability_sum < tolerances::ZERO_BRANCH {
        return Err(SimError::InconsistentProtocol(tolerances::ZERO_BRANCH));
    }
    let distances: Vec<f64> = outcomes.iter().filter_map(|o| o.distance).collect();
    let max_distance = distances.iter().copied().fold(0.0, f64::max);
    let mean_distance = if distances.is_empty() {
        0.0
    } else {
        distances.iter().sum::<f64>() / distances.len() as f64
    };
    let zero_probability_outcomes = outcomes.iter().filter(|o| o.recovered.is_none()).count();
    Ok(SimulationResult {
        outcomes,
        probability_sum,
        max_distance,
        mean_distance,
        enumerated: matches!(mode, SimMode::Enumerate),
        zero_probability_outcomes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::synthesize_protocol;
    use stabtel_core::decomp::{Partition, find_multipartite_decomposition};

    fn op(dim: u64, text: &str) -> PauliOperator {
        PauliOperator::parse(dim, text).unwrap()
    }

    fn bell_group(d: u64) -> StabilizerGroup {
        StabilizerGroup::parse(d, 2, &["Z^-1 Z", "X X"]).unwrap()
    }

    fn example2_group() -> StabilizerGroup {
        StabilizerGroup::parse(
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
        .unwrap()
    }

    fn example3_group() -> StabilizerGroup {
        StabilizerGroup::parse(
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
        .unwrap()
    }

    #[test]
    fn clock_matrix_is_the_diagonal_of_roots() {
        let z = pauli_matrix(&op(3, "Z"));
        let w = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
        assert!((z.at(0, 0) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((z.at(1, 1) - w).norm() < 1e-15);
        assert!((z.at(2, 2) - w * w).norm() < 1e-15);
        assert!(z.at(0, 1).norm() < 1e-15);
        let id = pauli_matrix(&PauliOperator::identity(4, 2));
        assert!(id.max_abs_diff(&CMatrix::identity(16)) < 1e-15);
    }

    #[test]
    fn multi_site_matrix_matches_kronecker_oracle() {
        // g_7 of the eight-qubit fixture, built independently as an
        // explicit Kronecker product of 2x2 site factors
        let g7 = op(2, "Z X I Z X I I I");
        let direct = pauli_matrix(&g7);
        let x = pauli_matrix(&op(2, "X"));
        let z = pauli_matrix(&op(2, "Z"));
        let i = CMatrix::identity(2);
        let factors = [&z, &x, &i, &z, &x, &i, &i, &i];
        let mut oracle = CMatrix::identity(1);
        for f in factors {
            oracle = oracle.kron(f);
        }
        assert_eq!(direct.rows(), 256);
        assert!(direct.max_abs_diff(&oracle) < 1e-14);
    }

    #[test]
    fn product_homomorphism_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..60 {
            let d = [2u64, 3, 4][rng.gen_range(0..3)];
            let n = rng.gen_range(1..=3usize);
            let mk = |rng: &mut ChaCha8Rng| {
                let xs: Vec<i64> = (0..n).map(|_| rng.gen_range(0..d as i64)).collect();
                let zs: Vec<i64> = (0..n).map(|_| rng.gen_range(0..d as i64)).collect();
                PauliOperator::new(d, rng.gen_range(0..2 * d as i64), &xs, &zs).unwrap()
            };
            let g = mk(&mut rng);
            let h = mk(&mut rng);
            let lhs = pauli_matrix(&g.multiply(&h).unwrap());
            let rhs = pauli_matrix(&g).mul(&pauli_matrix(&h));
            assert!(lhs.max_abs_diff(&rhs) < tolerances::EQUALITY);
        }
    }

    #[test]
    fn spectrum_class_agrees_with_dense_eigenvalues() {
        for &d in &[2u64, 3, 4, 6] {
            for a in 0..d as i64 {
                for b in 0..d as i64 {
                    let g = PauliOperator::new(d, 0, &[a], &[b]).unwrap();
                    let class = g.spectrum_class();
                    // dense eigenvalues of the (unitary) matrix
                    let m = pauli_matrix(&g);
                    let mut phases: Vec<f64> = (0..d as usize)
                        .map(|_| 0.0)
                        .collect();
                    // eigenvalues of a monomial matrix lie on the unit
                    // circle; extract them through the Hermitian pieces
                    // H = (M + M†)/2 has eigenvalues cos(θ_j) — instead
                    // diagonalize M†... simplest: M is normal, use the
                    // characteristic polynomial via repeated powers:
                    // tr(M^k) = Σ λ_j^k and compare against the class set.
                    let mut mk = CMatrix::identity(d as usize);
                    let mut traces = Vec::new();
                    for _ in 0..2 * d {
                        mk = mk.mul(&m);
                        traces.push(mk.trace());
                    }
                    phases.clear();
                    // predicted spectrum: γ^shift · ω^{j·step}, each with
                    // multiplicity step
                    let step = class.step;
                    for j in 0..(d / step) {
                        phases.push(
                            std::f64::consts::PI * class.shift as f64 / d as f64
                                + 2.0 * std::f64::consts::PI * (j * step) as f64 / d as f64,
                        );
                    }
                    for (k, &got) in traces.iter().enumerate() {
                        let predicted: Complex64 = phases
                            .iter()
                            .map(|&p| {
                                Complex64::from_polar(step as f64, p * (k as f64 + 1.0))
                            })
                            .sum();
                        assert!(
                            (got - predicted).norm() < 1e-9,
                            "d={d} a={a} b={b} k={k}: {got} vs {predicted}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn projector_examples_and_completeness() {
        // single Z on a qubit, eigenvalue 1 sector
        let p = projector(&[op(2, "Z")], &[0]).unwrap();
        assert!((p.at(0, 0) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!(p.at(1, 1).norm() < 1e-15);
        // Bell projector equals |Φ+><Φ+| built from the state vector
        let g = bell_group(2);
        let p00 = projector(g.generators(), &[0, 0]).unwrap();
        let phi = [
            Complex64::new(1.0 / 2f64.sqrt(), 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0 / 2f64.sqrt(), 0.0),
        ];
        let outer = CMatrix::from_fn(4, 4, |i, j| phi[i] * phi[j].conj());
        assert!(p00.max_abs_diff(&outer) < tolerances::EQUALITY);
        // idempotent, Hermitian, complete
        let mut sum = CMatrix::zeros(4, 4);
        for x0 in 0..2 {
            for x1 in 0..2 {
                let p = projector(g.generators(), &[x0, x1]).unwrap();
                assert!(p.max_abs_diff(&p.mul(&p)) < tolerances::EQUALITY);
                assert!(p.hermitian_residual() < tolerances::EQUALITY);
                sum = sum.add(&p);
            }
        }
        assert!(sum.max_abs_diff(&CMatrix::identity(4)) < tolerances::EQUALITY);
        // non-commuting family is rejected
        assert!(matches!(
            projector(&[op(2, "Z"), op(2, "X")], &[0, 0]),
            Err(SimError::NonCommutingFamily { .. })
        ));
    }

    #[test]
    fn stabilizer_states_of_the_three_fixtures() {
        let config = SimConfig::default();
        // Bell state: pure, matches the explicit maximally entangled state
        let rho = rho_s(&bell_group(2), &config).unwrap();
        let phi = [
            Complex64::new(1.0 / 2f64.sqrt(), 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0 / 2f64.sqrt(), 0.0),
        ];
        let outer = CMatrix::from_fn(4, 4, |i, j| phi[i] * phi[j].conj());
        assert!(rho.mat().max_abs_diff(&outer) < 1e-12);
        // five-qutrit fixture: pure
        let rho2 = rho_s(&example2_group(), &config).unwrap();
        assert!((rho2.purity() - 1.0).abs() < tolerances::CONSTRUCTION);
        // eight-qubit fixture: rank 2, purity 1/2, projector trace 2
        let g3 = example3_group();
        let p = stabilizer_projector(&g3, &config).unwrap();
        assert!((p.trace().re - 2.0).abs() < 1e-9);
        let rho3 = rho_s(&g3, &config).unwrap();
        assert!((rho3.purity() - 0.5).abs() < 1e-9);
    }

    #[test]
    fn reduced_fixture_state_is_maximally_mixed_on_its_support() {
        // the five-qutrit fixture reduced to its last three sites has all
        // nonzero eigenvalues equal (maximally mixed on the support)
        let config = SimConfig::default();
        let rho = rho_s(&example2_group(), &config).unwrap();
        let reduced = reduced_density(&rho, &[3, 3, 3, 3, 3], &[2, 3, 4]).unwrap();
        let eigs = reduced.mat().hermitian_eigenvalues();
        let nonzero: Vec<f64> = eigs.into_iter().filter(|e| *e > 1e-9).collect();
        assert_eq!(nonzero.len(), 9, "rank d^2 support");
        for e in &nonzero {
            assert!((e - 1.0 / 9.0).abs() < 1e-9);
        }
    }

    /// Independent trace-distance oracle: embed the Hermitian difference as
    /// the real symmetric matrix [[Re, -Im],[Im, Re]] (eigenvalues doubled)
    /// and run a plain real Jacobi written here, sharing no code with the
    /// implementation under test.
    fn trace_distance_oracle(a: &DensityMatrix, b: &DensityMatrix) -> f64 {
        let n = a.dim();
        let mut m = vec![vec![0.0f64; 2 * n]; 2 * n];
        for i in 0..n {
            for j in 0..n {
                let v = a.mat().at(i, j) - b.mat().at(i, j);
                m[i][j] = v.re;
                m[i][j + n] = -v.im;
                m[i + n][j] = v.im;
                m[i + n][j + n] = v.re;
            }
        }
        let nn = 2 * n;
        for _sweep in 0..100 {
            let mut off = 0.0;
            for p in 0..nn {
                for q in p + 1..nn {
                    off += m[p][q] * m[p][q];
                }
            }
            if off.sqrt() < 1e-15 {
                break;
            }
            for p in 0..nn {
                for q in p + 1..nn {
                    if m[p][q].abs() < 1e-300 {
                        continue;
                    }
                    let theta = 0.5 * (2.0 * m[p][q]).atan2(m[p][p] - m[q][q]);
                    let (s, c) = theta.sin_cos();
                    for k in 0..nn {
                        let (mkp, mkq) = (m[k][p], m[k][q]);
                        m[k][p] = c * mkp + s * mkq;
                        m[k][q] = -s * mkp + c * mkq;
                    }
                    for k in 0..nn {
                        let (mpk, mqk) = (m[p][k], m[q][k]);
                        m[p][k] = c * mpk + s * mqk;
                        m[q][k] = -s * mpk + c * mqk;
                    }
                }
            }
        }
        let sum: f64 = (0..nn).map(|i| m[i][i].abs()).sum();
        sum / 2.0 / 2.0 // halve for the doubling, halve for the metric
    }

    #[test]
    fn trace_distance_examples_and_oracle() {
        let a = random_density_matrix(6, 5);
        assert!(trace_distance(&a, &a).unwrap() < 1e-14);
        // orthogonal pure states are at distance 1
        let e0 = DensityMatrix::from_pure(&[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]);
        let e1 = DensityMatrix::from_pure(&[Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]);
        assert!((trace_distance(&e0, &e1).unwrap() - 1.0).abs() < 1e-14);
        // random pairs agree with the independently coded oracle
        for seed in 0..10 {
            let a = random_density_matrix(5, 2 * seed);
            let b = random_density_matrix(5, 2 * seed + 1);
            let got = trace_distance(&a, &b).unwrap();
            let want = trace_distance_oracle(&a, &b);
            assert!((got - want).abs() < tolerances::EQUALITY, "{got} vs {want}");
        }
    }

    #[test]
    fn random_density_is_deterministic_and_unbiased() {
        let a = random_density_matrix(4, 99);
        let b = random_density_matrix(4, 99);
        assert!(a.mat().max_abs_diff(b.mat()) == 0.0);
        assert!(a.mat().hermitian_residual() < 1e-12);
        assert!((a.mat().trace().re - 1.0).abs() < 1e-12);
        // the one-dimensional case is the scalar 1
        let one = random_density_matrix(1, 3);
        assert!((one.mat().at(0, 0) - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        // seed-averaged mean approaches I/2 for qubits
        let mut mean = CMatrix::zeros(2, 2);
        for seed in 0..1000 {
            mean = mean.add(random_density_matrix(2, seed).mat());
        }
        mean = mean.scale(Complex64::new(1.0 / 1000.0, 0.0));
        let half = CMatrix::identity(2).scale(Complex64::new(0.5, 0.0));
        assert!(mean.max_abs_diff(&half) < 0.05);
    }

    #[test]
    fn bell_teleportation_is_perfect_for_every_outcome() {
        let config = SimConfig::default();
        for d in [2u64, 3] {
            let group = bell_group(d);
            let partition = Partition::new(2, vec![vec![0], vec![1]]).unwrap();
            let dec = find_multipartite_decomposition(&group, &partition).unwrap();
            let spec = synthesize_protocol(&dec, config.max_dim).unwrap();
            let input = random_density_matrix(d as usize, 42);
            let result =
                run_protocol(&group, &spec, &[input], SimMode::Enumerate, &config).unwrap();
            assert_eq!(result.outcomes.len(), (d * d) as usize);
            assert!((result.probability_sum - 1.0).abs() < tolerances::PROBABILITY);
            for rec in &result.outcomes {
                let p = rec.probability;
                assert!((p - 1.0 / (d * d) as f64).abs() < tolerances::PROBABILITY);
            }
            assert!(result.max_distance < 1e-9, "d={d}: {}", result.max_distance);
            assert!(result.perfect());
        }
    }

    #[test]
    fn maximally_mixed_input_teleports_trivially() {
        let config = SimConfig::default();
        let group = bell_group(3);
        let partition = Partition::new(2, vec![vec![0], vec![1]]).unwrap();
        let dec = find_multipartite_decomposition(&group, &partition).unwrap();
        let spec = synthesize_protocol(&dec, config.max_dim).unwrap();
        let input = DensityMatrix::maximally_mixed(3);
        let result = run_protocol(&group, &spec, &[input], SimMode::Enumerate, &config).unwrap();
        assert!(result.perfect());
    }

    #[test]
    fn unitary_order_flag_changes_nothing() {
        let config = SimConfig::default();
        let group = example3_group();
        let partition =
            Partition::new(8, vec![vec![0, 5], vec![2, 7], vec![1, 3, 4, 6]]).unwrap();
        let dec = find_multipartite_decomposition(&group, &partition).unwrap();
        let mut spec = synthesize_protocol(&dec, config.max_dim).unwrap();
        let inputs = [random_density_matrix(2, 7), random_density_matrix(2, 8)];
        let before =
            run_protocol(&group, &spec, &inputs, SimMode::Enumerate, &config).unwrap();
        spec.unitary_after_measurement = true;
        let after = run_protocol(&group, &spec, &inputs, SimMode::Enumerate, &config).unwrap();
        assert_eq!(before.outcomes.len(), after.outcomes.len());
        for (x, y) in before.outcomes.iter().zip(&after.outcomes) {
            assert!((x.probability - y.probability).abs() < 1e-12);
            assert!((x.distance.unwrap() - y.distance.unwrap()).abs() < 1e-12);
        }
        assert!(before.perfect() && after.perfect());
    }

    #[test]
    fn sampling_mode_is_deterministic_and_perfect() {
        let config = SimConfig::default();
        let group = example3_group();
        let partition = Partition::new(8, vec![vec![0, 1], vec![2, 3, 4], vec![5, 6, 7]]).unwrap();
        let dec = find_multipartite_decomposition(&group, &partition).unwrap();
        let spec = synthesize_protocol(&dec, config.max_dim).unwrap();
        let inputs = [random_density_matrix(2, 1), random_density_matrix(4, 2)];
        let mode = SimMode::Sample { count: 50, seed: 9 };
        let r1 = run_protocol(&group, &spec, &inputs, mode, &config).unwrap();
        let r2 = run_protocol(&group, &spec, &inputs, mode, &config).unwrap();
        assert_eq!(r1.outcomes.len(), r2.outcomes.len());
        assert!(!r1.enumerated);
        assert!(r1.max_distance < 1e-8, "{}", r1.max_distance);
        for (a, b) in r1.outcomes.iter().zip(&r2.outcomes) {
            assert_eq!(a.outcome, b.outcome);
        }
    }

    #[test]
    fn zero_capacity_sender_contributes_a_trivial_outcome_slot() {
        // one sender shares a maximally entangled pair with the receiver,
        // the other holds an uncorrelated qudit: capacities (1, 0), and
        // the second sender's measurement family is empty
        let config = SimConfig::default();
        let group = StabilizerGroup::parse(2, 3, &["Z^-1 Z I", "X X I", "I I Z"]).unwrap();
        let partition = Partition::new(3, vec![vec![0], vec![2], vec![1]]).unwrap();
        let dec = find_multipartite_decomposition(&group, &partition).unwrap();
        assert_eq!(dec.capacities(), vec![1, 0]);
        let spec = synthesize_protocol(&dec, config.max_dim).unwrap();
        assert!(spec.measurements[1].operators.is_empty());
        let inputs = [random_density_matrix(2, 3), DensityMatrix::maximally_mixed(1)];
        let result = run_protocol(&group, &spec, &inputs, SimMode::Enumerate, &config).unwrap();
        assert_eq!(result.outcomes.len(), 4);
        assert!(result.perfect());
    }

    #[test]
    fn budget_is_enforced() {
        let config = SimConfig {
            max_dim: 8,
            enumerate_threshold: 4096,
        };
        let group = example2_group();
        assert!(matches!(
            rho_s(&group, &config),
            Err(SimError::BudgetExceeded { .. })
        ));
    }
}
