//! Stabilizer groups as validated, phase-tracked generator tableaux.
//!
//! A [`StabilizerGroup`] holds `k` pairwise-commuting, spectrally eligible
//! generators on `n` qudits whose only product relation evaluating to a
//! phase multiple of the identity is the trivial one. That last condition
//! (checked through the kernel of the symplectic tableau plus exact phase
//! evaluation) is what makes the group have exactly `d^k` elements and the
//! stabilized subspace dimension `d^{n-k}`; for prime `d` it coincides with
//! the usual pairwise-independence notion.

use crate::pauli::{PauliError, PauliOperator};
use crate::zmod::{ResidueMatrix, ResidueVector, ZmodError};
use alloc::vec::Vec;
use core::fmt;

/// Error type for stabilizer-group construction and queries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GroupError {
    Pauli(PauliError),
    Zmod(ZmodError),
    /// A generator has the wrong dimension or qudit count.
    WrongShape { index: usize },
    /// A generator's spectrum does not contain 1 with the plain structure,
    /// so it cannot stabilize anything.
    NotEligible { index: usize },
    /// Two generators fail to commute; carries their commutation exponent.
    NonCommutingPair {
        first: usize,
        second: usize,
        exponent: u64,
    },
    /// A nontrivial product of generator powers equals the identity;
    /// `redundant` names a generator recoverable from the others.
    DependentGenerators {
        relation: Vec<u64>,
        redundant: usize,
    },
    /// A nontrivial product of generator powers equals `γ^phase · I`,
    /// which empties the stabilized subspace.
    PhaseOnlyProduct { relation: Vec<u64>, phase: u64 },
    /// More independent commuting generators than qudits (unreachable for
    /// valid inputs; kept as a defensive diagnostic).
    TooManyGenerators { count: usize, qudits: usize },
}

impl fmt::Display for GroupError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupError::Pauli(e) => write!(f, "{e}"),
            GroupError::Zmod(e) => write!(f, "{e}"),
            GroupError::WrongShape { index } => {
                write!(f, "generator {index} has mismatched dimension or qudit count")
            }
            GroupError::NotEligible { index } => write!(
                f,
                "generator {index} is not an eligible stabilizer generator (spectrum excludes 1)"
            ),
            GroupError::NonCommutingPair {
                first,
                second,
                exponent,
            } => write!(
                f,
                "generators {first} and {second} do not commute (exponent {exponent})"
            ),
            GroupError::DependentGenerators {
                relation,
                redundant,
            } => write!(
                f,
                "generators are dependent: relation {relation:?} makes generator {redundant} redundant"
            ),
            GroupError::PhaseOnlyProduct { relation, phase } => write!(
                f,
                "generator products contain γ^{phase}·I via relation {relation:?}; no state is stabilized"
            ),
            GroupError::TooManyGenerators { count, qudits } => {
                write!(f, "{count} independent generators on {qudits} qudits")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for GroupError {}

impl From<PauliError> for GroupError {
    fn from(e: PauliError) -> Self {
        GroupError::Pauli(e)
    }
}

impl From<ZmodError> for GroupError {
    fn from(e: ZmodError) -> Self {
        GroupError::Zmod(e)
    }
}

/// A validated stabilizer group `S = <g_1, ..., g_k>`.
#[derive(Clone, PartialEq, Eq)]
pub struct StabilizerGroup {
    dim: u64,
    qudits: usize,
    generators: Vec<PauliOperator>,
}

impl fmt::Debug for StabilizerGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "StabilizerGroup(d={}, n={}, k={}) [",
            self.dim,
            self.qudits,
            self.generators.len()
        )?;
        for g in &self.generators {
            writeln!(f, "  {g}")?;
        }
        write!(f, "]")
    }
}

impl StabilizerGroup {
    /// Validate and build. Checks, in order: shape, spectral eligibility,
    /// pairwise commutation, and triviality of the exact product kernel
    /// (no nontrivial relation `Π g_i^{j_i} = γ^c·I`, any `c`).
    pub fn new(
        dim: u64,
        qudits: usize,
        generators: Vec<PauliOperator>,
    ) -> Result<Self, GroupError> {
        if dim < 2 {
            return Err(GroupError::Pauli(PauliError::BadDimension { dim }));
        }
        for (i, g) in generators.iter().enumerate() {
            if g.dim() != dim || g.qudits() != qudits {
                return Err(GroupError::WrongShape { index: i });
            }
        }
        for (i, g) in generators.iter().enumerate() {
            if !g.in_g_prime() {
                return Err(GroupError::NotEligible { index: i });
            }
        }
        for i in 0..generators.len() {
            for j in i + 1..generators.len() {
                let e = generators[i].commutation_exponent(&generators[j])?;
                if e != 0 {
                    return Err(GroupError::NonCommutingPair {
                        first: i,
                        second: j,
                        exponent: e,
                    });
                }
            }
        }
        let group = Self {
            dim,
            qudits,
            generators,
        };
        if !group.generators.is_empty() {
            let kernel = group.tableau()?.combination_kernel_basis();
            if let Some(relation) = kernel.rows().first() {
                let product = group.element_from_exponents(relation)?;
                debug_assert!(product.has_trivial_action());
                let rel = relation.entries().to_vec();
                if product.phase() == 0 {
                    // a generator with a unit coefficient is recoverable
                    // from the rest; otherwise name the last participant
                    let redundant = rel
                        .iter()
                        .enumerate()
                        .rev()
                        .find(|(_, &c)| c != 0 && gcd(c, dim) == 1)
                        .or_else(|| rel.iter().enumerate().rev().find(|(_, &c)| c != 0))
                        .map(|(i, _)| i)
                        .unwrap_or(0);
                    return Err(GroupError::DependentGenerators {
                        relation: rel,
                        redundant,
                    });
                }
                return Err(GroupError::PhaseOnlyProduct {
                    relation: rel,
                    phase: product.phase(),
                });
            }
        }
        if group.generators.len() > qudits {
            return Err(GroupError::TooManyGenerators {
                count: group.generators.len(),
                qudits,
            });
        }
        Ok(group)
    }

    /// Parse each generator from its token form and build.
    pub fn parse(dim: u64, qudits: usize, lines: &[&str]) -> Result<Self, GroupError> {
        let generators = lines
            .iter()
            .map(|s| PauliOperator::parse(dim, s))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(dim, qudits, generators)
    }

    pub fn dim(&self) -> u64 {
        self.dim
    }

    pub fn qudits(&self) -> usize {
        self.qudits
    }

    pub fn generator_count(&self) -> usize {
        self.generators.len()
    }

    pub fn generators(&self) -> &[PauliOperator] {
        &self.generators
    }

    /// Symplectic tableau: one exponent row `(a‖b)` per generator, mod `d`.
    pub fn tableau(&self) -> Result<ResidueMatrix, GroupError> {
        let rows: Vec<ResidueVector> = self.generators.iter().map(|g| g.exponent_row()).collect();
        Ok(ResidueMatrix::new(self.dim, 2 * self.qudits, rows)?)
    }

    /// `Π_i g_i^{c_i}` (well-defined in any order; generators commute).
    pub fn element_from_exponents(&self, coeffs: &ResidueVector) -> Result<PauliOperator, GroupError> {
        if coeffs.len() != self.generators.len() {
            return Err(GroupError::Zmod(ZmodError::LengthMismatch {
                expected: self.generators.len(),
                got: coeffs.len(),
            }));
        }
        let mut acc = PauliOperator::identity(self.dim, self.qudits);
        for (g, &c) in self.generators.iter().zip(coeffs.entries()) {
            acc = acc.multiply(&g.power(c))?;
        }
        Ok(acc)
    }

    /// Exact membership: exponents `j` with `Π g_i^{j_i} = g`, phase
    /// included. The generator tableau has a trivial kernel, so the
    /// candidate exponent vector is unique and the phase either matches or
    /// rules membership out.
    pub fn is_member(&self, g: &PauliOperator) -> Result<Option<ResidueVector>, GroupError> {
        if g.dim() != self.dim || g.qudits() != self.qudits {
            return Err(GroupError::Pauli(PauliError::Mismatch {
                left_dim: self.dim,
                left_qudits: self.qudits,
                right_dim: g.dim(),
                right_qudits: g.qudits(),
            }));
        }
        if self.generators.is_empty() {
            return Ok(if g.is_identity() {
                Some(ResidueVector::zeros(self.dim, 0))
            } else {
                None
            });
        }
        let tableau = self.tableau()?;
        let Some(coeffs) = tableau.solve_combination(&g.exponent_row())? else {
            return Ok(None);
        };
        let candidate = self.element_from_exponents(&coeffs)?;
        Ok(if candidate == *g { Some(coeffs) } else { None })
    }

    /// `tr(P_S) = d^{n-k}`, the dimension of the stabilized subspace.
    pub fn projector_rank(&self) -> u128 {
        (self.dim as u128).pow((self.qudits - self.generators.len()) as u32)
    }

    /// The restriction `S^{(T)}`: generator restrictions with the phase
    /// group adjoined.
    pub fn restrict(&self, sites: &[usize]) -> Result<RestrictedGroup, GroupError> {
        let mut sorted = sites.to_vec();
        sorted.sort_unstable();
        let generators = self
            .generators
            .iter()
            .map(|g| g.restrict(&sorted))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(RestrictedGroup {
            dim: self.dim,
            sites: sorted,
            generators,
        })
    }
}

/// The restriction of a stabilizer group to a site subset, with the full
/// phase group `<γ>` adjoined (as the formalism defines it). Not abelian in
/// general; membership is therefore a statement about exponent vectors
/// only, every phase being reachable.
#[derive(Clone, PartialEq, Eq)]
pub struct RestrictedGroup {
    dim: u64,
    /// Original site indices, ascending.
    sites: Vec<usize>,
    /// Restrictions of the parent's generators (phase-free, possibly
    /// dependent or identity).
    generators: Vec<PauliOperator>,
}

impl fmt::Debug for RestrictedGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "RestrictedGroup(d={}, sites={:?}) [", self.dim, self.sites)?;
        for g in &self.generators {
            writeln!(f, "  {g}")?;
        }
        write!(f, "]")
    }
}

impl RestrictedGroup {
    pub fn dim(&self) -> u64 {
        self.dim
    }

    /// Original site indices this restriction keeps, ascending.
    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    pub fn qudits(&self) -> usize {
        self.sites.len()
    }

    /// Restrictions of the parent generators, in the parent's order.
    pub fn generators(&self) -> &[PauliOperator] {
        &self.generators
    }

    fn tableau(&self) -> ResidueMatrix {
        let rows: Vec<ResidueVector> = self.generators.iter().map(|g| g.exponent_row()).collect();
        ResidueMatrix::new(self.dim, 2 * self.sites.len(), rows).expect("uniform shape")
    }

    /// Membership up to phase (γ is adjoined, so phases are free).
    pub fn contains(&self, op: &PauliOperator) -> Result<bool, GroupError> {
        if op.dim() != self.dim || op.qudits() != self.sites.len() {
            return Err(GroupError::Pauli(PauliError::Mismatch {
                left_dim: self.dim,
                left_qudits: self.sites.len(),
                right_dim: op.dim(),
                right_qudits: op.qudits(),
            }));
        }
        Ok(self.tableau().contains_in_row_span(&op.exponent_row())?)
    }

    /// Canonical tableau of the restriction's exponent span. Two restricted
    /// groups are equal as groups iff these agree (phases are free on both
    /// sides), which is how generating-set invariance is checked.
    pub fn canonical_tableau(&self) -> ResidueMatrix {
        self.tableau().howell_form()
    }

    pub fn same_group(&self, other: &RestrictedGroup) -> bool {
        self.dim == other.dim
            && self.sites == other.sites
            && self.canonical_tableau() == other.canonical_tableau()
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    let (mut a, mut b) = (a, b);
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}
