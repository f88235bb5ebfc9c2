//! Exact stabilizer-formalism toolkit for qudits of arbitrary dimension.
//!
//! Everything in this crate is integer arithmetic: residue vectors and
//! matrices over `Z_m` (including composite moduli), phase-tracked
//! generalized Pauli operators, stabilizer groups as validated tableaux,
//! and the search for teleportation decompositions of a stabilizer group
//! with respect to a partition of its qudits.
//!
//! The crate is `no_std` (with `alloc`); dense complex simulation, file
//! formats and the command-line front end live in the companion `stabtel`
//! crate.
//!
//! Layering, bottom up:
//!
//! * [`zmod`] — vectors/matrices over `Z_m`, Smith-style solving, Howell
//!   canonical row form (span-unique even for composite moduli).
//! * [`pauli`] — the generalized Pauli group on `n` qudits with exact
//!   phase exponents, spectra, restriction to site subsets.
//! * [`group`] — stabilizer groups, membership, restriction, canonical
//!   pattern certification.
//! * [`decomp`] — partitions and the conjugate-pair decomposition search
//!   behind the teleportation capacity analysis.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

#[cfg(all(feature = "std", not(test)))]
extern crate std;

pub mod decomp;
pub mod group;
pub mod pauli;
pub mod zmod;

pub use decomp::{CanonicalPattern, Decomposition, DecompositionError, Partition, PatternWitness};
pub use group::{GroupError, RestrictedGroup, StabilizerGroup};
pub use pauli::{PauliError, PauliOperator, SpectrumClass, SpectrumKind};
pub use zmod::{ResidueMatrix, ResidueVector, ZmodError};
