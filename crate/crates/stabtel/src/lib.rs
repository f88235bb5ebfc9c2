//! Qudit stabilizer teleportation toolkit: dense density-matrix oracle,
//! protocol synthesis, and the command-line front end.
//!
//! The exact algebraic layers (modular linear algebra, Pauli phase
//! arithmetic, stabilizer groups, decomposition search) live in
//! [`stabtel_core`], re-exported here as [`core`]. This crate adds:
//!
//! * [`cmat`] — dense complex kernel (products, Kronecker, partial trace,
//!   monomial operators, Hermitian Jacobi eigensolver).
//! * [`dense`] — the brute-force simulation oracle: Pauli matrices,
//!   eigenvalue-labeled projectors, stabilizer states, protocol execution
//!   and trace-distance scoring.
//! * [`synth`] — receiver-unitary construction, sender measurement
//!   families, outcome-indexed corrections, protocol assembly.
//! * [`problem`] — problem description files (JSON and line-oriented
//!   text), the built-in demo cases.
//! * [`cli`] — the `stabtel` command implementations and report formats.

pub use stabtel_core as core;

pub mod cli;
pub mod cmat;
pub mod dense;
pub mod problem;
pub mod synth;
