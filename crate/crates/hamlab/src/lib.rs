//! Workbench for local Hamiltonians on small qudit chains.
//!
//! Everything here is built around one object: a Hamiltonian given as a sum
//! of Hermitian terms, each supported on a few sites of a chain with
//! per-site local dimensions. On top of that sit:
//!
//! - exact spectra, Gibbs states, correlations, entanglement ([`spectra`])
//! - mean-field theory for the classical Ising model ([`meanfield`])
//! - tensor networks: contraction, MPS, single-site DMRG, MERA ([`tensornet`])
//! - Bravyi's quantum 2-SAT algorithm ([`qsat2`])
//! - the Feynman–Kitaev circuit-to-Hamiltonian compiler ([`clock`])
//! - 3-local → 2-local perturbation gadgets ([`gadgets`])
//! - the commuting-operator structure decomposition ([`commuting`])
//! - Chebyshev approximate ground-space projectors ([`agsp`])
//!
//! Scales are deliberately small ("desk scale"): dense linear algebra up to
//! ~2^20 amplitudes with a matrix-free Lanczos path beyond that. Every
//! construction is meant to be cross-checked against exact diagonalization.

pub mod agsp;
pub mod clock;
pub mod commuting;
pub mod error;
pub mod gadgets;
pub mod ham;
pub mod linalg;
pub mod meanfield;
pub mod qsat2;
pub mod spectra;
pub mod tensornet;

pub use error::{Error, Result};

/// Version of the on-disk JSON/CSV schemas emitted and consumed by the CLI.
pub const SCHEMA_VERSION: &str = "1";
