//! Tensor networks: a labeled-leg contraction engine, matrix product
//! states, the single-site DMRG optimizer, and binary 1D MERA with
//! causal-cone contraction.

mod dmrg;
mod mera;
mod mps;
mod tensor;

pub use dmrg::{dmrg_run, DmrgResult};
pub use mera::{mera_build_random, mera_causal_rdm, mera_local_expectation, MeraLayer, MeraNetwork};
pub use mps::{mps_expectation, mps_from_state, mps_inner, Canonical, Mps};
pub use tensor::{contract, Tensor, TensorNetwork};
