//! Continuous-time quantum-walk search on reversible Markov chains.
//!
//! The crate is organised bottom-up:
//!
//! * [`chain`]: validated chains, the lazy transform, interpolated chains.
//! * [`spectral`]: discriminant matrices and the marked/unmarked split of the
//!   principal eigenvector.
//! * [`hitting`]: hitting time, interpolated and extended hitting times, and a
//!   Monte-Carlo random-walk oracle.
//! * [`edge`]: the edge-space Hamiltonian, both as a (2n-1)-dimensional
//!   reduced operator and as dense n^2 x n^2 validation builds.
//! * [`cg_prime`]: the edge-walk search that evolves under a decoupled
//!   Hamiltonian and then rotates onto the marked edge state.
//! * [`interpolated`]: search by phase randomization on the interpolated
//!   chain.
//! * [`graphs`]: benchmark graph families.
//! * [`harness`]: parameter sweeps, CSV/JSON output and log-log fits.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cg_prime;
pub mod chain;
pub mod config;
pub mod edge;
pub mod error;
pub mod graphs;
pub mod harness;
pub mod hitting;
pub mod interpolated;
pub mod linalg;
pub mod spectral;

pub use chain::{
    make_lazy, stationary_distribution, stationary_interpolated, validate_chain, interpolate_chain,
    StationaryDistribution, StochasticChain,
};
pub use error::{Error, Result};
