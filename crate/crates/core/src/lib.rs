//! Time-dependent metric operators for non-Hermitian Hamiltonians.
//!
//! The metric `Θ` of a quasi-Hermitian `H` satisfies `H†Θ = ΘH`. When `H`
//! depends on time, `Θ` obeys the flow `Θ̇ = i(ΘH − H†Θ)`, which conserves
//! `⟨Ψ|ΘΦ⟩` along solutions of the Schrödinger equation. This crate evolves
//! that flow, builds static metrics, computes adiabatically switched
//! S-matrices, and implements two model systems: a two-level Pauli
//! Hamiltonian and the cubic oscillator `p² + q² + igq³` in Moyal phase space.

pub mod cli;
pub mod config;
pub mod error;
pub mod flow;
pub mod integrate;
pub mod linalg;
pub mod moyal;
pub mod output;
pub mod scattering;
pub mod schedule;
pub mod serde_matrix;
pub mod two_level;

pub use error::{Error, Result};
pub use linalg::{BiorthogonalSystem, ComplexMatrix, StateVector};
