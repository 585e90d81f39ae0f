//! Adiabatic quantum state transfer through topological edge states of
//! Su-Schrieffer-Heeger type qubit chains.
//!
//! The chain Hamiltonian `H = Σ_x J_x (σ⁺_x σ⁻_{x+1} + h.c.)` with
//! `J_x = g0 + g1 cos(2πx/p + θ)` is simulated in its one-excitation sector.

pub mod cli;
pub mod dynamics;
pub mod edgestates;
pub mod ensemble;
pub mod error;
pub mod hamiltonian;
pub mod model;
pub mod protocols;
pub mod state;

pub use error::{Error, Result};
pub use state::WaveVector;
