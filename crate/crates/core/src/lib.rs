//! Probabilistic elementary gates for qubits encoded in superposed coherent
//! states `x|α⟩ + y|−α⟩`.
//!
//! The crate is layered:
//!
//! * [`fock`]: dense numerics on truncated multimode Fock spaces
//!   (coherent states, displacements, beam splitters, photon subtraction,
//!   on/off and photon-number detection, homodyne projection, partial trace).
//! * [`coherent`]: exact algebra over the nonorthogonal basis
//!   `{|α⟩, |−α⟩}^⊗n` and the closed-form gate actions as coefficient maps.
//! * [`designs`]: parameter solvers for the phase, controlled-phase and
//!   Hadamard gates, plus the assembled ideal gate pipelines.
//! * [`physical`]: full Fock-space simulations of the optical circuits with
//!   tap beam splitters, detectors and post-selection.

pub mod coherent;
pub mod designs;
mod error;
pub mod fock;
pub mod physical;

pub use error::{CatError, Result};

/// Complex scalar used throughout the crate.
pub type C64 = num_complex::Complex64;
