//! Dense numerics on truncated multimode Fock spaces.
//!
//! States are row-major tensors with mode 0 most significant. Every
//! operation returns a new value; measurement branches are computed as POVM
//! arithmetic, never sampled.

mod density;
mod kernels;
mod measure;
mod ops;
mod state;

pub use density::{DensityOperator, InvariantCheck};
pub use measure::{hermite_functions, quadrature_bra, Quadrature};
pub use ops::{beamsplitter_blocks, displacement_matrix};
pub use state::{coherent_tail_mass, policy_cutoff, PureFockState, Tolerances, DEFAULT_MAX_DIM};
