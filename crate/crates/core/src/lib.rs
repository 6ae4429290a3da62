//! Input-output hierarchical equations of motion (io-HEOM) for open quantum
//! systems.
//!
//! The crate evolves extended auxiliary density matrices (ADMs) to compute:
//!
//! * reduced system dynamics for baths with exponential correlation
//!   decompositions (regular HEOM, canonical and dimensionally-uniform
//!   variants),
//! * environmental observables and dynamics under wave-packet bath
//!   preparations (the input-output extension with dynamic and static
//!   fields),
//! * single-photon wave-packet scattering on a two-level emitter in the
//!   Markovian limit (the input-output Lindblad machine), and
//! * closed-form and brute-force verification oracles (pure dephasing,
//!   single-excitation analytics, truncated-Fock pseudomode simulation).
//!
//! # Conventions
//!
//! * ħ = 1 throughout; frequencies, rates and energies share units.
//! * Density-matrix vectorization is column-stacking (see [`operators`]).
//! * The two-level basis is (|e>, |g>) with σ_z = diag(1, −1).

pub mod correlations;
pub mod error;
pub mod faddeeva;
pub mod hierarchy;
pub mod integrator;
pub mod markovian;
pub mod operators;
pub mod oracles;
pub mod quad;
pub mod wick;

pub use error::{CoreError, Result};
pub use operators::{ComplexMatrix, SuperOperator};
