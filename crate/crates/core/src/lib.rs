//! Simulation of a particle in one-dimensional potentials on an `n`-qubit
//! position register.
//!
//! The crate covers four layers:
//!
//! * [`grid`] and [`potential`]: the centered position/momentum lattices and
//!   piecewise-constant potentials, including the three builtin scenarios
//!   (free particle, square well, barrier).
//! * [`splitop`]: the symmetric split-operator propagator
//!   `e^{-iVdt/2} F^-1 e^{-iK dt} F e^{-iVdt/2}`, an exact
//!   eigendecomposition propagator used as an oracle, and probability metrics.
//! * [`circuit`]: a gate-level compilation of one propagator step (centered
//!   QFT plus Walsh-decomposed diagonal phase blocks) with a statevector
//!   evaluator.
//! * [`nmr`]: an emulation of the ancilla-assisted NMR readout, where spatial
//!   probabilities end up in the intensities of the ancilla's spectral lines.
//!
//! All numerics are generic over the scalar type through [`Real`]; the
//! aliases at the crate root fix the scalar to `f64`, which is what the
//! tolerances quoted throughout the docs assume.

// `!(x > 0.0)` guards deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod circuit;
pub mod error;
pub mod grid;
pub mod nmr;
pub mod potential;
pub mod scalar;
pub mod splitop;

pub use error::{Error, Result};
pub use scalar::{Complex, Real};

/// Position/momentum lattice over `f64`.
pub type Grid = grid::GridSpec<f64>;
/// Register wavefunction over `f64`.
pub type Wavefunction = grid::Wavefunction<f64>;
/// Tabulated potential over `f64`.
pub type PotentialTable = potential::PotentialTable<f64>;
/// Potential description over `f64`.
pub type PotentialSpec = potential::PotentialSpec<f64>;
/// Trotter step plan over `f64`.
pub type TrotterPlan = splitop::TrotterPlan<f64>;
/// Evolution history over `f64`.
pub type EvolutionRecord = splitop::EvolutionRecord<f64>;
/// Gate sequence over `f64` angles.
pub type Circuit = circuit::Circuit<f64>;
/// Single gate over `f64` angles.
pub type Gate = circuit::Gate<f64>;
/// Dense complex matrix over `f64`.
pub type CMatrix = scalar::CMatrix<f64>;
/// Five-spin system parameters in Hz over `f64`.
pub type SpinSystem = nmr::SpinSystem<f64>;
/// Ancilla+register deviation populations over `f64`.
pub type DeviationState = nmr::DeviationState<f64>;
