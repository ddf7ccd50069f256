//! Simulation library for stepwise generation of GHZ (spin-cat) states with
//! laser-driven fermionic atoms in a harmonically confined optical lattice.
//!
//! The crate covers the full pipeline:
//!
//! - [`fock`]: bit-encoded fermionic Fock basis for a 1D two-species chain,
//!   with sign-correct elementary operator actions.
//! - [`operators`]: Hubbard + drive + trap + detuning Hamiltonians in the lab
//!   or drive-eigenstate (rotated) frame, as sparse/matrix-free operators.
//! - [`propagator`]: certified time evolution (dense eigendecomposition or
//!   adaptive Lanczos/Krylov), including slowly time-dependent Hamiltonians.
//! - [`schedule`] / [`protocol`]: compilation of physical parameters into
//!   pulse schedules (preparation, generation, hole correction, reversal,
//!   precession) and their execution.
//! - [`analysis`]: GHZ targets, fidelities, accumulated-phase formulas,
//!   doublon observables and seeded noise Monte Carlo.
//! - [`spectral`]: DFT-based oscillation-frequency extraction.
//! - [`holes3d`]: statistics of randomly sprinkled holes in a 3D lattice and
//!   the aggregate doublon measurement signal.
//! - [`lattice`]: band-structure/Wannier calculator deriving J, U, trap
//!   curvature and the gravitational trap-center shift from beam parameters.
//!
//! Energies are expressed in units of the tunneling rate J and times in 1/J
//! unless stated otherwise; [`lattice`] converts from physical inputs.

pub mod analysis;
mod error;
pub mod fock;
pub mod holes3d;
pub mod lattice;
pub mod operators;
pub mod propagator;
pub mod protocol;
pub mod report;
pub mod schedule;
pub mod spectral;

pub use error::{Error, Result};

/// Complex double-precision scalar used throughout.
pub type C64 = num_complex::Complex64;
