//! Quantum statistics of collective atomic excitations dispersively coupled to
//! a cavity mode.
//!
//! The library models an `N`-atom ensemble in the symmetric Dicke sector whose
//! photon-dressed effective Hamiltonian is diagonal in the collective basis,
//! with eigenenergies controlled by the average photon number. It computes
//!
//! * the spectrum, ground-state phase map, and level-crossing points,
//! * the generalized second-order coherence `g2(tau, t)` of the collective
//!   excitations by exact unitary dynamics, by first-order perturbative closed
//!   forms near the two relevant near-degenerate subspaces, and by
//!   steady-state Lindblad dynamics with collective decay,
//! * a full Fock-space oracle used to validate the dispersive effective model.
//!
//! All energies are in a common arbitrary frequency unit with `hbar = 1`.

pub mod dynamics;
pub mod error;
pub mod model;
pub mod numerics;
pub mod perturbation;
pub mod spin;

pub use dynamics::{G2Method, G2Sample, TimeReference};
pub use error::{Error, Result};
pub use model::{ModelParams, SpectrumResult};
pub use numerics::{C64, CMatrix, CVector, EigenSystem};
pub use spin::{Collective, DensityMatrix, DickeBasis, HalfInteger, PureState, QuantumState};
