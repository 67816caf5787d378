//! Simulator for stimulated polarization waves ("quantum domino") in short
//! chains of coupled spins-1/2.
//!
//! * [`chain`]: spin-system model, Hamiltonians, conditional resonances.
//! * [`gate`]: exact CNOT-chain reference model.
//! * [`propagator`]: driven state-vector dynamics and polarization observables.
//! * [`spectroscopy`]: population states and linear-response stick spectra.
//! * [`config`] and [`runner`]: experiment files and the command implementations
//!   behind the `domino` binary.

pub mod chain;
pub mod config;
pub mod error;
pub mod gate;
pub mod propagator;
pub mod runner;
pub mod spectroscopy;
pub mod state;

pub use chain::{ChainSpec, CouplingForm, DriveSpec, Harmonic, HermitianOperator, SpinState};
pub use error::{Error, Result};
pub use propagator::{Method, SimParams, Trajectory};
pub use state::StateVector;
