//! Simulator and analysis toolkit for the one-clean-qubit (DQC1) model of
//! normalised trace estimation.
//!
//! * [`qmath`]: dense density matrices, partial trace, entropy, fidelity.
//! * [`dqc1`]: input/output states of the trace estimation circuit.
//! * [`sampling`]: finite-shot estimators, shot budgets, reduced chi-square.
//! * [`correlations`]: mutual information, discord, concurrence, tangle.
//! * [`clifford`]: Pauli propagation and the zero-discord check for Clifford circuits.
//! * [`tomography`]: 36-setting two-qubit tomography and reconstruction.
//! * [`sweep`]: theta sweeps combining the above, evaluated data-parallel.

pub mod clifford;
pub mod correlations;
pub mod dqc1;
pub mod error;
pub mod exec;
pub mod qmath;
pub mod random;
pub mod rng;
pub mod sampling;
pub mod sweep;
pub mod tomography;

pub use error::{Error, Result};
pub use exec::Execution;
pub use qmath::{DensityMatrix, HermitianObservable};
