//! Exact pure-dephasing dynamics of two double-well impurity qubits immersed
//! in a three-dimensional Bose-Einstein condensate.
//!
//! The crate is organised bottom-up:
//!
//! - [`params`]: physical and dimensionless parameter sets, parameter files.
//! - [`state`]: two-qubit density matrices in the `(LL, LR, RL, RR)` basis.
//! - [`bogoliubov`]: dispersion, thermal occupation and geometric factors.
//! - [`quadrature`]: adaptive Gauss-Kronrod integration of vector integrands.
//! - [`decoherence`]: the decoherence factors, their rates, the induced
//!   `σz σz` phase and an independent discretised-bath cross-check.
//! - [`dynamics`]: the exact dephasing map, the time-local master equation
//!   and divisibility diagnostics.
//! - [`correlations`]: concurrence, quantum discord and mutual information.
//! - [`scenarios`]: dynamics classification, parameter scans and
//!   entanglement generation runs.
//! - [`output`]: CSV encoders for profiles, trajectories and scans.
//!
//! Units throughout: `ħ = m_B = σ = 1`, so energies are measured in
//! `ħ²/(m_B σ²)` and times in `m_B σ²/ħ`.

pub mod bogoliubov;
pub mod correlations;
pub mod decoherence;
pub mod dynamics;
mod error;
pub mod output;
pub mod params;
pub mod quadrature;
pub mod scenarios;
pub mod state;

pub use error::{Error, Result};
pub use params::{PhysicalParams, ReservoirParams};
pub use state::{Sign, TwoQubitState};
