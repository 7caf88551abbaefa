//! Simulation and analysis of acoustically modulated qubits that interact
//! through a shared, dispersively detuned cavity mode.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod drive_design;
pub mod effective;
pub mod error;
pub mod hamiltonian;
pub mod lindblad;
pub mod ode;
pub mod scenarios;
pub mod space;
pub mod spectrum;
pub mod sweep;
pub mod units;

pub use error::{Error, Result};
pub use hamiltonian::DriveParams;
pub use space::{DensityMatrix, OperatorMatrix, SpaceLayout, SystemSpec, C64};
pub use sweep::{ModelKind, PopulationMap, Simulation, SweepConfig};
