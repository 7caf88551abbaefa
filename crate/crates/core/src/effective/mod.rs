//! Analytic effective-coupling model: dispersive elimination of the cavity,
//! Bessel sidebands of the modulated qubits and the resulting secular
//! couplings.

pub mod bessel;
pub mod dispersive;
pub mod dynamics;
pub mod secular;

pub use bessel::{bessel_j, bessel_j_orders};
pub use dispersive::{
    dispersive_couplings, dispersive_transform_residual, effective_hamiltonian, single_excitation_spectrum,
    DispersiveCouplings,
};
pub use dynamics::{evolve_effective, secular_terms, EffectiveModel, EffectiveSystem, PairTerm};
pub use secular::{graf_params, optimal_drive_amplitude, secular_coupling, CouplingMethod, GrafParams, SecularCoupling};
