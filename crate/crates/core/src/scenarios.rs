//! Reference parameter sets: qubits at 0, 6 and 8 GHz, a cavity 250 GHz
//! below, g = 5 GHz, γ_a = 25 GHz and γ_σ = 5 MHz (all 2π×).

use std::f64::consts::PI;

use crate::hamiltonian::DriveParams;
use crate::space::SystemSpec;
use crate::units::{TWO_PI_GHZ, TWO_PI_MHZ};

pub const CAVITY_DETUNING: f64 = 250.0 * TWO_PI_GHZ;
pub const COUPLING: f64 = 5.0 * TWO_PI_GHZ;
pub const CAVITY_DECAY: f64 = 25.0 * TWO_PI_GHZ;
pub const QUBIT_DECAY: f64 = 5.0 * TWO_PI_MHZ;
/// D/M maximizing the first-order coupling for counter-phased drives.
pub const OPTIMAL_RATIO: f64 = 0.92;

/// Qubits at the given detunings (GHz) with the reference cavity and losses.
pub fn lossy_system(detunings_ghz: &[f64]) -> SystemSpec {
    SystemSpec::lossless(
        detunings_ghz.iter().map(|d| d * TWO_PI_GHZ).collect(),
        CAVITY_DETUNING,
        COUPLING,
    )
    .with_losses(CAVITY_DECAY, QUBIT_DECAY, 0.0)
}

/// Two qubits at 0 and 6 GHz.
pub fn pair() -> SystemSpec {
    lossy_system(&[0.0, 6.0])
}

/// Three qubits at 0, 6 and 8 GHz.
pub fn triple() -> SystemSpec {
    lossy_system(&[0.0, 6.0, 8.0])
}

/// Three qubits at 0, 6 GHz and a third close to the second.
pub fn crowded_triple(third_ghz: f64) -> SystemSpec {
    lossy_system(&[0.0, 6.0, third_ghz])
}

/// Pair with pure dephasing added to both qubits.
pub fn dephased_pair(dephasing: f64) -> SystemSpec {
    let mut spec = pair();
    spec.qubit_dephasing = vec![dephasing; 2];
    spec
}

/// Phases φ_1 = 0 and φ_i = π for every other qubit.
pub fn counter_phases(num_qubits: usize) -> Vec<f64> {
    (0..num_qubits).map(|q| if q == 0 { 0.0 } else { PI }).collect()
}

/// Equal ratios of 0.92 with counter phases, at drive frequency `m`.
pub fn optimal_drive(num_qubits: usize, m: f64) -> DriveParams {
    DriveParams::from_ratios(m, &vec![OPTIMAL_RATIO; num_qubits], counter_phases(num_qubits))
}
