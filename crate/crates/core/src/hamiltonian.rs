//! Jaynes–Cummings Hamiltonian of N qubits sharing one cavity mode, and its
//! acoustically modulated version. ħ = 1: energies are angular frequencies.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::{lowering_operator, OperatorMatrix, SpaceLayout, SystemSpec, C64};

/// Classical acoustic drive δ_i → δ_i + D_i cos(M t + φ_i).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriveParams {
    /// Drive frequency M (rad/s).
    pub frequency: f64,
    /// Modulation amplitudes D_i (rad/s).
    pub amplitudes: Vec<f64>,
    /// Drive phases φ_i (rad).
    pub phases: Vec<f64>,
}

impl DriveParams {
    pub fn new(frequency: f64, amplitudes: Vec<f64>, phases: Vec<f64>) -> Self {
        Self {
            frequency,
            amplitudes,
            phases,
        }
    }

    /// Amplitudes set to `ratios[i] · M`.
    pub fn from_ratios(frequency: f64, ratios: &[f64], phases: Vec<f64>) -> Self {
        Self {
            frequency,
            amplitudes: ratios.iter().map(|r| r * frequency).collect(),
            phases,
        }
    }

    pub fn undriven(num_qubits: usize) -> Self {
        Self {
            frequency: 0.0,
            amplitudes: vec![0.0; num_qubits],
            phases: vec![0.0; num_qubits],
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_driven(&self) -> bool {
        self.amplitudes.iter().any(|&d| d != 0.0)
    }

    /// φ_i − φ_j
    pub fn relative_phase(&self, i: usize, j: usize) -> f64 {
        self.phases[i] - self.phases[j]
    }

    pub fn validate(&self, num_qubits: usize) -> Result<()> {
        if self.amplitudes.len() != num_qubits {
            return Err(Error::drive(
                "amplitudes",
                format!("expected {num_qubits} entries, got {}", self.amplitudes.len()),
            ));
        }
        if self.phases.len() != num_qubits {
            return Err(Error::drive(
                "phases",
                format!("expected {num_qubits} entries, got {}", self.phases.len()),
            ));
        }
        if self
            .amplitudes
            .iter()
            .chain(&self.phases)
            .chain([&self.frequency])
            .any(|v| !v.is_finite())
        {
            return Err(Error::drive("drive", "all parameters must be finite"));
        }
        if self.amplitudes.iter().any(|&d| d < 0.0) {
            return Err(Error::drive("amplitudes", "D_i must be non-negative"));
        }
        if self.frequency < 0.0 || (self.is_driven() && self.frequency == 0.0) {
            return Err(Error::drive("frequency", "M must be positive when driven"));
        }
        Ok(())
    }

    /// D_i cos(M t + φ_i)
    pub fn shift(&self, qubit: usize, t: f64) -> f64 {
        self.amplitudes[qubit] * (self.frequency * t + self.phases[qubit]).cos()
    }
}

/// δ_i + D_i cos(M t + φ_i)
pub fn modulated_frequency(spec: &SystemSpec, drive: &DriveParams, qubit: usize, t: f64) -> Result<f64> {
    let n = spec.num_qubits();
    if qubit >= n || qubit >= drive.num_qubits() {
        return Err(Error::IndexOutOfRange {
            index: qubit,
            count: n.min(drive.num_qubits()),
        });
    }
    Ok(spec.qubit_detunings[qubit] + drive.shift(qubit, t))
}

/// H = Σ_i δ_i σ_i†σ_i − Δ a†a + g Σ_i (σ_i a† + σ_i† a)
pub fn h_static(spec: &SystemSpec, layout: &SpaceLayout) -> Result<OperatorMatrix> {
    check_layout(spec, layout)?;
    let d = layout.dim();
    let mut h = DMatrix::<C64>::zeros(d, d);
    for k in 0..d {
        let mut e = -spec.cavity_detuning * layout.photon_number(k) as f64;
        for q in 0..spec.num_qubits() {
            if layout.is_excited(k, q) {
                e += spec.qubit_detunings[q];
            }
        }
        h[(k, k)] = C64::new(e, 0.0);
    }
    if let Some(cav) = layout.cavity_index() {
        let a = lowering_operator(layout, cav)?.into_matrix();
        let g = C64::new(spec.coupling, 0.0);
        for q in 0..spec.num_qubits() {
            let s = lowering_operator(layout, q)?.into_matrix();
            let jc = &s * a.adjoint();
            h += (&jc + jc.adjoint()) * g;
        }
    }
    Ok(OperatorMatrix::hermitian_unchecked(h))
}

/// h_static with each δ_i replaced by the modulated frequency at time `t`.
pub fn h_at(spec: &SystemSpec, drive: &DriveParams, layout: &SpaceLayout, t: f64) -> Result<OperatorMatrix> {
    drive.validate(spec.num_qubits())?;
    let mut h = h_static(spec, layout)?.into_matrix();
    for q in 0..spec.num_qubits() {
        let shift = drive.shift(q, t);
        if shift == 0.0 {
            continue;
        }
        for k in 0..layout.dim() {
            if layout.is_excited(k, q) {
                h[(k, k)].re += shift;
            }
        }
    }
    Ok(OperatorMatrix::hermitian_unchecked(h))
}

fn check_layout(spec: &SystemSpec, layout: &SpaceLayout) -> Result<()> {
    spec.validate()?;
    if layout.num_qubits() != spec.num_qubits() {
        return Err(Error::DimensionMismatch {
            expected: spec.num_qubits(),
            found: layout.num_qubits(),
        });
    }
    Ok(())
}
