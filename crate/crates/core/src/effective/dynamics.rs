//! Qubit-only dynamics under the effective Hamiltonians.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::dispersive::{dispersive_couplings, DispersiveCouplings};
use super::secular::{secular_coupling, CouplingMethod, SecularCoupling};
use crate::error::{Error, Result};
use crate::hamiltonian::DriveParams;
use crate::lindblad::{
    channels_from_spec, drive_terms, evolve_generator, CollapseChannel, Coefficient, EvolveOptions,
    Generator, TimeDependentTerm, Trajectory,
};
use crate::space::{lowering_operator, DensityMatrix, OperatorMatrix, SpaceLayout, SystemSpec, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EffectiveModel {
    /// Σ_i ω̃_i(t) σ_i†σ_i + Σ_ij J_ij σ_i†σ_j in the lab (rotating) frame.
    TimeDependent,
    /// Interaction picture, one secular sideband term per pair.
    Secular,
}

/// Secular term kept for the pair (i, j): G e^{−iεt} σ_i†σ_j + h.c. with
/// N = round(δ_ij / M) and ε = δ_ij − N M. Without drive N = 0, G = J_ij.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairTerm {
    pub pair: (usize, usize),
    pub coupling: SecularCoupling,
    /// Residual detuning ε (rad/s).
    pub residual_detuning: f64,
}

pub fn secular_terms(couplings: &DispersiveCouplings, drive: &DriveParams) -> Result<Vec<PairTerm>> {
    let n = couplings.num_qubits();
    drive.validate(n)?;
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let delta = couplings.effective_detuning(i, j);
            let order = if drive.frequency > 0.0 {
                (delta / drive.frequency).round() as i64
            } else {
                0
            };
            let coupling = secular_coupling(couplings.coupling(i, j), drive, (i, j), order, CouplingMethod::ClosedForm)?;
            out.push(PairTerm {
                pair: (i, j),
                coupling,
                residual_detuning: delta - order as f64 * drive.frequency,
            });
        }
    }
    Ok(out)
}

/// Qubit-only model: couplings plus any qubit collapse channels.
#[derive(Clone, Debug)]
pub struct EffectiveSystem {
    pub couplings: DispersiveCouplings,
    pub channels: Vec<CollapseChannel>,
}

impl EffectiveSystem {
    pub fn closed(couplings: DispersiveCouplings) -> Self {
        Self {
            couplings,
            channels: Vec::new(),
        }
    }

    /// Couplings from `spec`; qubit decay and dephasing are kept when
    /// `with_losses` is set. Cavity loss has no qubit-only counterpart.
    pub fn from_spec(spec: &SystemSpec, with_losses: bool) -> Result<Self> {
        let couplings = dispersive_couplings(spec)?;
        let channels = if with_losses {
            channels_from_spec(spec, &SpaceLayout::qubits_only(spec.num_qubits()))?
        } else {
            Vec::new()
        };
        Ok(Self { couplings, channels })
    }

    pub fn layout(&self) -> SpaceLayout {
        SpaceLayout::qubits_only(self.couplings.num_qubits())
    }

    pub fn generator(&self, drive: &DriveParams, model: EffectiveModel) -> Result<Generator> {
        let n = self.couplings.num_qubits();
        drive.validate(n)?;
        let layout = self.layout();
        let lowering: Vec<DMatrix<C64>> = (0..n)
            .map(|q| lowering_operator(&layout, q).map(OperatorMatrix::into_matrix))
            .collect::<Result<_>>()?;
        let d = layout.dim();
        match model {
            EffectiveModel::TimeDependent => {
                let mut h0 = DMatrix::<C64>::zeros(d, d);
                for i in 0..n {
                    let up = lowering[i].adjoint();
                    h0 += &up * &lowering[i] * C64::new(self.couplings.detunings[i], 0.0);
                    for j in 0..n {
                        h0 += &up * &lowering[j] * C64::new(self.couplings.coupling(i, j), 0.0);
                    }
                }
                Generator::new(&h0, &drive_terms(drive, &layout), &self.channels)
            }
            EffectiveModel::Secular => {
                let mut terms = Vec::new();
                for term in secular_terms(&self.couplings, drive)? {
                    let (i, j) = term.pair;
                    let hop = lowering[i].adjoint() * &lowering[j];
                    terms.push(TimeDependentTerm {
                        operator: hop.adjoint(),
                        coefficient: Coefficient::Phasor {
                            amplitude: term.coupling.value.conj(),
                            frequency: -term.residual_detuning,
                        },
                    });
                    terms.push(TimeDependentTerm {
                        operator: hop,
                        coefficient: Coefficient::Phasor {
                            amplitude: term.coupling.value,
                            frequency: term.residual_detuning,
                        },
                    });
                }
                Generator::new(&DMatrix::zeros(d, d), &terms, &self.channels)
            }
        }
    }

    pub fn evolve(
        &self,
        drive: &DriveParams,
        model: EffectiveModel,
        rho0: &DensityMatrix,
        t_end: f64,
        sample_count: usize,
        options: &EvolveOptions,
    ) -> Result<Trajectory> {
        let layout = self.layout();
        if rho0.dim() != layout.dim() {
            return Err(Error::DimensionMismatch {
                expected: layout.dim(),
                found: rho0.dim(),
            });
        }
        let generator = self.generator(drive, model)?;
        evolve_generator(&generator, &layout, rho0, t_end, sample_count, options)
    }
}

/// Closed-system evolution under the effective model on the qubit-only space.
pub fn evolve_effective(
    couplings: &DispersiveCouplings,
    drive: &DriveParams,
    model: EffectiveModel,
    rho0: &DensityMatrix,
    t_end: f64,
    sample_count: usize,
    options: &EvolveOptions,
) -> Result<Trajectory> {
    EffectiveSystem::closed(couplings.clone()).evolve(drive, model, rho0, t_end, sample_count, options)
}
