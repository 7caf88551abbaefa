//! Acoustic plane-wave parameters that produce a target modulation ratio D/M.
//!
//! For u = A₀ e^{ikx} with k = M/c the strain is ε ≈ kA₀, and the qubit
//! frequency shift is D = ε · (deformation potential).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Unit of a deformation potential given per unit strain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateUnit {
    /// Hz per strain; multiplied by 2π on input.
    Cyclic,
    /// rad/s per strain.
    Angular,
}

impl RateUnit {
    pub fn to_angular(self, value: f64) -> f64 {
        match self {
            RateUnit::Cyclic => 2.0 * PI * value,
            RateUnit::Angular => value,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaterialParams {
    /// rad/s per unit strain.
    pub deformation_potential: f64,
    /// m/s
    pub sound_speed: f64,
}

impl MaterialParams {
    pub fn new(deformation_potential: f64, unit: RateUnit, sound_speed: f64) -> Result<Self> {
        let m = Self {
            deformation_potential: unit.to_angular(deformation_potential),
            sound_speed,
        };
        m.validate()?;
        Ok(m)
    }

    /// c = 7×10³ m/s with the given deformation potential.
    pub fn diamond(deformation_potential: f64, unit: RateUnit) -> Result<Self> {
        Self::new(deformation_potential, unit, 7.0e3)
    }

    pub fn validate(&self) -> Result<()> {
        for (field, v) in [
            ("deformation_potential", self.deformation_potential),
            ("sound_speed", self.sound_speed),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::spec(field, "must be positive"));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AcousticRequirement {
    /// k = M/c (rad/m).
    pub wavenumber: f64,
    /// 1/λ (cycles per m).
    pub spatial_frequency: f64,
    /// λ = 2π/k (m).
    pub wavelength: f64,
    /// A₀ (m).
    pub displacement_amplitude: f64,
    pub strain_amplitude: f64,
    /// D (rad/s).
    pub modulation_amplitude: f64,
}

/// Plausible acoustic wavelengths for GHz drives in solids (m).
pub const WAVELENGTH_RANGE: (f64, f64) = (0.1e-6, 100e-6);

pub fn acoustic_wave_requirements(
    material: &MaterialParams,
    frequency: f64,
    target_ratio: f64,
) -> Result<AcousticRequirement> {
    material.validate()?;
    if !(frequency > 0.0 && frequency.is_finite()) {
        return Err(Error::drive("frequency", "M must be positive"));
    }
    if !(target_ratio > 0.0 && target_ratio.is_finite()) {
        return Err(Error::drive("target_ratio", "D/M must be positive"));
    }
    let k = frequency / material.sound_speed;
    let wavelength = 2.0 * PI / k;
    let modulation = target_ratio * frequency;
    let strain = modulation / material.deformation_potential;
    let req = AcousticRequirement {
        wavenumber: k,
        spatial_frequency: 1.0 / wavelength,
        wavelength,
        displacement_amplitude: strain / k,
        strain_amplitude: strain,
        modulation_amplitude: modulation,
    };
    if !(WAVELENGTH_RANGE.0..=WAVELENGTH_RANGE.1).contains(&wavelength) {
        log::warn!(
            "acoustic wavelength {:.3e} m outside the usual {:.0e}..{:.0e} m range",
            wavelength,
            WAVELENGTH_RANGE.0,
            WAVELENGTH_RANGE.1
        );
    }
    Ok(req)
}

/// The same nominal deformation potential read as cyclic and as angular.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConventionPair {
    pub nominal: f64,
    pub as_cyclic: AcousticRequirement,
    pub as_angular: AcousticRequirement,
}

pub fn requirements_both_conventions(
    nominal_potential: f64,
    sound_speed: f64,
    frequency: f64,
    target_ratio: f64,
) -> Result<ConventionPair> {
    let cyc = MaterialParams::new(nominal_potential, RateUnit::Cyclic, sound_speed)?;
    let ang = MaterialParams::new(nominal_potential, RateUnit::Angular, sound_speed)?;
    Ok(ConventionPair {
        nominal: nominal_potential,
        as_cyclic: acoustic_wave_requirements(&cyc, frequency, target_ratio)?,
        as_angular: acoustic_wave_requirements(&ang, frequency, target_ratio)?,
    })
}
