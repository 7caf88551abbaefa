//! JSON run configuration. Frequencies are cyclic (Hz), times are in ns and
//! qubits are numbered from 1; conversion to rad/s, seconds and 0-based
//! indices happens here and nowhere else.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{FrequencyGrid, ModelKind, Simulation, SweepConfig};
use crate::drive_design::{MaterialParams, RateUnit};
use crate::error::{Error, Result};
use crate::hamiltonian::DriveParams;
use crate::ode::{self, Stepper, Tolerances};
use crate::space::SystemSpec;
use crate::units::{hz_to_angular, ns_to_s};

pub const SCHEMA_VERSION: u32 = 1;

/// A rate given once for all qubits or per qubit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PerQubit {
    Shared(f64),
    Each(Vec<f64>),
}

impl Default for PerQubit {
    fn default() -> Self {
        PerQubit::Shared(0.0)
    }
}

impl PerQubit {
    fn expand(&self, n: usize) -> Vec<f64> {
        match self {
            PerQubit::Shared(v) => vec![*v; n],
            PerQubit::Each(v) => v.clone(),
        }
    }
}

fn default_fock() -> usize {
    3
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    pub qubit_detunings_hz: Vec<f64>,
    pub cavity_detuning_hz: f64,
    pub coupling_hz: f64,
    #[serde(default)]
    pub cavity_decay_hz: f64,
    #[serde(default)]
    pub qubit_decay_hz: PerQubit,
    #[serde(default)]
    pub qubit_dephasing_hz: PerQubit,
    #[serde(default = "default_fock")]
    pub fock_truncation: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveSection {
    /// Drive frequency for single runs; ignored by sweeps.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frequency_hz: Option<f64>,
    /// D_i / M
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratios: Option<Vec<f64>>,
    /// D_i in Hz; alternative to `ratios` for single runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitudes_hz: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phases_rad: Option<Vec<f64>>,
}

fn default_m_min() -> f64 {
    2e9
}
fn default_m_max() -> f64 {
    9e9
}
fn default_steps() -> usize {
    141
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    #[serde(default = "default_m_min")]
    pub m_min_hz: f64,
    #[serde(default = "default_m_max")]
    pub m_max_hz: f64,
    #[serde(default = "default_steps")]
    pub steps: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            m_min_hz: default_m_min(),
            m_max_hz: default_m_max(),
            steps: default_steps(),
        }
    }
}

fn default_t_end() -> f64 {
    20.0
}
fn default_samples() -> usize {
    401
}
fn default_excited() -> Vec<usize> {
    vec![1]
}
fn default_rtol() -> f64 {
    Tolerances::default().rtol
}
fn default_atol() -> f64 {
    Tolerances::default().atol
}
fn default_max_steps() -> usize {
    ode::DEFAULT_MAX_STEPS
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolutionSection {
    #[serde(default = "default_t_end")]
    pub t_end_ns: f64,
    /// Number of sample points including t = 0.
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// 1-based.
    #[serde(default = "default_excited")]
    pub initially_excited: Vec<usize>,
    #[serde(default = "default_rtol")]
    pub rtol: f64,
    #[serde(default = "default_atol")]
    pub atol: f64,
    /// Fixed RK4 step in ns; adaptive stepping when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_step_ns: Option<f64>,
    #[serde(default = "default_max_steps")]
    pub max_steps: usize,
}

impl Default for EvolutionSection {
    fn default() -> Self {
        Self {
            t_end_ns: default_t_end(),
            samples: default_samples(),
            initially_excited: default_excited(),
            rtol: default_rtol(),
            atol: default_atol(),
            fixed_step_ns: None,
            max_steps: default_max_steps(),
        }
    }
}

fn default_orders() -> Vec<i64> {
    vec![1, 2, 3]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EffectiveSection {
    /// 1-based pairs; all pairs when empty.
    #[serde(default)]
    pub pairs: Vec<[usize; 2]>,
    #[serde(default = "default_orders")]
    pub orders: Vec<i64>,
}

impl Default for EffectiveSection {
    fn default() -> Self {
        Self {
            pairs: Vec::new(),
            orders: default_orders(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSection {
    pub frequency_hz: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude_hz: Option<f64>,
    /// Defaults to ceil(D/M) + 20.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
    /// Lorentzian FWHM; when set, a rendered spectrum is written too.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub linewidth_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_points: Option<usize>,
}

fn default_unit() -> RateUnit {
    RateUnit::Angular
}
fn default_ratio() -> f64 {
    0.92
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveDesignSection {
    /// Per unit strain, in the unit given by `deformation_potential_unit`.
    pub deformation_potential: f64,
    #[serde(default = "default_unit")]
    pub deformation_potential_unit: RateUnit,
    pub sound_speed_m_per_s: f64,
    pub frequency_hz: f64,
    #[serde(default = "default_ratio")]
    pub target_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system: Option<SystemSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drive: Option<DriveSection>,
    #[serde(default)]
    pub sweep: GridSection,
    #[serde(default)]
    pub evolution: EvolutionSection,
    #[serde(default)]
    pub model: ModelKind,
    #[serde(default)]
    pub effective: EffectiveSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<SpectrumSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drive_design: Option<DriveDesignSection>,
}

fn config_error(path: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Config {
        path: path.into(),
        message: message.into(),
    }
}

/// Re-labels validation errors with their location in the file.
fn in_section(section: &'static str, e: Error) -> Error {
    match e {
        Error::InvalidSpec { field, reason } | Error::InvalidDrive { field, reason } => {
            config_error(format!("{section}.{field}"), reason)
        }
        other => config_error(section, other.to_string()),
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_error(path.display().to_string(), format!("cannot read: {e}")))?;
        Self::from_json_str(&text)
    }

    /// Parses a config, or the `config` echo of a run manifest.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| {
            config_error(
                format!("line {}, column {}", e.line(), e.column()),
                e.to_string(),
            )
        })?;
        let (value, prefix) = match value.get("config") {
            Some(inner) if value.get("schema_version").is_none() => (inner.clone(), "config."),
            _ => (value, ""),
        };
        let config: RunConfig = serde_path_to_error::deserialize(value).map_err(|e| {
            let path = e.path().to_string();
            config_error(format!("{prefix}{path}"), e.into_inner().to_string())
        })?;
        if config.schema_version != SCHEMA_VERSION {
            return Err(config_error(
                "schema_version",
                format!("unsupported version {} (expected {SCHEMA_VERSION})", config.schema_version),
            ));
        }
        Ok(config)
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("run config serializes")
    }

    pub fn system_spec(&self) -> Result<SystemSpec> {
        let s = self
            .system
            .as_ref()
            .ok_or_else(|| config_error("system", "section is required"))?;
        let n = s.qubit_detunings_hz.len();
        let spec = SystemSpec {
            qubit_detunings: s.qubit_detunings_hz.iter().map(|&v| hz_to_angular(v)).collect(),
            cavity_detuning: hz_to_angular(s.cavity_detuning_hz),
            coupling: hz_to_angular(s.coupling_hz),
            cavity_decay: hz_to_angular(s.cavity_decay_hz),
            qubit_decay: s.qubit_decay_hz.expand(n).into_iter().map(hz_to_angular).collect(),
            qubit_dephasing: s.qubit_dephasing_hz.expand(n).into_iter().map(hz_to_angular).collect(),
            fock_truncation: s.fock_truncation,
        };
        spec.validate().map_err(|e| in_section("system", e))?;
        for q in spec.non_dispersive_qubits() {
            log::warn!("qubit {} is outside the dispersive regime (g/|Δ + δ| ≥ 0.1)", q + 1);
        }
        Ok(spec)
    }

    fn num_qubits(&self) -> Result<usize> {
        Ok(self.system_spec()?.num_qubits())
    }

    fn phases(&self, n: usize) -> Result<Vec<f64>> {
        let phases = self
            .drive
            .as_ref()
            .and_then(|d| d.phases_rad.clone())
            .unwrap_or_else(|| vec![0.0; n]);
        if phases.len() != n {
            return Err(config_error("drive.phases_rad", format!("expected {n} entries")));
        }
        Ok(phases)
    }

    /// D_i/M for sweeps; zero when no drive is given.
    pub fn ratios(&self) -> Result<Vec<f64>> {
        let n = self.num_qubits()?;
        let ratios = match &self.drive {
            None => vec![0.0; n],
            Some(d) => match (&d.ratios, &d.amplitudes_hz) {
                (Some(r), _) => r.clone(),
                (None, Some(_)) => {
                    return Err(config_error(
                        "drive.ratios",
                        "sweeps hold D/M fixed; give `ratios` instead of `amplitudes_hz`",
                    ))
                }
                (None, None) => vec![0.0; n],
            },
        };
        if ratios.len() != n {
            return Err(config_error("drive.ratios", format!("expected {n} entries")));
        }
        Ok(ratios)
    }

    /// Drive for a single run at `drive.frequency_hz`.
    pub fn drive_params(&self) -> Result<DriveParams> {
        let n = self.num_qubits()?;
        let phases = self.phases(n)?;
        let Some(d) = &self.drive else {
            return Ok(DriveParams::undriven(n));
        };
        let freq = d.frequency_hz.map(hz_to_angular);
        let drive = match (&d.ratios, &d.amplitudes_hz, freq) {
            (Some(_), Some(_), _) => {
                return Err(config_error("drive", "give either `ratios` or `amplitudes_hz`, not both"))
            }
            (Some(r), None, Some(m)) => {
                if r.len() != n {
                    return Err(config_error("drive.ratios", format!("expected {n} entries")));
                }
                DriveParams::from_ratios(m, r, phases)
            }
            (None, Some(a), Some(m)) => {
                DriveParams::new(m, a.iter().map(|&v| hz_to_angular(v)).collect(), phases)
            }
            (None, None, m) => DriveParams::new(m.unwrap_or(0.0), vec![0.0; n], phases),
            (_, _, None) => return Err(config_error("drive.frequency_hz", "required when the drive has amplitudes")),
        };
        drive.validate(n).map_err(|e| in_section("drive", e))?;
        Ok(drive)
    }

    fn stepper(&self) -> Result<Stepper> {
        let e = &self.evolution;
        match e.fixed_step_ns {
            Some(dt) if dt > 0.0 => Ok(Stepper::FixedRk4 { dt: ns_to_s(dt) }),
            Some(_) => Err(config_error("evolution.fixed_step_ns", "must be positive")),
            None => {
                if !(e.rtol > 0.0 && e.atol > 0.0) {
                    return Err(config_error("evolution.rtol", "tolerances must be positive"));
                }
                Ok(Stepper::Adaptive(Tolerances {
                    rtol: e.rtol,
                    atol: e.atol,
                }))
            }
        }
    }

    fn excited(&self, n: usize) -> Result<Vec<usize>> {
        self.evolution
            .initially_excited
            .iter()
            .map(|&q| {
                if (1..=n).contains(&q) {
                    Ok(q - 1)
                } else {
                    Err(config_error(
                        "evolution.initially_excited",
                        format!("qubit {q} does not exist (qubits are numbered 1..={n})"),
                    ))
                }
            })
            .collect()
    }

    fn check_timing(&self) -> Result<()> {
        let e = &self.evolution;
        if !(e.t_end_ns > 0.0 && e.t_end_ns.is_finite()) {
            return Err(config_error("evolution.t_end_ns", "must be positive"));
        }
        if e.samples < 2 {
            return Err(config_error("evolution.samples", "at least two samples are required"));
        }
        Ok(())
    }

    pub fn simulation(&self) -> Result<Simulation> {
        self.check_timing()?;
        let spec = self.system_spec()?;
        let n = spec.num_qubits();
        let excited = self.excited(n)?;
        let mut sim = Simulation::new(spec, self.drive_params()?, ns_to_s(self.evolution.t_end_ns), self.evolution.samples, excited)
            .with_model(self.model)
            .with_stepper(self.stepper()?);
        sim.max_steps = self.evolution.max_steps;
        Ok(sim)
    }

    pub fn sweep_config(&self) -> Result<SweepConfig> {
        self.check_timing()?;
        let spec = self.system_spec()?;
        let n = spec.num_qubits();
        let ratios = self.ratios()?;
        let grid = FrequencyGrid::new(
            hz_to_angular(self.sweep.m_min_hz),
            hz_to_angular(self.sweep.m_max_hz),
            self.sweep.steps,
        )
        .map_err(|e| in_section("sweep", e))?;
        let cfg = SweepConfig {
            ratios,
            phases: self.phases(n)?,
            grid,
            t_end: ns_to_s(self.evolution.t_end_ns),
            sample_count: self.evolution.samples,
            excited: self.excited(n)?,
            model: self.model,
            stepper: self.stepper()?,
            max_steps: self.evolution.max_steps,
            spec,
        };
        cfg.validate().map_err(|e| in_section("drive", e))?;
        Ok(cfg)
    }

    /// 0-based pairs requested in the `effective` section (all pairs if none).
    pub fn pairs(&self) -> Result<Vec<(usize, usize)>> {
        let n = self.num_qubits()?;
        if self.effective.pairs.is_empty() {
            return Ok((0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect());
        }
        self.effective
            .pairs
            .iter()
            .map(|&[i, j]| {
                if i == j || !(1..=n).contains(&i) || !(1..=n).contains(&j) {
                    Err(config_error("effective.pairs", format!("invalid pair [{i}, {j}]")))
                } else {
                    Ok((i - 1, j - 1))
                }
            })
            .collect()
    }

    pub fn material(&self) -> Result<(MaterialParams, f64, f64)> {
        let d = self
            .drive_design
            .as_ref()
            .ok_or_else(|| config_error("drive_design", "section is required"))?;
        let material = MaterialParams::new(d.deformation_potential, d.deformation_potential_unit, d.sound_speed_m_per_s)
            .map_err(|e| in_section("drive_design", e))?;
        Ok((material, hz_to_angular(d.frequency_hz), d.target_ratio))
    }
}
