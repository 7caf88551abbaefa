//! Drive-frequency sweeps: one independent evolution per M grid point,
//! collected into per-qubit population maps.

pub mod config;
pub mod output;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::effective::{EffectiveModel, EffectiveSystem};
use crate::error::{Error, Result};
use crate::hamiltonian::DriveParams;
use crate::lindblad::{evolve, EvolveOptions, Trajectory};
use crate::ode::{self, IntegratorStats, Stepper};
use crate::space::{build_space, initial_state, SpaceLayout, SystemSpec};
use crate::units::angular_to_hz;

pub const RESONANCE_THRESHOLD: f64 = 0.5;
pub const DECOUPLED_THRESHOLD: f64 = 0.1;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    /// Qubits, cavity and all loss channels.
    #[default]
    Full,
    /// Qubit-only model with the modulated frequencies kept explicitly.
    Effective,
    /// Qubit-only model with one secular sideband term per pair.
    Secular,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Full => "full",
            ModelKind::Effective => "effective",
            ModelKind::Secular => "secular",
        }
    }
}

impl std::str::FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "full" => Ok(ModelKind::Full),
            "effective" => Ok(ModelKind::Effective),
            "secular" => Ok(ModelKind::Secular),
            other => Err(format!("unknown model `{other}` (expected full, effective or secular)")),
        }
    }
}

/// Uniform grid of drive frequencies (rad/s).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl FrequencyGrid {
    pub fn new(min: f64, max: f64, steps: usize) -> Result<Self> {
        let grid = Self { min, max, steps };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(Error::spec("grid.steps", "at least one grid point is required"));
        }
        if !(self.min > 0.0 && self.max.is_finite()) {
            return Err(Error::spec("grid.min", "drive frequencies must be positive and finite"));
        }
        if self.steps == 1 && self.min != self.max {
            return Err(Error::spec("grid.steps", "a single point needs min = max"));
        }
        if self.steps > 1 && !(self.max > self.min) {
            return Err(Error::spec("grid.max", "grid must be strictly increasing"));
        }
        Ok(())
    }

    pub fn step(&self) -> f64 {
        if self.steps > 1 {
            (self.max - self.min) / (self.steps - 1) as f64
        } else {
            0.0
        }
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.steps)
            .map(|k| {
                if k + 1 == self.steps {
                    self.max
                } else {
                    self.min + k as f64 * self.step()
                }
            })
            .collect()
    }
}

fn default_true() -> bool {
    true
}

fn default_max_steps() -> usize {
    ode::DEFAULT_MAX_STEPS
}

/// A single evolution of any of the three models.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Simulation {
    pub spec: SystemSpec,
    pub drive: DriveParams,
    /// s
    pub t_end: f64,
    pub sample_count: usize,
    /// 0-based indices of qubits starting in |e⟩.
    pub excited: Vec<usize>,
    pub model: ModelKind,
    pub stepper: Stepper,
    #[serde(default = "default_max_steps")]
    pub max_steps: usize,
    #[serde(default = "default_true")]
    pub track_positivity: bool,
}

impl Simulation {
    pub fn new(spec: SystemSpec, drive: DriveParams, t_end: f64, sample_count: usize, excited: Vec<usize>) -> Self {
        Self {
            spec,
            drive,
            t_end,
            sample_count,
            excited,
            model: ModelKind::Full,
            stepper: Stepper::default(),
            max_steps: ode::DEFAULT_MAX_STEPS,
            track_positivity: true,
        }
    }

    pub fn with_model(mut self, model: ModelKind) -> Self {
        self.model = model;
        self
    }

    pub fn with_stepper(mut self, stepper: Stepper) -> Self {
        self.stepper = stepper;
        self
    }

    pub fn options(&self) -> EvolveOptions {
        EvolveOptions {
            stepper: self.stepper,
            max_steps: self.max_steps,
            keep_snapshots: false,
            track_positivity: self.track_positivity,
        }
    }

    pub fn run(&self) -> Result<Trajectory> {
        self.drive.validate(self.spec.num_qubits())?;
        let options = self.options();
        match self.model {
            ModelKind::Full => {
                let layout = build_space(&self.spec)?;
                let rho0 = initial_state(&layout, &self.excited)?;
                evolve(&self.spec, &self.drive, &rho0, self.t_end, self.sample_count, &options)
            }
            ModelKind::Effective | ModelKind::Secular => {
                let system = EffectiveSystem::from_spec(&self.spec, true)?;
                let rho0 = initial_state(&SpaceLayout::qubits_only(self.spec.num_qubits()), &self.excited)?;
                let model = if self.model == ModelKind::Secular {
                    EffectiveModel::Secular
                } else {
                    EffectiveModel::TimeDependent
                };
                system.evolve(&self.drive, model, &rho0, self.t_end, self.sample_count, &options)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub spec: SystemSpec,
    /// D_i / M, held fixed across the grid.
    pub ratios: Vec<f64>,
    pub phases: Vec<f64>,
    pub grid: FrequencyGrid,
    /// s
    pub t_end: f64,
    pub sample_count: usize,
    /// 0-based indices of qubits starting in |e⟩.
    pub excited: Vec<usize>,
    pub model: ModelKind,
    pub stepper: Stepper,
    #[serde(default = "default_max_steps")]
    pub max_steps: usize,
}

impl SweepConfig {
    /// 141 points over 2–9 GHz, 20 ns with 401 samples, first qubit excited.
    pub fn with_defaults(spec: SystemSpec, ratios: Vec<f64>, phases: Vec<f64>) -> Self {
        Self {
            spec,
            ratios,
            phases,
            grid: FrequencyGrid {
                min: crate::units::hz_to_angular(2e9),
                max: crate::units::hz_to_angular(9e9),
                steps: 141,
            },
            t_end: 20e-9,
            sample_count: 401,
            excited: vec![0],
            model: ModelKind::Full,
            stepper: Stepper::default(),
            max_steps: ode::DEFAULT_MAX_STEPS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        self.grid.validate()?;
        let n = self.spec.num_qubits();
        if self.ratios.len() != n || self.phases.len() != n {
            return Err(Error::drive("ratios", format!("expected {n} ratios and phases")));
        }
        if self.ratios.iter().any(|r| !(*r >= 0.0 && r.is_finite())) {
            return Err(Error::drive("ratios", "D/M must be non-negative and finite"));
        }
        if !(self.t_end > 0.0) || self.sample_count < 2 {
            return Err(Error::spec("t_end", "need t_end > 0 and at least two samples"));
        }
        Ok(())
    }

    pub fn drive_at(&self, m: f64) -> DriveParams {
        DriveParams::from_ratios(m, &self.ratios, self.phases.clone())
    }

    pub fn point(&self, m: f64) -> Simulation {
        Simulation {
            spec: self.spec.clone(),
            drive: self.drive_at(m),
            t_end: self.t_end,
            sample_count: self.sample_count,
            excited: self.excited.clone(),
            model: self.model,
            stepper: self.stepper,
            max_steps: self.max_steps,
            track_positivity: false,
        }
    }

    /// SHA-256 of the canonical JSON encoding.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("sweep config serializes");
        hex::encode(Sha256::digest(bytes))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Rayon pool; `None` uses the available parallelism. Without the
    /// `parallel` feature this runs sequentially.
    Parallel { workers: Option<usize> },
}

impl Default for Execution {
    fn default() -> Self {
        Execution::Parallel { workers: None }
    }
}

/// Qubit populations over drive frequency × time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PopulationMap {
    /// M grid (rad/s).
    pub frequencies: Vec<f64>,
    /// s
    pub times: Vec<f64>,
    /// `[qubit][m index][time index]`
    pub populations: Vec<Vec<Vec<f64>>>,
    /// Per grid point.
    pub stats: Vec<IntegratorStats>,
    pub config_hash: String,
    pub model: ModelKind,
}

impl PopulationMap {
    pub fn num_qubits(&self) -> usize {
        self.populations.len()
    }

    pub fn row(&self, qubit: usize, m_index: usize) -> &[f64] {
        &self.populations[qubit][m_index]
    }

    pub fn max_over_time(&self, qubit: usize, m_index: usize) -> f64 {
        self.row(qubit, m_index).iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Max-over-time population of `qubit` at every grid point.
    pub fn max_profile(&self, qubit: usize) -> Vec<f64> {
        (0..self.frequencies.len()).map(|m| self.max_over_time(qubit, m)).collect()
    }

    /// Index of the grid point equal to `m` (to 1e-6 of a grid step).
    pub fn grid_index(&self, m: f64) -> Result<usize> {
        let step = if self.frequencies.len() > 1 {
            self.frequencies[1] - self.frequencies[0]
        } else {
            m.abs().max(1.0)
        };
        self.frequencies
            .iter()
            .position(|&f| (f - m).abs() <= 1e-6 * step)
            .ok_or(Error::OffGrid { hz: angular_to_hz(m) })
    }

    pub fn total_stats(&self) -> IntegratorStats {
        let mut total = IntegratorStats::default();
        for s in &self.stats {
            total.merge(s);
        }
        total
    }

    /// (min, max) over every entry.
    pub fn value_range(&self) -> (f64, f64) {
        self.populations
            .iter()
            .flatten()
            .flatten()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.num_qubits() {
            return Err(Error::IndexOutOfRange {
                index: q,
                count: self.num_qubits(),
            });
        }
        Ok(())
    }
}

pub fn run_sweep(config: &SweepConfig) -> Result<PopulationMap> {
    run_sweep_with(config, Execution::default())
}

pub fn run_sweep_with(config: &SweepConfig, execution: Execution) -> Result<PopulationMap> {
    config.validate()?;
    let grid = config.grid.values();
    let results = match execution {
        Execution::Sequential => run_points_sequential(config, &grid),
        Execution::Parallel { workers } => run_points_parallel(config, &grid, workers),
    };
    let n = config.spec.num_qubits();
    let mut populations = vec![Vec::with_capacity(grid.len()); n];
    let mut stats = Vec::with_capacity(grid.len());
    let mut times = Vec::new();
    for (m, result) in grid.iter().zip(results) {
        let traj = result.map_err(|e| Error::SweepPoint {
            hz: angular_to_hz(*m),
            source: Box::new(e),
        })?;
        for (q, pops) in traj.qubit_populations.into_iter().enumerate() {
            populations[q].push(pops);
        }
        stats.push(traj.stats);
        times = traj.times;
    }
    Ok(PopulationMap {
        frequencies: grid,
        times,
        populations,
        stats,
        config_hash: config.hash(),
        model: config.model,
    })
}

fn run_points_sequential(config: &SweepConfig, grid: &[f64]) -> Vec<Result<Trajectory>> {
    grid.iter().map(|&m| config.point(m).run()).collect()
}

#[cfg(feature = "parallel")]
fn run_points_parallel(config: &SweepConfig, grid: &[f64], workers: Option<usize>) -> Vec<Result<Trajectory>> {
    use rayon::prelude::*;

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        builder = builder.num_threads(n);
    }
    match builder.build() {
        Ok(pool) => pool.install(|| grid.par_iter().map(|&m| config.point(m).run()).collect()),
        Err(e) => {
            log::warn!("could not start worker pool ({e}); running sequentially");
            run_points_sequential(config, grid)
        }
    }
}

#[cfg(not(feature = "parallel"))]
fn run_points_parallel(config: &SweepConfig, grid: &[f64], _workers: Option<usize>) -> Vec<Result<Trajectory>> {
    run_points_sequential(config, grid)
}

/// Grid frequencies where the max-over-time population of `target` is above
/// 0.5 and a local maximum along M.
pub fn find_resonances(map: &PopulationMap, source: usize, target: usize) -> Result<Vec<f64>> {
    find_resonances_above(map, source, target, RESONANCE_THRESHOLD)
}

pub fn find_resonances_above(map: &PopulationMap, source: usize, target: usize, threshold: f64) -> Result<Vec<f64>> {
    map.check_qubit(source)?;
    map.check_qubit(target)?;
    if source == target {
        return Err(Error::spec("target", "source and target qubits must differ"));
    }
    let profile = map.max_profile(target);
    let last = profile.len().saturating_sub(1);
    Ok((0..profile.len())
        .filter(|&k| {
            let v = profile[k];
            let left_ok = k == 0 || v > profile[k - 1];
            let right_ok = k == last || v >= profile[k + 1];
            v > threshold && left_ok && right_ok
        })
        .map(|k| map.frequencies[k])
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Selectivity {
    /// Max-over-time population of the partner qubit.
    pub transfer: f64,
    /// Max-over-time population of the bystander.
    pub leakage: f64,
}

impl Selectivity {
    pub fn is_selective(&self) -> bool {
        self.leakage < DECOUPLED_THRESHOLD
    }
}

pub fn selectivity_metric(map: &PopulationMap, m_star: f64, pair: (usize, usize), bystander: usize) -> Result<Selectivity> {
    for q in [pair.0, pair.1, bystander] {
        map.check_qubit(q)?;
    }
    let k = map.grid_index(m_star)?;
    Ok(Selectivity {
        transfer: map.max_over_time(pair.1, k),
        leakage: map.max_over_time(bystander, k),
    })
}

/// Selectivity of a single trajectory.
pub fn trajectory_selectivity(traj: &Trajectory, partner: usize, bystander: usize) -> Selectivity {
    Selectivity {
        transfer: traj.max_population(partner),
        leakage: traj.max_population(bystander),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios;
    use crate::units::hz_to_angular;

    fn quick(model: ModelKind, ratios: Vec<f64>) -> SweepConfig {
        let mut cfg = SweepConfig::with_defaults(scenarios::pair(), ratios, scenarios::counter_phases(2));
        cfg.grid = FrequencyGrid::new(hz_to_angular(5.0e9), hz_to_angular(7.0e9), 9).unwrap();
        cfg.t_end = 10e-9;
        cfg.sample_count = 101;
        cfg.model = model;
        cfg
    }

    #[test]
    fn grid_values() {
        let g = FrequencyGrid::new(1.0, 2.0, 5).unwrap();
        assert_eq!(g.values(), vec![1.0, 1.25, 1.5, 1.75, 2.0]);
        assert_eq!(FrequencyGrid::new(3.0, 3.0, 1).unwrap().values(), vec![3.0]);
        assert!(FrequencyGrid::new(2.0, 1.0, 5).is_err());
        assert!(FrequencyGrid::new(1.0, 2.0, 0).is_err());
        assert!(FrequencyGrid::new(-1.0, 2.0, 3).is_err());
    }

    #[test]
    fn model_names_round_trip() {
        for m in [ModelKind::Full, ModelKind::Effective, ModelKind::Secular] {
            assert_eq!(m.as_str().parse::<ModelKind>().unwrap(), m);
        }
        assert!("exact".parse::<ModelKind>().is_err());
    }

    #[test]
    fn undriven_rows_are_identical() {
        let map = run_sweep(&quick(ModelKind::Secular, vec![0.0, 0.0])).unwrap();
        for q in 0..2 {
            for m in 1..map.frequencies.len() {
                assert_eq!(map.row(q, m), map.row(q, 0));
            }
        }
        assert!(find_resonances(&map, 0, 1).unwrap().is_empty());
    }

    #[test]
    fn secular_resonance_and_selectivity() {
        let map = run_sweep(&quick(ModelKind::Secular, vec![0.92, 0.92])).unwrap();
        let found = find_resonances(&map, 0, 1).unwrap();
        assert_eq!(found.len(), 1);
        assert!((found[0] - hz_to_angular(6e9)).abs() < 1.0);
        let s = selectivity_metric(&map, found[0], (0, 1), 0).unwrap();
        assert!(s.transfer > 0.5);
        assert!(matches!(
            selectivity_metric(&map, hz_to_angular(6.1e9), (0, 1), 0),
            Err(Error::OffGrid { .. })
        ));
        let (lo, hi) = map.value_range();
        assert!(lo >= -1e-6 && hi <= 1.0 + 1e-6);
    }

    #[test]
    fn parallel_matches_sequential_and_is_deterministic() {
        let cfg = quick(ModelKind::Effective, vec![0.92, 0.92]);
        let a = run_sweep_with(&cfg, Execution::Sequential).unwrap();
        let b = run_sweep_with(&cfg, Execution::Parallel { workers: Some(3) }).unwrap();
        let c = run_sweep_with(&cfg, Execution::Parallel { workers: None }).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, c);
        assert_eq!(a.config_hash, cfg.hash());
        assert_eq!(a.config_hash.len(), 64);
    }

    #[test]
    fn failures_name_the_frequency() {
        let mut cfg = quick(ModelKind::Secular, vec![0.92, 0.92]);
        cfg.max_steps = 3;
        let err = run_sweep(&cfg).unwrap_err();
        assert!(err.is_integration_failure());
        match err {
            Error::SweepPoint { hz, .. } => assert!((hz - 5e9).abs() < 1e-3),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn hash_tracks_content() {
        let a = quick(ModelKind::Secular, vec![0.92, 0.92]);
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.t_end *= 2.0;
        assert_ne!(a.hash(), b.hash());
    }
}
