//! Lindblad master-equation integration.
//!
//! dρ/dt = −i[H(t), ρ] + Σ_c (γ_c/2)(2cρc† − {c†c, ρ})
//!
//! The generator is compiled once into row-sparse form: the anticommutator
//! terms are folded into a non-hermitian H_nh = H − (i/2)Σγ c†c so each
//! right-hand-side evaluation costs O(d² · nnz-per-row).

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::{h_static, DriveParams};
use crate::ode::{self, IntegratorStats, OdeSystem, Stepper};
use crate::space::{
    build_space, lowering_operator, number_operator, DensityMatrix, OperatorMatrix, SpaceLayout,
    SystemSpec, C64,
};

/// Maximum tolerated |tr ρ − 1| during integration.
pub const TRACE_DRIFT_LIMIT: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct CollapseChannel {
    pub operator: OperatorMatrix,
    pub rate: f64,
}

impl CollapseChannel {
    pub fn new(operator: OperatorMatrix, rate: f64) -> Result<Self> {
        if !(rate >= 0.0 && rate.is_finite()) {
            return Err(Error::spec("rate", format!("collapse rate must be ≥ 0, got {rate}")));
        }
        Ok(Self { operator, rate })
    }
}

/// Cavity decay (a), qubit decay (σ_j) and pure dephasing (σ_j†σ_j);
/// zero-rate channels are omitted.
pub fn channels_from_spec(spec: &SystemSpec, layout: &SpaceLayout) -> Result<Vec<CollapseChannel>> {
    spec.validate()?;
    let mut out = Vec::new();
    if let Some(cav) = layout.cavity_index() {
        if spec.cavity_decay > 0.0 {
            out.push(CollapseChannel::new(lowering_operator(layout, cav)?, spec.cavity_decay)?);
        }
    }
    for q in 0..spec.num_qubits() {
        if spec.qubit_decay[q] > 0.0 {
            out.push(CollapseChannel::new(lowering_operator(layout, q)?, spec.qubit_decay[q])?);
        }
    }
    for q in 0..spec.num_qubits() {
        if spec.qubit_dephasing[q] > 0.0 {
            out.push(CollapseChannel::new(number_operator(layout, q)?, spec.qubit_dephasing[q])?);
        }
    }
    Ok(out)
}

/// Dense reference evaluation of the Lindblad right-hand side.
pub fn liouvillian_apply(
    h: &OperatorMatrix,
    channels: &[CollapseChannel],
    rho: &DensityMatrix,
) -> Result<DMatrix<C64>> {
    let d = rho.dim();
    if h.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: h.dim(),
        });
    }
    let r = rho.matrix();
    let minus_i = C64::new(0.0, -1.0);
    let mut out = (h.matrix() * r - r * h.matrix()) * minus_i;
    for ch in channels {
        if ch.operator.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: ch.operator.dim(),
            });
        }
        let c = ch.operator.matrix();
        let cd = c.adjoint();
        let cdc = &cd * c;
        let term = (c * r * &cd) * C64::new(2.0, 0.0) - &cdc * r - r * &cdc;
        out += term * C64::new(ch.rate / 2.0, 0.0);
    }
    Ok(out)
}

/// Scalar time dependence of a Hamiltonian term.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Coefficient {
    /// A cos(ω t + φ)
    Cosine { amplitude: f64, frequency: f64, phase: f64 },
    /// A e^{−iω t}
    Phasor { amplitude: C64, frequency: f64 },
}

impl Coefficient {
    pub fn at(&self, t: f64) -> C64 {
        match *self {
            Coefficient::Cosine {
                amplitude,
                frequency,
                phase,
            } => C64::new(amplitude * (frequency * t + phase).cos(), 0.0),
            Coefficient::Phasor { amplitude, frequency } => {
                amplitude * C64::from_polar(1.0, -frequency * t)
            }
        }
    }
}

/// One operator weighted by a scalar function of time.
#[derive(Clone, Debug)]
pub struct TimeDependentTerm {
    pub operator: DMatrix<C64>,
    pub coefficient: Coefficient,
}

#[derive(Clone, Debug)]
struct Entry {
    col: usize,
    base: C64,
    modulation: Vec<(usize, C64)>,
}

#[derive(Clone, Debug)]
struct Jump {
    rate: f64,
    // (row, col, value) of c
    nonzeros: Vec<(usize, usize, C64)>,
}

/// Compiled Lindblad generator for H(t) = H_0 + Σ_k f_k(t) A_k.
#[derive(Clone, Debug)]
pub struct Generator {
    dim: usize,
    rows: Vec<Vec<Entry>>,
    coefficients: Vec<Coefficient>,
    jumps: Vec<Jump>,
}

impl Generator {
    /// `terms` must keep H(t) hermitian (include conjugate partners explicitly).
    pub fn new(h0: &DMatrix<C64>, terms: &[TimeDependentTerm], channels: &[CollapseChannel]) -> Result<Self> {
        let d = h0.nrows();
        let mut base = h0.clone();
        for ch in channels {
            if ch.operator.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: ch.operator.dim(),
                });
            }
            let c = ch.operator.matrix();
            base -= (c.adjoint() * c) * C64::new(0.0, ch.rate / 2.0);
        }
        for term in terms {
            if term.operator.nrows() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: term.operator.nrows(),
                });
            }
        }
        let zero = C64::new(0.0, 0.0);
        let rows = (0..d)
            .map(|r| {
                (0..d)
                    .filter_map(|c| {
                        let modulation: Vec<(usize, C64)> = terms
                            .iter()
                            .enumerate()
                            .filter(|(_, t)| t.operator[(r, c)] != zero)
                            .map(|(k, t)| (k, t.operator[(r, c)]))
                            .collect();
                        (base[(r, c)] != zero || !modulation.is_empty()).then(|| Entry {
                            col: c,
                            base: base[(r, c)],
                            modulation,
                        })
                    })
                    .collect()
            })
            .collect();
        let jumps = channels
            .iter()
            .filter(|ch| ch.rate > 0.0)
            .map(|ch| {
                let m = ch.operator.matrix();
                let nonzeros = (0..d)
                    .flat_map(|c| (0..d).map(move |r| (r, c)))
                    .filter(|&(r, c)| m[(r, c)] != zero)
                    .map(|(r, c)| (r, c, m[(r, c)]))
                    .collect();
                Jump {
                    rate: ch.rate,
                    nonzeros,
                }
            })
            .collect();
        Ok(Self {
            dim: d,
            rows,
            coefficients: terms.iter().map(|t| t.coefficient).collect(),
            jumps,
        })
    }

    /// Generator for the full cavity model driven by `drive`.
    pub fn for_system(spec: &SystemSpec, drive: &DriveParams, layout: &SpaceLayout) -> Result<Self> {
        drive.validate(spec.num_qubits())?;
        let h0 = h_static(spec, layout)?;
        let terms = drive_terms(drive, layout);
        let channels = channels_from_spec(spec, layout)?;
        Self::new(h0.matrix(), &terms, &channels)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Applies the generator to a dense ρ; mainly for cross-checks.
    pub fn apply(&self, t: f64, rho: &DMatrix<C64>) -> DMatrix<C64> {
        let d = self.dim;
        let mut out = vec![C64::new(0.0, 0.0); d * d];
        self.rhs(t, rho.as_slice(), &mut out);
        DMatrix::from_vec(d, d, out)
    }
}

/// Diagonal drive terms D_i cos(Mt + φ_i) σ_i†σ_i.
pub fn drive_terms(drive: &DriveParams, layout: &SpaceLayout) -> Vec<TimeDependentTerm> {
    (0..drive.num_qubits())
        .filter(|&q| drive.amplitudes[q] != 0.0)
        .map(|q| {
            let diag = layout.occupation_diagonal(q);
            TimeDependentTerm {
                operator: DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
                    diag.len(),
                    diag.into_iter().map(|v| C64::new(v, 0.0)),
                )),
                coefficient: Coefficient::Cosine {
                    amplitude: drive.amplitudes[q],
                    frequency: drive.frequency,
                    phase: drive.phases[q],
                },
            }
        })
        .collect()
}

impl OdeSystem for Generator {
    fn len(&self) -> usize {
        self.dim * self.dim
    }

    fn rhs(&self, t: f64, rho: &[C64], out: &mut [C64]) {
        let d = self.dim;
        let f: Vec<C64> = self.coefficients.iter().map(|c| c.at(t)).collect();
        // H_nh(t) values in row-sparse layout
        let values: Vec<Vec<(usize, C64)>> = self
            .rows
            .iter()
            .map(|row| {
                row.iter()
                    .map(|e| {
                        let v = e
                            .modulation
                            .iter()
                            .fold(e.base, |acc, &(k, a)| acc + f[k] * a);
                        (e.col, v)
                    })
                    .collect()
            })
            .collect();

        let minus_i = C64::new(0.0, -1.0);
        let plus_i = C64::new(0.0, 1.0);
        // −i H ρ
        for c in 0..d {
            let col = &rho[c * d..(c + 1) * d];
            let dst = &mut out[c * d..(c + 1) * d];
            for (r, row) in values.iter().enumerate() {
                let mut acc = C64::new(0.0, 0.0);
                for &(k, h) in row {
                    acc += h * col[k];
                }
                dst[r] = minus_i * acc;
            }
        }
        // + i ρ H†,  (ρH†)_{rc} = Σ_k ρ_{rk} conj(H_{ck})
        for (c, row) in values.iter().enumerate() {
            for &(k, h) in row {
                let w = plus_i * h.conj();
                let src = &rho[k * d..(k + 1) * d];
                let dst = &mut out[c * d..(c + 1) * d];
                for (o, s) in dst.iter_mut().zip(src) {
                    *o += w * s;
                }
            }
        }
        // + Σ γ c ρ c†
        for jump in &self.jumps {
            for &(c2, l, v2) in &jump.nonzeros {
                let w2 = v2.conj() * jump.rate;
                let src = &rho[l * d..(l + 1) * d];
                let dst = &mut out[c2 * d..(c2 + 1) * d];
                for &(r, k, v) in &jump.nonzeros {
                    dst[r] += v * w2 * src[k];
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvolveOptions {
    pub stepper: Stepper,
    pub max_steps: usize,
    /// Store ρ at every sample.
    pub keep_snapshots: bool,
    /// Compute the minimum eigenvalue of ρ at every sample.
    pub track_positivity: bool,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            stepper: Stepper::default(),
            max_steps: ode::DEFAULT_MAX_STEPS,
            keep_snapshots: false,
            track_positivity: true,
        }
    }
}

impl EvolveOptions {
    pub fn with_stepper(mut self, stepper: Stepper) -> Self {
        self.stepper = stepper;
        self
    }
}

/// Sampled observables of one evolution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    /// Sample times (s).
    pub times: Vec<f64>,
    /// ⟨σ_i†σ_i⟩, indexed `[qubit][sample]`.
    pub qubit_populations: Vec<Vec<f64>>,
    /// ⟨a†a⟩, absent for qubit-only models.
    pub cavity_population: Option<Vec<f64>>,
    pub trace: Vec<f64>,
    pub purity: Vec<f64>,
    /// Smallest eigenvalue of ρ (NaN when not tracked).
    pub min_eigenvalue: Vec<f64>,
    /// max|ρ − ρ†|
    pub hermiticity_error: Vec<f64>,
    #[serde(skip)]
    pub snapshots: Option<Vec<DensityMatrix>>,
    pub stats: IntegratorStats,
}

impl Trajectory {
    pub fn num_qubits(&self) -> usize {
        self.qubit_populations.len()
    }

    pub fn population(&self, qubit: usize) -> &[f64] {
        &self.qubit_populations[qubit]
    }

    pub fn max_population(&self, qubit: usize) -> f64 {
        self.population(qubit).iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// First peak of a qubit population: the running maximum at the moment
    /// the population first falls `drop` below it. Returns `(t, value)`; if it
    /// never drops, the global maximum.
    pub fn first_peak(&self, qubit: usize, drop: f64) -> (f64, f64) {
        let p = self.population(qubit);
        let mut best = (self.times[0], p[0]);
        for (&t, &v) in self.times.iter().zip(p) {
            if v > best.1 {
                best = (t, v);
            } else if v < best.1 - drop {
                return best;
            }
        }
        best
    }

    pub fn max_trace_drift(&self) -> f64 {
        self.trace.iter().map(|t| (t - 1.0).abs()).fold(0.0, f64::max)
    }

    pub fn min_eigenvalue_overall(&self) -> f64 {
        self.min_eigenvalue.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_hermiticity_error(&self) -> f64 {
        self.hermiticity_error.iter().copied().fold(0.0, f64::max)
    }

    /// Largest population difference against another trajectory on the same grid.
    pub fn max_population_difference(&self, other: &Trajectory) -> f64 {
        self.qubit_populations
            .iter()
            .zip(&other.qubit_populations)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max)
    }
}

/// Uniform grid of `count` samples on [0, t_end].
pub fn sample_grid(t_end: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|k| t_end * k as f64 / (count - 1) as f64)
        .collect()
}

/// Integrates a compiled generator from ρ₀ on `layout`.
pub fn evolve_generator(
    generator: &Generator,
    layout: &SpaceLayout,
    rho0: &DensityMatrix,
    t_end: f64,
    sample_count: usize,
    options: &EvolveOptions,
) -> Result<Trajectory> {
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::spec("t_end", "evolution time must be positive"));
    }
    if sample_count < 2 {
        return Err(Error::spec("sample_count", "at least two samples are required"));
    }
    let d = layout.dim();
    if rho0.dim() != d || generator.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: if rho0.dim() != d { rho0.dim() } else { generator.dim() },
        });
    }
    let times = sample_grid(t_end, sample_count);
    let nq = layout.num_qubits();
    let occupations: Vec<Vec<f64>> = (0..nq).map(|q| layout.occupation_diagonal(q)).collect();
    let photons = layout.photon_diagonal();

    let mut traj = Trajectory {
        times: times.clone(),
        qubit_populations: vec![Vec::with_capacity(sample_count); nq],
        cavity_population: layout.has_cavity().then(|| Vec::with_capacity(sample_count)),
        trace: Vec::with_capacity(sample_count),
        purity: Vec::with_capacity(sample_count),
        min_eigenvalue: Vec::with_capacity(sample_count),
        hermiticity_error: Vec::with_capacity(sample_count),
        snapshots: options.keep_snapshots.then(Vec::new),
        stats: IntegratorStats::default(),
    };

    let stats = ode::integrate(
        generator,
        rho0.matrix().as_slice().to_vec(),
        &times,
        options.stepper,
        options.max_steps,
        |_, t, y| {
            let diag: Vec<f64> = (0..d).map(|k| y[k * d + k].re).collect();
            let trace: f64 = diag.iter().sum();
            let drift = (trace - 1.0).abs();
            if !(drift <= TRACE_DRIFT_LIMIT) {
                return Err(Error::TraceDrift { t, drift });
            }
            for (q, occ) in occupations.iter().enumerate() {
                traj.qubit_populations[q].push(occ.iter().zip(&diag).map(|(o, p)| o * p).sum());
            }
            if let Some(cav) = traj.cavity_population.as_mut() {
                cav.push(photons.iter().zip(&diag).map(|(n, p)| n * p).sum());
            }
            traj.trace.push(trace);
            let rho = DensityMatrix::from_matrix_unchecked(DMatrix::from_column_slice(d, d, y));
            traj.purity.push(rho.purity());
            traj.hermiticity_error.push(rho.hermiticity_error());
            traj.min_eigenvalue.push(if options.track_positivity {
                rho.min_eigenvalue()
            } else {
                f64::NAN
            });
            if let Some(snaps) = traj.snapshots.as_mut() {
                snaps.push(rho);
            }
            Ok(())
        },
    )?;
    traj.stats = stats;
    Ok(traj)
}

/// Full model: N modulated qubits, one lossy cavity, Lindblad losses.
pub fn evolve(
    spec: &SystemSpec,
    drive: &DriveParams,
    rho0: &DensityMatrix,
    t_end: f64,
    sample_count: usize,
    options: &EvolveOptions,
) -> Result<Trajectory> {
    let layout = build_space(spec)?;
    let generator = Generator::for_system(spec, drive, &layout)?;
    evolve_generator(&generator, &layout, rho0, t_end, sample_count, options)
}
