//! Tensor-product Hilbert space for N two-level qubits and one truncated
//! cavity mode, with dense operator and density-matrix types.
//!
//! Basis ordering is `qubit 0 ⊗ qubit 1 ⊗ … ⊗ qubit N-1 ⊗ cavity`, with the
//! first qubit the most significant factor. Each qubit uses `|g⟩ = 0`,
//! `|e⟩ = 1`; the cavity uses Fock states `0..=n_max`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

const HERMITIAN_REL_TOL: f64 = 1e-12;
const STATE_TOL: f64 = 1e-10;

/// Static physical parameters. Every frequency and rate is an angular
/// frequency in rad/s, expressed in the frame rotating at the mean qubit
/// frequency ω₀.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemSpec {
    /// δ_i = ω_i − ω₀ for each qubit.
    pub qubit_detunings: Vec<f64>,
    /// Δ = ω₀ − ω_c.
    pub cavity_detuning: f64,
    /// Jaynes–Cummings coupling g, shared by all qubits.
    pub coupling: f64,
    /// Cavity energy decay rate γ_a.
    pub cavity_decay: f64,
    /// Qubit population decay rates γ_σ,i.
    pub qubit_decay: Vec<f64>,
    /// Qubit pure-dephasing rates γ_σ†σ,i.
    pub qubit_dephasing: Vec<f64>,
    /// Highest retained Fock level n_max.
    pub fock_truncation: usize,
}

impl SystemSpec {
    /// Lossless system with the default Fock truncation of 3.
    pub fn lossless(qubit_detunings: Vec<f64>, cavity_detuning: f64, coupling: f64) -> Self {
        let n = qubit_detunings.len();
        Self {
            qubit_detunings,
            cavity_detuning,
            coupling,
            cavity_decay: 0.0,
            qubit_decay: vec![0.0; n],
            qubit_dephasing: vec![0.0; n],
            fock_truncation: 3,
        }
    }

    /// Sets the same loss rates on every qubit and the cavity decay.
    pub fn with_losses(mut self, cavity_decay: f64, qubit_decay: f64, qubit_dephasing: f64) -> Self {
        let n = self.num_qubits();
        self.cavity_decay = cavity_decay;
        self.qubit_decay = vec![qubit_decay; n];
        self.qubit_dephasing = vec![qubit_dephasing; n];
        self
    }

    pub fn with_fock_truncation(mut self, n_max: usize) -> Self {
        self.fock_truncation = n_max;
        self
    }

    pub fn num_qubits(&self) -> usize {
        self.qubit_detunings.len()
    }

    /// Qubit–cavity detuning Δ_i = Δ + δ_i.
    pub fn qubit_cavity_detuning(&self, qubit: usize) -> f64 {
        self.cavity_detuning + self.qubit_detunings[qubit]
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.num_qubits();
        if n == 0 {
            return Err(Error::spec("qubit_detunings", "at least one qubit is required"));
        }
        if self.qubit_decay.len() != n {
            return Err(Error::spec(
                "qubit_decay",
                format!("expected {n} entries, got {}", self.qubit_decay.len()),
            ));
        }
        if self.qubit_dephasing.len() != n {
            return Err(Error::spec(
                "qubit_dephasing",
                format!("expected {n} entries, got {}", self.qubit_dephasing.len()),
            ));
        }
        if self.fock_truncation < 1 {
            return Err(Error::spec("fock_truncation", "n_max must be at least 1"));
        }
        let all_finite = self
            .qubit_detunings
            .iter()
            .chain(&self.qubit_decay)
            .chain(&self.qubit_dephasing)
            .chain([&self.cavity_detuning, &self.coupling, &self.cavity_decay])
            .all(|v| v.is_finite());
        if !all_finite {
            return Err(Error::spec("system", "all parameters must be finite"));
        }
        if self.coupling < 0.0 {
            return Err(Error::spec("coupling", "g must be non-negative"));
        }
        if self.cavity_decay < 0.0 {
            return Err(Error::spec("cavity_decay", "rates must be non-negative"));
        }
        if self.qubit_decay.iter().any(|&r| r < 0.0) {
            return Err(Error::spec("qubit_decay", "rates must be non-negative"));
        }
        if self.qubit_dephasing.iter().any(|&r| r < 0.0) {
            return Err(Error::spec("qubit_dephasing", "rates must be non-negative"));
        }
        Ok(())
    }

    /// Qubits for which g/|Δ + δ_i| ≥ 0.1, i.e. outside the dispersive regime.
    pub fn non_dispersive_qubits(&self) -> Vec<usize> {
        (0..self.num_qubits())
            .filter(|&i| {
                let det = self.qubit_cavity_detuning(i).abs();
                det == 0.0 || self.coupling / det >= 0.1
            })
            .collect()
    }
}

/// Subsystem layout of the tensor-product space.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpaceLayout {
    qubits: usize,
    cavity_levels: Option<usize>,
}

impl SpaceLayout {
    pub fn new(qubits: usize, fock_truncation: usize) -> Self {
        Self {
            qubits,
            cavity_levels: Some(fock_truncation + 1),
        }
    }

    /// Qubit-only space of dimension 2^N, used by the effective models.
    pub fn qubits_only(qubits: usize) -> Self {
        Self {
            qubits,
            cavity_levels: None,
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.qubits
    }

    pub fn has_cavity(&self) -> bool {
        self.cavity_levels.is_some()
    }

    /// Number of cavity levels (n_max + 1), or 1 for a qubit-only space.
    pub fn cavity_levels(&self) -> usize {
        self.cavity_levels.unwrap_or(1)
    }

    /// Subsystem dimensions `[2, …, 2, n_max + 1]`.
    pub fn dims(&self) -> Vec<usize> {
        let mut dims = vec![2; self.qubits];
        if let Some(levels) = self.cavity_levels {
            dims.push(levels);
        }
        dims
    }

    pub fn subsystem_count(&self) -> usize {
        self.qubits + usize::from(self.has_cavity())
    }

    pub fn dim(&self) -> usize {
        self.dims().iter().product()
    }

    /// Index of the cavity among the subsystems, if present.
    pub fn cavity_index(&self) -> Option<usize> {
        self.cavity_levels.map(|_| self.qubits)
    }

    /// Whether `qubit` is excited in computational basis state `index`.
    pub fn is_excited(&self, index: usize, qubit: usize) -> bool {
        let bits = index / self.cavity_levels();
        (bits >> (self.qubits - 1 - qubit)) & 1 == 1
    }

    pub fn photon_number(&self, index: usize) -> usize {
        index % self.cavity_levels()
    }

    /// Diagonal of σ_q†σ_q in the computational basis.
    pub fn occupation_diagonal(&self, qubit: usize) -> Vec<f64> {
        (0..self.dim())
            .map(|k| if self.is_excited(k, qubit) { 1.0 } else { 0.0 })
            .collect()
    }

    /// Diagonal of a†a (all zeros without a cavity).
    pub fn photon_diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|k| self.photon_number(k) as f64).collect()
    }

    /// Basis index of the product state with the given qubits excited and `photons` in the cavity.
    pub fn basis_index(&self, excited: &[usize], photons: usize) -> usize {
        let bits = excited
            .iter()
            .fold(0usize, |acc, &q| acc | (1 << (self.qubits - 1 - q)));
        bits * self.cavity_levels() + photons
    }
}

/// Validates `spec` and returns its space layout.
pub fn build_space(spec: &SystemSpec) -> Result<SpaceLayout> {
    spec.validate()?;
    let offenders = spec.non_dispersive_qubits();
    if !offenders.is_empty() {
        log::warn!("qubits {offenders:?} violate g/|Δ_i| < 0.1; dispersive picture is unreliable");
    }
    Ok(SpaceLayout::new(spec.num_qubits(), spec.fock_truncation))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OperatorKind {
    Hermitian,
    General,
}

/// Dense operator on the full space, tagged as hermitian or general.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix {
    matrix: DMatrix<C64>,
    kind: OperatorKind,
}

impl OperatorMatrix {
    pub fn general(matrix: DMatrix<C64>) -> Self {
        Self {
            matrix,
            kind: OperatorKind::General,
        }
    }

    /// Tags `matrix` as hermitian after checking max|A − A†| < 1e-12·max|A|.
    pub fn hermitian(matrix: DMatrix<C64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                found: matrix.ncols(),
            });
        }
        let scale = max_abs(&matrix);
        let dev = hermiticity_deviation(&matrix);
        if dev > HERMITIAN_REL_TOL * scale {
            return Err(Error::InvalidDensityMatrix(format!(
                "operator tagged hermitian deviates by {dev:e}"
            )));
        }
        Ok(Self {
            matrix,
            kind: OperatorKind::Hermitian,
        })
    }

    pub(crate) fn hermitian_unchecked(matrix: DMatrix<C64>) -> Self {
        Self {
            matrix,
            kind: OperatorKind::Hermitian,
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::hermitian_unchecked(DMatrix::identity(dim, dim))
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn is_hermitian(&self) -> bool {
        self.kind == OperatorKind::Hermitian
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn dagger(&self) -> Self {
        Self {
            matrix: self.matrix.adjoint(),
            kind: self.kind,
        }
    }
}

pub fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// max|A − A†|
pub fn hermiticity_deviation(m: &DMatrix<C64>) -> f64 {
    let n = m.nrows();
    let mut dev: f64 = 0.0;
    for c in 0..n {
        for r in 0..=c {
            dev = dev.max((m[(r, c)] - m[(c, r)].conj()).norm());
        }
    }
    dev
}

pub fn commutator(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    a * b - b * a
}

fn local_lowering(levels: usize) -> DMatrix<C64> {
    let mut m = DMatrix::zeros(levels, levels);
    for n in 1..levels {
        m[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    m
}

fn embed(layout: &SpaceLayout, subsystem: usize, local: &DMatrix<C64>) -> DMatrix<C64> {
    let mut out = DMatrix::<C64>::identity(1, 1);
    for (k, &d) in layout.dims().iter().enumerate() {
        out = if k == subsystem {
            out.kronecker(local)
        } else {
            out.kronecker(&DMatrix::identity(d, d))
        };
    }
    out
}

/// Lowering operator of subsystem `index`: σ = |g⟩⟨e| for a qubit, or the
/// truncated annihilation operator a for the cavity (last index).
pub fn lowering_operator(layout: &SpaceLayout, index: usize) -> Result<OperatorMatrix> {
    let dims = layout.dims();
    let &levels = dims.get(index).ok_or(Error::IndexOutOfRange {
        index,
        count: dims.len(),
    })?;
    Ok(OperatorMatrix::general(embed(layout, index, &local_lowering(levels))))
}

/// σ_i†σ_i for a qubit or a†a for the cavity.
pub fn number_operator(layout: &SpaceLayout, index: usize) -> Result<OperatorMatrix> {
    let low = lowering_operator(layout, index)?;
    Ok(OperatorMatrix::hermitian_unchecked(
        low.matrix.adjoint() * &low.matrix,
    ))
}

/// Density matrix ρ on the full space.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: DMatrix<C64>,
}

impl DensityMatrix {
    /// Validates hermiticity, unit trace and positivity to 1e-10.
    pub fn new(matrix: DMatrix<C64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                found: matrix.ncols(),
            });
        }
        let rho = Self { matrix };
        let tr = rho.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > STATE_TOL {
            return Err(Error::InvalidDensityMatrix(format!("trace {tr} differs from 1")));
        }
        let herm = rho.hermiticity_error() / tr.re.abs().max(f64::MIN_POSITIVE);
        if herm > STATE_TOL {
            return Err(Error::InvalidDensityMatrix(format!(
                "hermiticity error {herm:e}"
            )));
        }
        let min_eig = rho.min_eigenvalue();
        if min_eig < -STATE_TOL {
            return Err(Error::InvalidDensityMatrix(format!(
                "negative eigenvalue {min_eig:e}"
            )));
        }
        Ok(rho)
    }

    /// Wraps a matrix without validation; used for integrator output, where
    /// deviations are measured rather than rejected.
    pub fn from_matrix_unchecked(matrix: DMatrix<C64>) -> Self {
        Self { matrix }
    }

    /// |ψ⟩⟨ψ| for a normalized state vector.
    pub fn from_pure(psi: &DVector<C64>) -> Result<Self> {
        Self::new(psi * psi.adjoint())
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            matrix: DMatrix::identity(dim, dim) / C64::new(dim as f64, 0.0),
        }
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    /// tr(ρ²), computed without forming the product.
    pub fn purity(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn hermiticity_error(&self) -> f64 {
        hermiticity_deviation(&self.matrix)
    }

    /// Smallest eigenvalue of the hermitian part of ρ.
    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (&self.matrix + self.matrix.adjoint()) * C64::new(0.5, 0.0);
        SymmetricEigen::new(herm)
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// ⟨k|ρ|k⟩ for every basis state.
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|k| self.matrix[(k, k)].re).collect()
    }

    /// Reduced state of the qubits on the zero-photon block, renormalized.
    /// Returns the state unchanged if the layout has no cavity.
    pub fn zero_photon_block(&self, layout: &SpaceLayout) -> Result<Self> {
        if self.dim() != layout.dim() {
            return Err(Error::DimensionMismatch {
                expected: layout.dim(),
                found: self.dim(),
            });
        }
        let levels = layout.cavity_levels();
        let q = layout.dim() / levels;
        let block = DMatrix::from_fn(q, q, |r, c| self.matrix[(r * levels, c * levels)]);
        Ok(Self { matrix: block })
    }
}

/// Pure product state with `excited` qubits in |e⟩, the rest in |g⟩ and the cavity in |0⟩.
pub fn initial_state(layout: &SpaceLayout, excited: &[usize]) -> Result<DensityMatrix> {
    if let Some(&bad) = excited.iter().find(|&&q| q >= layout.num_qubits()) {
        return Err(Error::IndexOutOfRange {
            index: bad,
            count: layout.num_qubits(),
        });
    }
    let d = layout.dim();
    let k = layout.basis_index(excited, 0);
    let mut m = DMatrix::zeros(d, d);
    m[(k, k)] = C64::new(1.0, 0.0);
    Ok(DensityMatrix { matrix: m })
}

/// tr(ρ·op). For hermitian-tagged operators the result is real; an
/// imaginary residue above 1e-10 (relative to the operator scale) is an error.
pub fn expectation(rho: &DensityMatrix, op: &OperatorMatrix) -> Result<C64> {
    if rho.dim() != op.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: op.dim(),
        });
    }
    let (a, b) = (rho.matrix(), op.matrix());
    let d = rho.dim();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..d {
        for j in 0..d {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    if op.is_hermitian() {
        let scale = max_abs(b).max(1.0);
        if acc.im.abs() > STATE_TOL * scale {
            return Err(Error::ComplexExpectation(acc.im));
        }
        acc.im = 0.0;
    }
    Ok(acc)
}
