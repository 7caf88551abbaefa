//! Cavity-mediated qubit–qubit couplings in the dispersive regime.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::h_static;
use crate::space::{lowering_operator, max_abs, OperatorMatrix, SpaceLayout, SystemSpec, C64};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DispersiveCouplings {
    /// J_ij = g²(Δ_i + Δ_j) / (2 Δ_i Δ_j), rad/s.
    pub matrix: DMatrix<f64>,
    /// Bare detunings δ_i (rad/s).
    pub detunings: Vec<f64>,
}

impl DispersiveCouplings {
    pub fn num_qubits(&self) -> usize {
        self.detunings.len()
    }

    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        self.matrix[(i, j)]
    }

    /// J_ii
    pub fn lamb_shift(&self, i: usize) -> f64 {
        self.matrix[(i, i)]
    }

    pub fn lamb_shifts(&self) -> Vec<f64> {
        (0..self.num_qubits()).map(|i| self.lamb_shift(i)).collect()
    }

    /// δ_i + J_ii
    pub fn dressed_frequency(&self, i: usize) -> f64 {
        self.detunings[i] + self.lamb_shift(i)
    }

    /// δ_ij = δ_j − δ_i + J_jj − J_ii
    pub fn effective_detuning(&self, i: usize, j: usize) -> f64 {
        self.dressed_frequency(j) - self.dressed_frequency(i)
    }
}

pub fn dispersive_couplings(spec: &SystemSpec) -> Result<DispersiveCouplings> {
    spec.validate()?;
    let n = spec.num_qubits();
    let big: Vec<f64> = (0..n).map(|q| spec.qubit_cavity_detuning(q)).collect();
    if let Some(q) = big.iter().position(|&d| d == 0.0) {
        return Err(Error::VanishingDetuning { qubit: q });
    }
    let g2 = spec.coupling * spec.coupling;
    let matrix = DMatrix::from_fn(n, n, |i, j| g2 * (big[i] + big[j]) / (2.0 * big[i] * big[j]));
    Ok(DispersiveCouplings {
        matrix,
        detunings: spec.qubit_detunings.clone(),
    })
}

/// H_eff = Σ_i δ_i σ_i†σ_i + Σ_ij J_ij σ_i†σ_j on the qubit-only space.
pub fn effective_hamiltonian(couplings: &DispersiveCouplings) -> Result<OperatorMatrix> {
    let n = couplings.num_qubits();
    let layout = SpaceLayout::qubits_only(n);
    let lowering: Vec<DMatrix<C64>> = (0..n)
        .map(|q| lowering_operator(&layout, q).map(OperatorMatrix::into_matrix))
        .collect::<Result<_>>()?;
    let d = layout.dim();
    let mut h = DMatrix::<C64>::zeros(d, d);
    for i in 0..n {
        let up = lowering[i].adjoint();
        h += &up * &lowering[i] * C64::new(couplings.detunings[i], 0.0);
        for j in 0..n {
            h += &up * &lowering[j] * C64::new(couplings.matrix[(i, j)], 0.0);
        }
    }
    OperatorMatrix::hermitian(h)
}

/// Max-norm distance between the zero-photon block of U†HU, with
/// U = exp(Σ_i (g/Δ_i)(a†σ_i − aσ_i†)), and H_eff.
pub fn dispersive_transform_residual(spec: &SystemSpec, layout: &SpaceLayout) -> Result<f64> {
    let couplings = dispersive_couplings(spec)?;
    let h = h_static(spec, layout)?.into_matrix();
    let cav = layout
        .cavity_index()
        .ok_or_else(|| Error::spec("fock_truncation", "the transform needs a cavity mode"))?;
    let a = lowering_operator(layout, cav)?.into_matrix();
    let d = layout.dim();
    let mut generator = DMatrix::<C64>::zeros(d, d);
    for q in 0..spec.num_qubits() {
        let s = lowering_operator(layout, q)?.into_matrix();
        let term = a.adjoint() * &s - &a * s.adjoint();
        generator += term * C64::new(spec.coupling / spec.qubit_cavity_detuning(q), 0.0);
    }
    let u = generator.exp();
    let transformed = u.adjoint() * h * &u;
    let levels = layout.cavity_levels();
    let q = d / levels;
    let block = DMatrix::from_fn(q, q, |r, c| transformed[(r * levels, c * levels)]);
    let h_eff = effective_hamiltonian(&couplings)?.into_matrix();
    Ok(max_abs(&(block - h_eff)))
}

/// Eigenvalues and eigenvectors of the single-excitation block of H_eff,
/// ordered by eigenvalue. Column k of the matrix is the k-th eigenvector in
/// the basis "qubit i excited".
pub fn single_excitation_spectrum(couplings: &DispersiveCouplings) -> (Vec<f64>, DMatrix<f64>) {
    let n = couplings.num_qubits();
    let block = DMatrix::from_fn(n, n, |i, j| {
        couplings.matrix[(i, j)] + if i == j { couplings.detunings[i] } else { 0.0 }
    });
    let eig = SymmetricEigen::new(block);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::{TWO_PI_GHZ, TWO_PI_MHZ};

    fn section_three(det: &[f64]) -> SystemSpec {
        SystemSpec::lossless(
            det.iter().map(|d| d * TWO_PI_GHZ).collect(),
            250.0 * TWO_PI_GHZ,
            5.0 * TWO_PI_GHZ,
        )
    }

    #[test]
    fn section_three_values() {
        let c = dispersive_couplings(&section_three(&[0.0, 6.0])).unwrap();
        assert!((c.lamb_shift(0) - 100.0 * TWO_PI_MHZ).abs() < 1e-6);
        // 25 · 506 / (2 · 250 · 256) GHz
        let j12 = 25.0 * 506.0 / (2.0 * 250.0 * 256.0) * TWO_PI_GHZ;
        assert!((c.coupling(0, 1) - j12).abs() < 1e-12 * j12);
        assert!((c.coupling(0, 1) / TWO_PI_MHZ - 98.83).abs() < 5e-3);
        assert_eq!(c.coupling(0, 1), c.coupling(1, 0));
        let expected = 6.0 * TWO_PI_GHZ + c.lamb_shift(1) - c.lamb_shift(0);
        assert!((c.effective_detuning(0, 1) - expected).abs() < 1e-3);
        assert!((c.effective_detuning(1, 0) + expected).abs() < 1e-3);
    }

    #[test]
    fn degenerate_qubits_share_one_coupling() {
        let spec = section_three(&[0.0, 0.0, 0.0]);
        let c = dispersive_couplings(&spec).unwrap();
        let j = spec.coupling * spec.coupling / spec.cavity_detuning;
        for v in c.matrix.iter() {
            assert_eq!(*v, j);
        }
    }

    #[test]
    fn vanishing_detuning_is_rejected() {
        let spec = SystemSpec::lossless(vec![0.0, -1.0], 1.0, 0.1);
        assert!(matches!(
            dispersive_couplings(&spec),
            Err(Error::VanishingDetuning { qubit: 1 })
        ));
    }

    #[test]
    fn two_qubit_block() {
        let c = dispersive_couplings(&section_three(&[0.0, 6.0])).unwrap();
        let h = effective_hamiltonian(&c).unwrap().into_matrix();
        let layout = SpaceLayout::qubits_only(2);
        let e1 = layout.basis_index(&[0], 0);
        let e2 = layout.basis_index(&[1], 0);
        assert_eq!(h[(e1, e1)].re, c.detunings[0] + c.lamb_shift(0));
        assert_eq!(h[(e2, e2)].re, c.detunings[1] + c.lamb_shift(1));
        assert_eq!(h[(e1, e2)].re, c.coupling(0, 1));
        assert_eq!(h[(e2, e1)].re, c.coupling(0, 1));
        assert_eq!(h[(0, 0)].re, 0.0);
    }

    #[test]
    fn degenerate_splitting_is_twice_the_coupling() {
        let c = dispersive_couplings(&section_three(&[1.0, 1.0])).unwrap();
        let (values, _) = single_excitation_spectrum(&c);
        assert!((values[1] - values[0] - 2.0 * c.coupling(0, 1)).abs() < 1e-9 * values[1].abs());
    }

    #[test]
    fn detuned_qubits_stay_bare() {
        let c = dispersive_couplings(&section_three(&[0.0, 6.0])).unwrap();
        let (_, vectors) = single_excitation_spectrum(&c);
        let overlap = vectors[(0, 0)].powi(2);
        assert!(overlap > 0.999, "{overlap}");
    }

    #[test]
    fn residual_vanishes_without_coupling() {
        let mut spec = section_three(&[0.0, 6.0]);
        spec.coupling = 0.0;
        let layout = SpaceLayout::new(2, 3);
        assert_eq!(dispersive_transform_residual(&spec, &layout).unwrap(), 0.0);
    }

    #[test]
    fn residual_is_small_at_section_three_parameters() {
        let spec = section_three(&[0.0, 6.0]);
        let layout = SpaceLayout::new(2, 3);
        let r = dispersive_transform_residual(&spec, &layout).unwrap();
        let g = spec.coupling;
        let bound = (g / spec.cavity_detuning).powi(2) * g;
        assert!(r < bound, "{r} vs {bound}");
        assert!(r < 1e-3 * g);
    }

    #[test]
    fn matches_full_single_excitation_spectrum() {
        let spec = section_three(&[0.0, 6.0, 8.0]);
        let layout = SpaceLayout::new(3, 3);
        let c = dispersive_couplings(&spec).unwrap();
        let (effective, _) = single_excitation_spectrum(&c);
        let h = h_static(&spec, &layout).unwrap().into_matrix();
        let idx: Vec<usize> = (0..3)
            .map(|q| layout.basis_index(&[q], 0))
            .chain([layout.basis_index(&[], 1)])
            .collect();
        let block = DMatrix::from_fn(4, 4, |r, col| h[(idx[r], idx[col])]);
        let eig = SymmetricEigen::new(block);
        // Drop the photon-like state, which sits near −Δ.
        let mut full: Vec<f64> = eig.eigenvalues.iter().copied().filter(|&e| e > -spec.cavity_detuning / 2.0).collect();
        full.sort_by(f64::total_cmp);
        let g = spec.coupling;
        let tol = (g / spec.cavity_detuning).powi(2) * g;
        for (a, b) in effective.iter().zip(&full) {
            assert!((a - b).abs() < tol, "{a} vs {b}");
        }
    }
}
