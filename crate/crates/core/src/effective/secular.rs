//! Drive-induced secular coupling between a qubit pair.
//!
//! In the interaction picture each modulated qubit carries a Jacobi–Anger
//! comb of sidebands. Keeping only the terms whose sideband difference N
//! matches the pair detuning gives
//!
//! G^N = J e^{iNφ_i} Σ_n J_{n+N}(D_i/M) J_n(D_j/M) e^{inΔφ}
//!     = J e^{iNφ_i} e^{iNψ} J_N(z)
//!
//! with z² = x_i² + x_j² − 2 x_i x_j cos Δφ and Δφ = φ_i − φ_j (Graf).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::bessel::{self, bessel_j_unchecked, orders_unchecked};
use crate::error::{Error, Result};
use crate::hamiltonian::DriveParams;
use crate::space::C64;

/// Extra sideband orders kept beyond ceil(D/M).
pub const SERIES_MARGIN: i64 = 40;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingMethod {
    /// Truncated double-sideband sum.
    Series,
    /// Graf closed form.
    ClosedForm,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrafParams {
    pub z: f64,
    pub psi: f64,
}

/// z and ψ for amplitudes `d1`, `d2`, drive frequency `m` and phase
/// difference `dphi` = φ_1 − φ_2.
///
/// ψ satisfies z sin ψ = x₂ sin Δφ and z cos ψ = x₁ − x₂ cos Δφ, which fixes
/// the branch for every Δφ; ψ = 0 when z = 0.
pub fn graf_params(d1: f64, d2: f64, m: f64, dphi: f64) -> Result<GrafParams> {
    if !(m > 0.0) {
        return Err(Error::drive("frequency", "M must be positive"));
    }
    let (x1, x2) = (d1 / m, d2 / m);
    let sin_part = x2 * dphi.sin();
    let cos_part = x1 - x2 * dphi.cos();
    let z = (x1 * x1 + x2 * x2 - 2.0 * x1 * x2 * dphi.cos()).max(0.0).sqrt();
    let psi = if z == 0.0 { 0.0 } else { sin_part.atan2(cos_part) };
    Ok(GrafParams { z, psi })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SecularCoupling {
    /// Sideband order N.
    pub order: i64,
    /// G^N (rad/s).
    pub value: C64,
    /// Static dispersive coupling J the value is built from (rad/s).
    pub static_coupling: f64,
    pub z: f64,
    pub psi: f64,
    /// Δφ = φ_i − φ_j
    pub relative_phase: f64,
}

impl SecularCoupling {
    pub fn magnitude(&self) -> f64 {
        self.value.norm()
    }

    /// |G| / J
    pub fn normalized(&self) -> f64 {
        if self.static_coupling == 0.0 {
            0.0
        } else {
            self.magnitude() / self.static_coupling.abs()
        }
    }

    /// Time of the first population maximum, π / (2|G|).
    pub fn transfer_time(&self) -> f64 {
        PI / (2.0 * self.magnitude())
    }
}

/// ceil(max(D_i, D_j)/M) + 40
pub fn series_cutoff(drive: &DriveParams, pair: (usize, usize)) -> i64 {
    let d = drive.amplitudes[pair.0].max(drive.amplitudes[pair.1]);
    (d / drive.frequency).ceil() as i64 + SERIES_MARGIN
}

/// G^N between qubits `pair.0` and `pair.1`, given their static coupling J.
pub fn secular_coupling(
    j12: f64,
    drive: &DriveParams,
    pair: (usize, usize),
    order: i64,
    method: CouplingMethod,
) -> Result<SecularCoupling> {
    let (i, j) = pair;
    let n = drive.num_qubits();
    for idx in [i, j] {
        if idx >= n {
            return Err(Error::IndexOutOfRange { index: idx, count: n });
        }
    }
    drive.validate(n)?;
    let m = drive.frequency;
    let (d1, d2) = (drive.amplitudes[i], drive.amplitudes[j]);
    let dphi = drive.relative_phase(i, j);
    let prefactor = C64::from_polar(j12, order as f64 * drive.phases[i]);

    if !drive.is_driven() && m == 0.0 {
        // Undriven: only the N = 0 term survives, with weight J_0(0)² = 1.
        let value = if order == 0 { prefactor } else { C64::new(0.0, 0.0) };
        return Ok(SecularCoupling {
            order,
            value,
            static_coupling: j12,
            z: 0.0,
            psi: 0.0,
            relative_phase: dphi,
        });
    }

    let GrafParams { z, psi } = graf_params(d1, d2, m, dphi)?;
    let (x1, x2) = (d1 / m, d2 / m);
    if x1.max(x2) > bessel::MAX_ARGUMENT {
        return Err(Error::BesselDomain {
            order,
            x: x1.max(x2),
        });
    }
    let value = match method {
        CouplingMethod::Series => {
            let cut = series_cutoff(drive, pair);
            let needed = cut + order.abs();
            if needed > bessel::MAX_ORDER {
                return Err(Error::TruncationExceeded {
                    needed,
                    limit: bessel::MAX_ORDER,
                });
            }
            let a = orders_unchecked(needed as usize, x1);
            let b = orders_unchecked(needed as usize, x2);
            let signed = |seq: &[f64], k: i64| {
                let v = seq[k.unsigned_abs() as usize];
                if k < 0 && k % 2 != 0 {
                    -v
                } else {
                    v
                }
            };
            // Sum from the smallest terms inward to limit rounding.
            let mut ks: Vec<i64> = (-cut..=cut).collect();
            ks.sort_by_key(|k| std::cmp::Reverse(k.abs().max((k + order).abs())));
            let sum = ks.iter().fold(C64::new(0.0, 0.0), |acc, &k| {
                acc + C64::from_polar(signed(&a, k + order) * signed(&b, k), k as f64 * dphi)
            });
            prefactor * sum
        }
        CouplingMethod::ClosedForm => {
            prefactor * C64::from_polar(bessel_j_unchecked(order, z), order as f64 * psi)
        }
    };
    Ok(SecularCoupling {
        order,
        value,
        static_coupling: j12,
        z,
        psi,
        relative_phase: dphi,
    })
}

/// D/M maximizing |J_N(2D/M)| over (0, 5], i.e. the optimal amplitude for
/// equal, counter-phased drives (z = 2D/M).
pub fn optimal_drive_amplitude(order: i64) -> Result<f64> {
    if order < 1 {
        return Err(Error::drive("order", "sideband order must be at least 1"));
    }
    let objective = |r: f64| bessel_j_unchecked(order, 2.0 * r).abs();
    let step = 1e-2;
    let (best_k, _) = (1..=500)
        .map(|k| (k, objective(k as f64 * step)))
        .fold((1, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best });
    let lo = ((best_k as f64 - 1.0) * step).max(0.0);
    let hi = ((best_k as f64 + 1.0) * step).min(5.0);
    Ok(golden_section_max(objective, lo, hi, 1e-10))
}

fn golden_section_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    (a + b) / 2.0
}
