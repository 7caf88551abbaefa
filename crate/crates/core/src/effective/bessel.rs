//! Bessel functions of the first kind for integer order.
//!
//! Miller's downward recurrence J_{k-1} = (2k/x) J_k − J_{k+1}, started well
//! above max(n, x) and normalized with J_0 + 2 Σ J_{2k} = 1. The recurrence
//! runs toward the minimal solution, so it is stable for every order up to
//! the start index.

use crate::error::{Error, Result};

pub const MAX_ORDER: i64 = 200;
pub const MAX_ARGUMENT: f64 = 50.0;

const START_MARGIN: usize = 60;
const RESCALE_ABOVE: f64 = 1e250;
const RESCALE_BY: f64 = 1e-250;
const SMALL_ARGUMENT: f64 = 1e-8;

/// J_n(x) for |n| ≤ 200 and |x| ≤ 50, accurate to about 1e-15 absolute.
pub fn bessel_j(order: i64, x: f64) -> Result<f64> {
    check_domain(order, x)?;
    Ok(bessel_j_unchecked(order, x))
}

/// [J_0(x), …, J_{n_max}(x)] for n_max ≤ 200 and |x| ≤ 50.
pub fn bessel_j_orders(n_max: usize, x: f64) -> Result<Vec<f64>> {
    check_domain(n_max as i64, x)?;
    Ok(orders_unchecked(n_max, x))
}

fn check_domain(order: i64, x: f64) -> Result<()> {
    if order.abs() > MAX_ORDER || !x.is_finite() || x.abs() > MAX_ARGUMENT {
        return Err(Error::BesselDomain { order, x });
    }
    Ok(())
}

pub(crate) fn bessel_j_unchecked(order: i64, x: f64) -> f64 {
    let n = order.unsigned_abs() as usize;
    let value = orders_unchecked(n, x)[n];
    if order < 0 && n % 2 == 1 {
        -value
    } else {
        value
    }
}

/// Orders 0..=n_max at any finite x, using J_n(−x) = (−1)^n J_n(x).
pub(crate) fn orders_unchecked(n_max: usize, x: f64) -> Vec<f64> {
    let mut out = if x == 0.0 {
        let mut v = vec![0.0; n_max + 1];
        v[0] = 1.0;
        v
    } else if x.abs() < SMALL_ARGUMENT {
        small_argument(n_max, x.abs())
    } else {
        miller(n_max, x.abs())
    };
    if x < 0.0 {
        for (k, v) in out.iter_mut().enumerate() {
            if k % 2 == 1 {
                *v = -*v;
            }
        }
    }
    out
}

/// Two-term power series; exact to double precision for |x| < 1e-8.
fn small_argument(n_max: usize, x: f64) -> Vec<f64> {
    let half = x / 2.0;
    let mut term = 1.0; // (x/2)^k / k!
    let mut out = Vec::with_capacity(n_max + 1);
    for k in 0..=n_max {
        if k > 0 {
            term *= half / k as f64;
        }
        out.push(term * (1.0 - half * half / (k + 1) as f64));
    }
    out
}

fn miller(n_max: usize, x: f64) -> Vec<f64> {
    let top = n_max.max(x.ceil() as usize) + START_MARGIN + x.ceil() as usize;
    let start = top + top % 2;
    let mut j = vec![0.0; start + 2];
    j[start] = 1e-300;
    for k in (1..=start).rev() {
        let prev = (2.0 * k as f64 / x) * j[k] - j[k + 1];
        j[k - 1] = prev;
        if prev.abs() > RESCALE_ABOVE {
            for v in &mut j[k - 1..=start] {
                *v *= RESCALE_BY;
            }
        }
    }
    let norm = j[0] + 2.0 * j.iter().skip(2).step_by(2).sum::<f64>();
    j.truncate(n_max + 1);
    for v in &mut j {
        *v /= norm;
    }
    j
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    /// Integral representation J_n(x) = (1/2π) ∫_0^{2π} cos(nτ − x sin τ) dτ,
    /// evaluated with the periodic trapezoid rule (spectrally accurate).
    fn quadrature(n: i64, x: f64) -> f64 {
        let m = 4096;
        let h = 2.0 * PI / m as f64;
        (0..m)
            .map(|k| {
                let tau = k as f64 * h;
                (n as f64 * tau - x * tau.sin()).cos()
            })
            .sum::<f64>()
            / m as f64
    }

    #[test]
    fn values_at_zero() {
        assert_eq!(bessel_j(0, 0.0).unwrap(), 1.0);
        for n in 1..20 {
            assert_eq!(bessel_j(n, 0.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn first_order_at_first_maximum() {
        let oracle = quadrature(1, 1.8412);
        let value = bessel_j(1, 1.8412).unwrap();
        assert!((oracle - 0.581865).abs() < 1e-6);
        assert!((value - oracle).abs() < 1e-13);
    }

    #[test]
    fn matches_quadrature_oracle() {
        let xs = [1e-6, 0.01, 0.3, 0.92, 1.8412, 3.0542, 5.0, 9.7, 17.3, 31.0, 49.9];
        for &x in &xs {
            for n in [0, 1, 2, 3, 5, 8, 13, 21, 34, 55, 89, 144, 200] {
                let a = bessel_j(n, x).unwrap();
                let b = quadrature(n, x);
                assert!((a - b).abs() < 1e-12, "J_{n}({x}): {a} vs {b}");
            }
        }
    }

    #[test]
    fn negative_order_and_argument() {
        for &x in &[0.5, 2.2, 11.0] {
            for n in 0..12i64 {
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                let jn = bessel_j(n, x).unwrap();
                assert!((bessel_j(-n, x).unwrap() - sign * jn).abs() < 1e-15);
                assert!((bessel_j(n, -x).unwrap() - sign * jn).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn sequence_agrees_with_single_orders() {
        let seq = bessel_j_orders(40, 7.5).unwrap();
        for (n, v) in seq.iter().enumerate() {
            assert!((v - bessel_j(n as i64, 7.5).unwrap()).abs() < 1e-15);
        }
    }

    #[test]
    fn domain_is_enforced() {
        assert!(bessel_j(201, 1.0).is_err());
        assert!(bessel_j(-201, 1.0).is_err());
        assert!(bessel_j(1, 50.5).is_err());
        assert!(bessel_j(1, f64::NAN).is_err());
        assert!(bessel_j(200, 50.0).is_ok());
    }

    #[test]
    fn sum_of_squares_is_one() {
        for &x in &[0.1f64, 0.92, 1.84, 4.0, 20.0, 50.0] {
            let cut = x.ceil() as usize + 40;
            let seq = bessel_j_orders(cut, x).unwrap();
            let total = seq[0] * seq[0] + 2.0 * seq[1..].iter().map(|v| v * v).sum::<f64>();
            assert!((total - 1.0).abs() < 1e-10, "x = {x}: {total}");
        }
    }
}
