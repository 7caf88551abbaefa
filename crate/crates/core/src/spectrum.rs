//! Emission spectrum of one frequency-modulated qubit: a comb of lines at
//! ω₀ + nM with weights J_n(D/M)².

use std::f64::consts::PI;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::effective::bessel::{self, orders_unchecked};
use crate::error::{Error, Result};
use crate::units::angular_to_hz;

/// Orders kept beyond ceil(D/M).
pub const MIN_MARGIN: usize = 20;
pub const TAIL_LIMIT: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SidebandLine {
    pub order: i64,
    /// n·M (rad/s) relative to ω₀.
    pub offset: f64,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SidebandComb {
    pub amplitude: f64,
    pub frequency: f64,
    /// Ordered by n from −n_max to n_max.
    pub lines: Vec<SidebandLine>,
}

impl SidebandComb {
    pub fn ratio(&self) -> f64 {
        self.amplitude / self.frequency
    }

    pub fn n_max(&self) -> usize {
        self.lines.len() / 2
    }

    pub fn weight(&self, order: i64) -> f64 {
        let idx = order + self.n_max() as i64;
        if idx < 0 {
            return 0.0;
        }
        self.lines.get(idx as usize).map_or(0.0, |l| l.weight)
    }

    pub fn total_weight(&self) -> f64 {
        self.lines.iter().map(|l| l.weight).sum()
    }

    /// Writes `offset_hz,weight` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["offset_hz", "weight"]).map_err(csv_error)?;
        for line in &self.lines {
            w.write_record([
                format!("{:e}", angular_to_hz(line.offset)),
                format!("{:e}", line.weight),
            ])
            .map_err(csv_error)?;
        }
        w.flush()?;
        Ok(())
    }
}

pub(crate) fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Io(std::io::Error::other(format!("{other:?}"))),
    }
}

/// Lines n ∈ [−n_max, n_max] with weight J_n(D/M)².
pub fn sideband_comb(amplitude: f64, frequency: f64, n_max: usize) -> Result<SidebandComb> {
    if !(frequency > 0.0 && frequency.is_finite()) {
        return Err(Error::drive("frequency", "M must be positive"));
    }
    if !(amplitude >= 0.0 && amplitude.is_finite()) {
        return Err(Error::drive("amplitude", "D must be non-negative"));
    }
    let ratio = amplitude / frequency;
    if ratio > bessel::MAX_ARGUMENT || n_max as i64 > bessel::MAX_ORDER {
        return Err(Error::BesselDomain {
            order: n_max as i64,
            x: ratio,
        });
    }
    let orders = orders_unchecked(n_max, ratio);
    let total = orders[0] * orders[0] + 2.0 * orders[1..].iter().map(|v| v * v).sum::<f64>();
    let tail = (1.0 - total).max(0.0);
    if n_max < ratio.ceil() as usize + MIN_MARGIN || tail > TAIL_LIMIT {
        return Err(Error::CombTooNarrow { n_max, ratio, tail });
    }
    let n = n_max as i64;
    let lines = (-n..=n)
        .map(|k| {
            let j = orders[k.unsigned_abs() as usize];
            SidebandLine {
                order: k,
                offset: k as f64 * frequency,
                weight: j * j,
            }
        })
        .collect();
    Ok(SidebandComb {
        amplitude,
        frequency,
        lines,
    })
}

/// Spectral density of the comb on `grid` (rad/s offsets). With a positive
/// linewidth γ each line is the unit-area Lorentzian (γ/2π) / (Δω² + γ²/4);
/// with zero linewidth each weight is placed on its nearest grid point.
pub fn render_spectrum(comb: &SidebandComb, linewidth: f64, grid: &[f64]) -> Result<Vec<f64>> {
    if !(linewidth >= 0.0 && linewidth.is_finite()) {
        return Err(Error::spec("linewidth", "must be non-negative"));
    }
    if linewidth > 0.0 {
        let half = linewidth / 2.0;
        return Ok(grid
            .iter()
            .map(|&w| {
                comb.lines
                    .iter()
                    .map(|l| l.weight * (linewidth / (2.0 * PI)) / ((w - l.offset).powi(2) + half * half))
                    .sum()
            })
            .collect());
    }
    let mut out = vec![0.0; grid.len()];
    if grid.is_empty() {
        return Ok(out);
    }
    for line in &comb.lines {
        let nearest = grid
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - line.offset).abs().total_cmp(&(b.1 - line.offset).abs()))
            .map(|(k, _)| k)
            .unwrap_or(0);
        out[nearest] += line.weight;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::TWO_PI_GHZ;

    #[test]
    fn undriven_comb_is_a_single_line() {
        let comb = sideband_comb(0.0, 1.0, 20).unwrap();
        assert_eq!(comb.weight(0), 1.0);
        assert_eq!(comb.total_weight(), 1.0);
        assert!(comb.lines.iter().filter(|l| l.order != 0).all(|l| l.weight == 0.0));
    }

    #[test]
    fn weights_are_symmetric_and_normalized() {
        for ratio in [0.3, 0.92, 2.5, 7.0] {
            let m = 6.0 * TWO_PI_GHZ;
            let comb = sideband_comb(ratio * m, m, ratio.ceil() as usize + 20).unwrap();
            assert!((comb.total_weight() - 1.0).abs() < 1e-10);
            assert!(comb.total_weight() <= 1.0 + 1e-15);
            for n in 1..10 {
                assert_eq!(comb.weight(n), comb.weight(-n));
            }
        }
    }

    #[test]
    fn second_sideband_ratio_at_optimum() {
        let comb = sideband_comb(0.92, 1.0, 21).unwrap();
        let ratio = comb.weight(2) / comb.weight(1);
        let oracle = (bessel::bessel_j(2, 0.92).unwrap() / bessel::bessel_j(1, 0.92).unwrap()).powi(2);
        assert!((ratio - oracle).abs() < 1e-14);
        assert!((ratio - 0.06).abs() < 0.005, "{ratio}");
    }

    #[test]
    fn narrow_comb_is_rejected() {
        assert!(matches!(sideband_comb(5.0, 1.0, 24), Err(Error::CombTooNarrow { .. })));
        assert!(sideband_comb(5.0, 1.0, 25).is_ok());
        assert!(sideband_comb(1.0, 0.0, 25).is_err());
    }

    #[test]
    fn stick_spectrum_reproduces_weights() {
        let comb = sideband_comb(0.92, 1.0, 21).unwrap();
        let grid: Vec<f64> = (-30..=30).map(f64::from).collect();
        let sticks = render_spectrum(&comb, 0.0, &grid).unwrap();
        for line in &comb.lines {
            assert_eq!(sticks[(line.order + 30) as usize], line.weight);
        }
    }

    #[test]
    fn lorentzian_peak_height() {
        let comb = sideband_comb(0.0, 1.0, 20).unwrap();
        let gamma = 0.01;
        let s = render_spectrum(&comb, gamma, &[0.0]).unwrap();
        assert!((s[0] - 2.0 / (PI * gamma)).abs() < 1e-9 * s[0]);
    }

    #[test]
    fn lorentzian_area_is_conserved() {
        let comb = sideband_comb(1.3, 1.0, 22).unwrap();
        let gamma = 0.05;
        let span = (comb.n_max() + 2) as f64;
        let step = gamma / 10.0;
        let count = (2.0 * span / step) as usize + 1;
        let grid: Vec<f64> = (0..count).map(|k| -span + k as f64 * step).collect();
        let density = render_spectrum(&comb, gamma, &grid).unwrap();
        let area: f64 = density.iter().sum::<f64>() * step;
        assert!((area - comb.total_weight()).abs() < 0.01, "{area}");
    }

    #[test]
    fn csv_header_and_units() {
        let comb = sideband_comb(0.92e9, 2.0 * PI * 1e9, 21).unwrap();
        let mut buf = Vec::new();
        comb.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("offset_hz,weight"));
        let first: Vec<f64> = lines.next().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
        assert!((first[0] + 21e9).abs() < 1e-3);
        assert_eq!(text.lines().count(), 44);
    }
}
