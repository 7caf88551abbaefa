//! Explicit Runge–Kutta integration of complex-valued linear ODE systems.
//!
//! The adaptive scheme is the Dormand–Prince 5(4) pair with FSAL and a
//! standard elementary step-size controller; the fixed-step classical RK4
//! path exists as an independent cross-check.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::C64;

pub trait OdeSystem {
    /// Length of the state vector.
    fn len(&self) -> usize;

    fn rhs(&self, t: f64, y: &[C64], dy: &mut [C64]);
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rtol: 1e-8,
            atol: 1e-10,
        }
    }
}

impl Tolerances {
    pub fn halved(self) -> Self {
        Self {
            rtol: self.rtol / 2.0,
            atol: self.atol / 2.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Stepper {
    Adaptive(Tolerances),
    FixedRk4 { dt: f64 },
}

impl Default for Stepper {
    fn default() -> Self {
        Stepper::Adaptive(Tolerances::default())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct IntegratorStats {
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub rhs_evaluations: usize,
    pub min_step: f64,
    pub max_step: f64,
}

impl IntegratorStats {
    fn record(&mut self, h: f64) {
        self.accepted_steps += 1;
        if self.accepted_steps == 1 {
            self.min_step = h;
            self.max_step = h;
        } else {
            self.min_step = self.min_step.min(h);
            self.max_step = self.max_step.max(h);
        }
    }

    /// Combines statistics of independent runs.
    pub fn merge(&mut self, other: &IntegratorStats) {
        if other.accepted_steps == 0 {
            return;
        }
        if self.accepted_steps == 0 {
            *self = *other;
            return;
        }
        self.accepted_steps += other.accepted_steps;
        self.rejected_steps += other.rejected_steps;
        self.rhs_evaluations += other.rhs_evaluations;
        self.min_step = self.min_step.min(other.min_step);
        self.max_step = self.max_step.max(other.max_step);
    }
}

pub const DEFAULT_MAX_STEPS: usize = 50_000_000;

// Dormand–Prince tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;

/// Integrates `system` from `sample_times[0]` with state `y0`, calling
/// `observer(index, t, y)` at every sample time (including the first).
pub fn integrate<S, F>(
    system: &S,
    y0: Vec<C64>,
    sample_times: &[f64],
    stepper: Stepper,
    max_steps: usize,
    mut observer: F,
) -> Result<IntegratorStats>
where
    S: OdeSystem + ?Sized,
    F: FnMut(usize, f64, &[C64]) -> Result<()>,
{
    assert_eq!(y0.len(), system.len(), "state length mismatch");
    assert!(!sample_times.is_empty(), "need at least one sample time");
    assert!(
        sample_times.windows(2).all(|w| w[1] > w[0]),
        "sample times must be strictly increasing"
    );
    observer(0, sample_times[0], &y0)?;
    match stepper {
        Stepper::Adaptive(tol) => dopri5(system, y0, sample_times, tol, max_steps, observer),
        Stepper::FixedRk4 { dt } => rk4(system, y0, sample_times, dt, max_steps, observer),
    }
}

#[inline]
fn axpy_into(out: &mut [C64], y: &[C64], h: f64, terms: &[(f64, &[C64])]) {
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = C64::new(0.0, 0.0);
        for (coef, k) in terms {
            acc += k[i] * *coef;
        }
        *o = y[i] + acc * h;
    }
}

fn error_norm(err: &[C64], y: &[C64], y_new: &[C64], tol: Tolerances) -> f64 {
    let sum: f64 = err
        .iter()
        .zip(y.iter().zip(y_new))
        .map(|(e, (a, b))| {
            let sc = tol.atol + tol.rtol * a.norm().max(b.norm());
            e.norm_sqr() / (sc * sc)
        })
        .sum();
    (sum / err.len() as f64).sqrt()
}

fn initial_step<S: OdeSystem + ?Sized>(
    system: &S,
    t0: f64,
    y0: &[C64],
    f0: &[C64],
    tol: Tolerances,
    span: f64,
    stats: &mut IntegratorStats,
) -> f64 {
    let n = y0.len() as f64;
    let scale = |y: &C64| tol.atol + tol.rtol * y.norm();
    let d0 = (y0.iter().map(|y| (y.norm() / scale(y)).powi(2)).sum::<f64>() / n).sqrt();
    let d1 = (f0
        .iter()
        .zip(y0)
        .map(|(f, y)| (f.norm() / scale(y)).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6 * span
    } else {
        0.01 * d0 / d1
    };
    let h0 = h0.min(span);
    let y1: Vec<C64> = y0.iter().zip(f0).map(|(y, f)| y + f * h0).collect();
    let mut f1 = vec![C64::new(0.0, 0.0); y0.len()];
    system.rhs(t0 + h0, &y1, &mut f1);
    stats.rhs_evaluations += 1;
    let d2 = (f1
        .iter()
        .zip(f0)
        .zip(y0)
        .map(|((a, b), y)| ((a - b).norm() / scale(y)).powi(2))
        .sum::<f64>()
        / n)
        .sqrt()
        / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6 * span)
    } else {
        (0.01 / d1.max(d2)).powf(1.0 / 5.0)
    };
    (100.0 * h0).min(h1).min(span)
}

fn dopri5<S, F>(
    system: &S,
    mut y: Vec<C64>,
    samples: &[f64],
    tol: Tolerances,
    max_steps: usize,
    mut observer: F,
) -> Result<IntegratorStats>
where
    S: OdeSystem + ?Sized,
    F: FnMut(usize, f64, &[C64]) -> Result<()>,
{
    let n = y.len();
    let zero = C64::new(0.0, 0.0);
    let mut stats = IntegratorStats::default();
    let t_start = samples[0];
    let span = samples[samples.len() - 1] - t_start;
    if samples.len() == 1 {
        return Ok(stats);
    }

    let mut k1 = vec![zero; n];
    let mut k2 = vec![zero; n];
    let mut k3 = vec![zero; n];
    let mut k4 = vec![zero; n];
    let mut k5 = vec![zero; n];
    let mut k6 = vec![zero; n];
    let mut k7 = vec![zero; n];
    let mut stage = vec![zero; n];
    let mut y_new = vec![zero; n];
    let mut err = vec![zero; n];

    let mut t = t_start;
    system.rhs(t, &y, &mut k1);
    stats.rhs_evaluations += 1;
    let mut h = initial_step(system, t, &y, &k1, tol, span, &mut stats);
    let mut last_rejected = false;

    for (idx, &target) in samples.iter().enumerate().skip(1) {
        while t < target {
            if stats.accepted_steps + stats.rejected_steps >= max_steps {
                return Err(Error::TooManySteps(max_steps));
            }
            let remaining = target - t;
            // Land exactly on the sample when within a hair of it.
            let clipped = h >= remaining * (1.0 - 1e-12);
            let h_try = if clipped { remaining } else { h };
            if h_try <= 16.0 * f64::EPSILON * t.abs().max(span) {
                return Err(Error::StepSizeUnderflow { t, h: h_try });
            }

            axpy_into(&mut stage, &y, h_try, &[(A21, &k1)]);
            system.rhs(t + C2 * h_try, &stage, &mut k2);
            axpy_into(&mut stage, &y, h_try, &[(A31, &k1), (A32, &k2)]);
            system.rhs(t + C3 * h_try, &stage, &mut k3);
            axpy_into(&mut stage, &y, h_try, &[(A41, &k1), (A42, &k2), (A43, &k3)]);
            system.rhs(t + C4 * h_try, &stage, &mut k4);
            axpy_into(
                &mut stage,
                &y,
                h_try,
                &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)],
            );
            system.rhs(t + C5 * h_try, &stage, &mut k5);
            axpy_into(
                &mut stage,
                &y,
                h_try,
                &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
            );
            system.rhs(t + h_try, &stage, &mut k6);
            axpy_into(
                &mut y_new,
                &y,
                h_try,
                &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
            );
            let t_new = if clipped { target } else { t + h_try };
            system.rhs(t_new, &y_new, &mut k7);
            stats.rhs_evaluations += 6;

            for i in 0..n {
                err[i] = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7)
                    * h_try;
            }
            let e = error_norm(&err, &y, &y_new, tol);

            if e.is_finite() && e <= 1.0 {
                stats.record(h_try);
                t = t_new;
                std::mem::swap(&mut y, &mut y_new);
                std::mem::swap(&mut k1, &mut k7);
                let mut fac = if e == 0.0 {
                    FAC_MAX
                } else {
                    (SAFETY * e.powf(-0.2)).clamp(FAC_MIN, FAC_MAX)
                };
                if last_rejected {
                    fac = fac.min(1.0);
                }
                let proposed = h_try * fac;
                h = if clipped { proposed.max(h) } else { proposed };
                last_rejected = false;
            } else {
                stats.rejected_steps += 1;
                let fac = if e.is_finite() {
                    (SAFETY * e.powf(-0.2)).clamp(FAC_MIN, 1.0)
                } else {
                    FAC_MIN
                };
                h = h_try * fac;
                last_rejected = true;
            }
        }
        if y.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite { t });
        }
        observer(idx, t, &y)?;
    }
    Ok(stats)
}

fn rk4<S, F>(
    system: &S,
    mut y: Vec<C64>,
    samples: &[f64],
    dt: f64,
    max_steps: usize,
    mut observer: F,
) -> Result<IntegratorStats>
where
    S: OdeSystem + ?Sized,
    F: FnMut(usize, f64, &[C64]) -> Result<()>,
{
    assert!(dt > 0.0, "fixed step must be positive");
    let n = y.len();
    let zero = C64::new(0.0, 0.0);
    let mut stats = IntegratorStats::default();
    let (mut k1, mut k2, mut k3, mut k4) = (vec![zero; n], vec![zero; n], vec![zero; n], vec![zero; n]);
    let mut stage = vec![zero; n];
    let mut t = samples[0];
    for (idx, &target) in samples.iter().enumerate().skip(1) {
        // Equal substeps between consecutive samples.
        let steps = ((target - t) / dt).ceil().max(1.0) as usize;
        let h = (target - t) / steps as f64;
        let t0 = t;
        for s in 0..steps {
            if stats.accepted_steps >= max_steps {
                return Err(Error::TooManySteps(max_steps));
            }
            let ts = t0 + s as f64 * h;
            system.rhs(ts, &y, &mut k1);
            axpy_into(&mut stage, &y, h / 2.0, &[(1.0, &k1)]);
            system.rhs(ts + h / 2.0, &stage, &mut k2);
            axpy_into(&mut stage, &y, h / 2.0, &[(1.0, &k2)]);
            system.rhs(ts + h / 2.0, &stage, &mut k3);
            axpy_into(&mut stage, &y, h, &[(1.0, &k3)]);
            system.rhs(ts + h, &stage, &mut k4);
            for i in 0..n {
                y[i] += (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (h / 6.0);
            }
            stats.rhs_evaluations += 4;
            stats.record(h);
        }
        t = target;
        if y.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite { t });
        }
        observer(idx, t, &y)?;
    }
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// dy/dt = (λ + iω) y, componentwise.
    struct Linear {
        rates: Vec<C64>,
    }

    impl OdeSystem for Linear {
        fn len(&self) -> usize {
            self.rates.len()
        }
        fn rhs(&self, _t: f64, y: &[C64], dy: &mut [C64]) {
            for ((d, y), r) in dy.iter_mut().zip(y).zip(&self.rates) {
                *d = r * y;
            }
        }
    }

    /// Driven oscillator dy/dt = i cos(t) y, exact y = exp(i sin t).
    struct Driven;

    impl OdeSystem for Driven {
        fn len(&self) -> usize {
            1
        }
        fn rhs(&self, t: f64, y: &[C64], dy: &mut [C64]) {
            dy[0] = C64::new(0.0, t.cos()) * y[0];
        }
    }

    fn run(system: &dyn OdeSystem, y0: Vec<C64>, times: &[f64], stepper: Stepper) -> (Vec<Vec<C64>>, IntegratorStats) {
        let mut out = Vec::new();
        let stats = integrate(system, y0, times, stepper, DEFAULT_MAX_STEPS, |_, _, y| {
            out.push(y.to_vec());
            Ok(())
        })
        .unwrap();
        (out, stats)
    }

    #[test]
    fn exponential_decay_and_rotation() {
        let sys = Linear {
            rates: vec![C64::new(-1.0, 0.0), C64::new(-0.1, 30.0)],
        };
        let times: Vec<f64> = (0..=20).map(|k| k as f64 * 0.25).collect();
        let (out, stats) = run(&sys, vec![C64::new(1.0, 0.0); 2], &times, Stepper::default());
        for (y, &t) in out.iter().zip(&times) {
            for (yi, r) in y.iter().zip(&sys.rates) {
                let exact = (r * t).exp();
                assert!((yi - exact).norm() < 1e-6, "t={t} err={}", (yi - exact).norm());
            }
        }
        assert!(stats.rejected_steps < stats.accepted_steps);
    }

    #[test]
    fn time_dependent_phase() {
        let times: Vec<f64> = (0..=10).map(|k| k as f64).collect();
        for stepper in [Stepper::default(), Stepper::FixedRk4 { dt: 1e-3 }] {
            let (out, _) = run(&Driven, vec![C64::new(1.0, 0.0)], &times, stepper);
            for (y, &t) in out.iter().zip(&times) {
                let exact = C64::new(0.0, t.sin()).exp();
                assert!((y[0] - exact).norm() < 1e-6);
            }
        }
    }

    #[test]
    fn rk4_is_fourth_order() {
        let times = [0.0, 2.0];
        let exact = C64::new(0.0, 2f64.sin()).exp();
        let err = |dt| {
            let (out, _) = run(&Driven, vec![C64::new(1.0, 0.0)], &times, Stepper::FixedRk4 { dt });
            (out[1][0] - exact).norm()
        };
        let ratio = err(0.1) / err(0.05);
        assert!((12.0..20.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn tighter_tolerance_is_more_accurate() {
        let times = [0.0, 10.0];
        let exact = C64::new(0.0, 10f64.sin()).exp();
        let tol = Tolerances { rtol: 1e-5, atol: 1e-7 };
        let (loose, s1) = run(&Driven, vec![C64::new(1.0, 0.0)], &times, Stepper::Adaptive(tol));
        let (tight, s2) = run(
            &Driven,
            vec![C64::new(1.0, 0.0)],
            &times,
            Stepper::Adaptive(Tolerances { rtol: 1e-10, atol: 1e-12 }),
        );
        assert!((tight[1][0] - exact).norm() < (loose[1][0] - exact).norm());
        assert!(s2.accepted_steps > s1.accepted_steps);
    }

    #[test]
    fn step_limit_is_reported() {
        let r = integrate(&Driven, vec![C64::new(1.0, 0.0)], &[0.0, 100.0], Stepper::default(), 10, |_, _, _| Ok(()));
        assert!(matches!(r, Err(Error::TooManySteps(10))));
    }

    #[test]
    fn deterministic() {
        let times: Vec<f64> = (0..=5).map(f64::from).collect();
        let (a, sa) = run(&Driven, vec![C64::new(1.0, 0.0)], &times, Stepper::default());
        let (b, sb) = run(&Driven, vec![C64::new(1.0, 0.0)], &times, Stepper::default());
        assert_eq!(a, b);
        assert_eq!(sa, sb);
    }
}
