//! Conversions between cyclic (Hz) and angular (rad/s) frequencies.
//!
//! All physics code works in rad/s and seconds; user-facing values are Hz and ns.

use std::f64::consts::TAU;

/// 2π × 1 GHz in rad/s.
pub const TWO_PI_GHZ: f64 = TAU * 1e9;
/// 2π × 1 MHz in rad/s.
pub const TWO_PI_MHZ: f64 = TAU * 1e6;

pub const NANOSECOND: f64 = 1e-9;

pub fn hz_to_angular(hz: f64) -> f64 {
    TAU * hz
}

pub fn angular_to_hz(omega: f64) -> f64 {
    omega / TAU
}

pub fn ns_to_s(ns: f64) -> f64 {
    ns * NANOSECOND
}

pub fn s_to_ns(s: f64) -> f64 {
    s / NANOSECOND
}
