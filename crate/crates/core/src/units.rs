//! Unit conventions used throughout the crate.
//!
//! All internal quantities are carried in microseconds and angular
//! frequencies in rad/us. Config and fixture files use explicit unit
//! suffixes (`_us`, `_ns`, `_ms`, `_mhz_ang`, `_ghz_ang`, `_hz`) where
//! `_mhz_ang` denotes the coefficient `f` of an angular frequency written
//! as 2pi x f MHz.

use std::f64::consts::PI;

pub const TWO_PI: f64 = 2.0 * PI;

/// 2pi x `f` MHz expressed in rad/us.
pub fn mhz_ang(f: f64) -> f64 {
    TWO_PI * f
}

/// 2pi x `f` GHz expressed in rad/us.
pub fn ghz_ang(f: f64) -> f64 {
    TWO_PI * f * 1e3
}

/// Plain rate in Hz expressed in 1/us.
pub fn hz(rate: f64) -> f64 {
    rate * 1e-6
}

pub fn ns_to_us(t: f64) -> f64 {
    t * 1e-3
}

pub fn ms_to_us(t: f64) -> f64 {
    t * 1e3
}

pub fn us_to_ns(t: f64) -> f64 {
    t * 1e3
}
