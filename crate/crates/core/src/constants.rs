//! Physical constants (CODATA 2018, SI exact where defined).

#[allow(unused_imports)]
use crate::prelude::*;

/// Reduced Planck constant, J s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Speed of light in vacuum, m/s.
pub const C: f64 = 299_792_458.0;
/// Boltzmann constant, J/K.
pub const K_B: f64 = 1.380_649e-23;

pub use core::f64::consts::{PI, TAU};

/// Hz to rad/s.
#[inline]
pub fn angular(hz: f64) -> f64 {
    TAU * hz
}

/// rad/s to Hz.
#[inline]
pub fn hertz(rad_per_s: f64) -> f64 {
    rad_per_s / TAU
}

/// Vacuum wavelength (m) to angular optical frequency.
#[inline]
pub fn omega_from_wavelength(lambda: f64) -> f64 {
    TAU * C / lambda
}

/// Angular optical frequency to vacuum wavelength (m).
#[inline]
pub fn wavelength_from_omega(omega: f64) -> f64 {
    TAU * C / omega
}

/// Power in dBm to watts.
#[inline]
pub fn dbm_to_watts(dbm: f64) -> f64 {
    1e-3 * 10f64.powf(dbm / 10.0)
}
