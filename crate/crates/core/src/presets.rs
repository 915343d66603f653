//! Reference operating points of the two measured devices.
//!
//! Sound velocities are set so the acoustic frequency sits on an odd rung of
//! the standing-wave ladder; the stiffness-derived values miss it by a
//! fraction of a rung, which would flip the parity of the coupled mode.

use crate::constants::{angular, omega_from_wavelength};
use crate::couplings::{PiezoDistribution, SystemParams};
use crate::materials::MaterialRegistry;

/// X-cut quartz transducer at the transduction operating point.
pub fn quartz_experiment() -> SystemParams {
    let mut material = MaterialRegistry::builtin()
        .lookup("quartz_xcut")
        .expect("builtin quartz")
        .clone();
    material.sound_velocity = Some(5714.43);
    let l_m = 0.5e-3;
    SystemParams {
        material,
        l_m,
        l_opt: 11.5e-3,
        r_opt: 50e-6,
        a_m: None,
        omega_p: omega_from_wavelength(1546.4e-9),
        kappa_opt: angular(2.2e6),
        kappa_opt_c1: angular(0.7e6),
        kappa_opt_c2: angular(1.2e6),
        kappa_opt_i: Some(angular(0.3e6)),
        kappa_mu: angular(17.1e6),
        kappa_mu_c: angular(7.33e6),
        kappa_mu_i: None,
        gamma: angular(500e3),
        omega_mu: angular(11.366e9),
        omega_m: angular(11.366e9),
        delta_opt: angular(11.366e9),
        e_sim: Some(2.0 * 0.80e-3 / core::f64::consts::SQRT_2),
        t_pz: l_m,
        piezo_distribution: PiezoDistribution::Bulk,
        p_p: 23.8e-3,
        p_mu: 1e-3,
        temperature: 9.0,
    }
}

/// CaF2 phonon-counting sensor at the driven-motion operating point.
pub fn caf2_experiment() -> SystemParams {
    let mut material = MaterialRegistry::builtin()
        .lookup("caf2")
        .expect("builtin caf2")
        .clone();
    material.sound_velocity = Some(7222.282);
    let l_m = 0.5e-3;
    let r_a = 64e-6;
    SystemParams {
        material,
        l_m,
        l_opt: 11.5e-3,
        r_opt: 128e-6,
        a_m: Some(2.0 * core::f64::consts::PI * r_a * r_a),
        omega_p: omega_from_wavelength(1546.4e-9),
        kappa_opt: angular(2.1e6),
        kappa_opt_c1: angular(0.598e6),
        kappa_opt_c2: 0.0,
        kappa_opt_i: None,
        kappa_mu: angular(22.4e6),
        kappa_mu_c: angular(10.9e6),
        kappa_mu_i: None,
        gamma: angular(535e3),
        omega_mu: angular(13.354e9),
        omega_m: angular(13.354e9),
        delta_opt: angular(13.354e9),
        e_sim: Some(2.0 * 5.1e-4),
        t_pz: l_m,
        piezo_distribution: PiezoDistribution::Bulk,
        p_p: 23e-3,
        p_mu: 0.1,
        temperature: 8.7,
    }
}
