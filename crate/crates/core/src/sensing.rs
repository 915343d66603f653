//! Calibration chain: detected power, phonon number, displacement, thermal
//! occupancy and the piezoelectric constants behind a driven response.

use crate::constants::{HBAR, K_B};
use crate::couplings::{g_em_per_d33, PiezoDistribution, SystemParams};
use crate::error::{require_non_negative, require_positive, Error, Result};
use crate::prelude::*;

/// Sideband power from n_m coherent phonons, hbar w_p (4 g^2 / kappa) n_m.
pub fn phonons_to_signal_power(params: &SystemParams, g_om: f64, n_m: f64) -> f64 {
    HBAR * params.omega_p * 4.0 * g_om * g_om / params.kappa_opt * n_m
}

pub fn signal_power_to_phonons(p_sig: f64, params: &SystemParams, g_om: f64) -> Result<f64> {
    require_non_negative("p_sig", p_sig)?;
    require_positive("kappa_opt", params.kappa_opt)?;
    if !(g_om > 0.0) {
        return Err(Error::NoOptomechanicalReadout);
    }
    Ok(p_sig / (HBAR * params.omega_p * 4.0 * g_om * g_om / params.kappa_opt))
}

/// Microwave photon flux P / (hbar Omega_mu).
pub fn drive_flux(params: &SystemParams, p_mu: f64) -> f64 {
    p_mu / (HBAR * params.omega_mu)
}

// n = k (g / (a g^2 + b))^2 with these constants.
fn response_constants(params: &SystemParams) -> (f64, f64, f64) {
    let k = 4.0 * params.kappa_mu_c / (params.kappa_mu * params.kappa_mu);
    (k, 2.0 / params.kappa_mu, 0.5 * params.gamma)
}

/// Steady-state phonons driven through the microwave port.
pub fn driven_phonons(params: &SystemParams, g_em: f64, p_mu: f64) -> f64 {
    let (k, a, b) = response_constants(params);
    let x = g_em / (a * g_em * g_em + b);
    k * x * x * drive_flux(params, p_mu)
}

/// True when 2 g^2 / kappa_mu is below 1% of Gamma/2.
pub fn is_weak_coupling(params: &SystemParams, g_em: f64) -> bool {
    let (_, a, b) = response_constants(params);
    a * g_em * g_em < 0.01 * b
}

/// Inverse of [`driven_phonons`] on the weak-coupling branch.
///
/// The response peaks at g = sqrt(b/a); phonon numbers above that peak
/// cannot be produced by any coupling.
pub fn extract_gem(params: &SystemParams, n_m: f64, p_mu: f64) -> Result<f64> {
    require_non_negative("n_m", n_m)?;
    require_positive("p_mu", p_mu)?;
    require_positive("kappa_mu", params.kappa_mu)?;
    require_positive("gamma", params.gamma)?;
    let (k, a, b) = response_constants(params);
    let scale = k * drive_flux(params, p_mu);
    if !(scale > 0.0) {
        return Err(Error::DriveInconsistent("no microwave port coupling".into()));
    }
    let y = (n_m / scale).sqrt();
    let disc = 1.0 - 4.0 * a * b * y * y;
    if disc < 0.0 {
        let n_max = scale / (4.0 * a * b);
        return Err(Error::DriveInconsistent(format!(
            "{n_m} phonons exceeds the maximum {n_max:.4e} reachable at this drive"
        )));
    }
    // smaller root of a y g^2 - g + b y = 0, written without cancellation
    Ok(2.0 * b * y / (1.0 + disc.sqrt()))
}

/// Default surface layer when none is configured.
pub const DEFAULT_SURFACE_LAYER: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct D33Estimate {
    pub distribution: PiezoDistribution,
    /// Piezo layer thickness assumed, m.
    pub t_pz: f64,
    /// m/V
    pub d33: f64,
}

fn surface_layer(params: &SystemParams) -> f64 {
    if params.t_pz < params.l_m {
        params.t_pz
    } else {
        DEFAULT_SURFACE_LAYER
    }
}

fn d33_for(params: &SystemParams, g_em: f64, dist: PiezoDistribution, t_pz: f64) -> Result<D33Estimate> {
    let per = g_em_per_d33(params, dist, t_pz)?;
    if per == 0.0 {
        return Err(Error::ParityForbidden(params.mode_index()?));
    }
    Ok(D33Estimate { distribution: dist, t_pz, d33: g_em / per })
}

/// Piezoelectric constant implied by `g_em`.
///
/// With a distribution given, its configured thickness is used (the full
/// substrate for bulk). Without one, both the bulk and the one-sided surface
/// readings are returned.
pub fn extract_d33(params: &SystemParams, g_em: f64, distribution: Option<PiezoDistribution>) -> Result<Vec<D33Estimate>> {
    require_non_negative("g_em", g_em)?;
    match distribution {
        Some(PiezoDistribution::Bulk) => Ok(vec![d33_for(params, g_em, PiezoDistribution::Bulk, params.l_m)?]),
        Some(d) => Ok(vec![d33_for(params, g_em, d, params.t_pz)?]),
        None => Ok(vec![
            d33_for(params, g_em, PiezoDistribution::Bulk, params.l_m)?,
            d33_for(params, g_em, PiezoDistribution::SurfaceOneSide, surface_layer(params))?,
        ]),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Occupancy {
    /// Bose-Einstein occupation of the bath.
    pub bath: f64,
    /// After optomechanical cooling by the pump, bath / (1 + C_om).
    pub effective: f64,
}

pub fn thermal_occupancy(omega: f64, temperature: f64, c_om: f64) -> Result<Occupancy> {
    require_positive("temperature", temperature)?;
    require_positive("omega", omega)?;
    require_non_negative("c_om", c_om)?;
    let bath = 1.0 / (HBAR * omega / (K_B * temperature)).exp_m1();
    Ok(Occupancy { bath, effective: bath / (1.0 + c_om) })
}

/// How a phonon number maps to a motional amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DisplacementConvention {
    /// U0 sqrt(n)
    DrivenPeak,
    /// U0 sqrt(2 n)
    RmsPair,
}

impl DisplacementConvention {
    pub fn name(self) -> &'static str {
        match self {
            DisplacementConvention::DrivenPeak => "driven_peak",
            DisplacementConvention::RmsPair => "rms_pair",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "driven_peak" => Ok(DisplacementConvention::DrivenPeak),
            "rms_pair" => Ok(DisplacementConvention::RmsPair),
            other => Err(Error::param("convention", format!("expected driven_peak or rms_pair, got {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Displacement {
    /// m
    pub meters: f64,
    pub convention: DisplacementConvention,
}

/// U0 = sqrt(2 hbar / (rho Omega_m A_m L_m)).
pub fn zero_point_displacement(params: &SystemParams) -> Result<f64> {
    let rho = params.density()?;
    require_positive("omega_m", params.omega_m)?;
    Ok((2.0 * HBAR / (rho * params.omega_m * params.acoustic_area() * params.l_m)).sqrt())
}

pub fn displacement(params: &SystemParams, n: f64, convention: DisplacementConvention) -> Result<Displacement> {
    require_non_negative("n", n)?;
    let u0 = zero_point_displacement(params)?;
    let meters = match convention {
        DisplacementConvention::DrivenPeak => u0 * n.sqrt(),
        DisplacementConvention::RmsPair => u0 * (2.0 * n).sqrt(),
    };
    Ok(Displacement { meters, convention })
}

/// A measured noise floor: phonons resolved in a detection bandwidth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseFloor {
    pub phonons: f64,
    /// Hz
    pub bandwidth: f64,
}

impl NoiseFloor {
    /// Floor phonons in another bandwidth, for a white phonon density.
    pub fn phonons_in(&self, bandwidth: f64) -> f64 {
        self.phonons * bandwidth / self.bandwidth
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityFloor {
    /// Hz
    pub bandwidth: f64,
    /// m / sqrt(Hz)
    pub displacement_density: f64,
    pub convention: DisplacementConvention,
    /// Smallest resolvable coupling at the configured drive, rad/s.
    pub g_em: f64,
    /// Smallest resolvable d33 per distribution, m/V.
    pub d33: Vec<D33Estimate>,
}

/// Sensitivities at `bandwidth` (Hz) for the given floor and microwave drive.
pub fn sensitivity_floor(
    params: &SystemParams,
    floor: NoiseFloor,
    bandwidth: f64,
    p_mu: f64,
    convention: DisplacementConvention,
) -> Result<SensitivityFloor> {
    require_positive("bandwidth", bandwidth)?;
    require_positive("floor bandwidth", floor.bandwidth)?;
    require_non_negative("floor phonons", floor.phonons)?;
    let n = floor.phonons_in(bandwidth);
    let x = displacement(params, n, convention)?;
    let g_em = extract_gem(params, n, p_mu)?;
    let d33 = extract_d33(params, g_em, None)?;
    Ok(SensitivityFloor {
        bandwidth,
        displacement_density: x.meters / bandwidth.sqrt(),
        convention,
        g_em,
        d33,
    })
}
