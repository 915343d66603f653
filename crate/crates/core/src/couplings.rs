//! Interaction rates and cooperativities from material, geometry and drive.

use crate::constants::{C, HBAR, PI, TAU};
use crate::error::{require_finite, require_non_negative, require_positive, Error, Result};
use crate::materials::{sound_velocity, MaterialProps};
use crate::prelude::*;

/// Where the piezoelectric response lives along the acoustic axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PiezoDistribution {
    Bulk,
    SurfaceOneSide,
    SurfaceTwoSides,
}

impl PiezoDistribution {
    pub fn name(self) -> &'static str {
        match self {
            PiezoDistribution::Bulk => "bulk",
            PiezoDistribution::SurfaceOneSide => "surface_one_side",
            PiezoDistribution::SurfaceTwoSides => "surface_two_sides",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "bulk" => Ok(PiezoDistribution::Bulk),
            "surface_one_side" => Ok(PiezoDistribution::SurfaceOneSide),
            "surface_two_sides" => Ok(PiezoDistribution::SurfaceTwoSides),
            other => Err(Error::param(
                "piezo_distribution",
                format!("expected bulk, surface_one_side or surface_two_sides, got {other:?}"),
            )),
        }
    }
}

/// Which optical coupling rate feeds the state-space port.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OpticalPort {
    /// Pump/probe input mirror.
    Port1,
    /// Output mirror.
    Port2,
    /// Both mirrors as one port.
    Lumped,
}

impl OpticalPort {
    pub fn name(self) -> &'static str {
        match self {
            OpticalPort::Port1 => "port1",
            OpticalPort::Port2 => "port2",
            OpticalPort::Lumped => "lumped",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "port1" => Ok(OpticalPort::Port1),
            "port2" => Ok(OpticalPort::Port2),
            "lumped" => Ok(OpticalPort::Lumped),
            other => Err(Error::param(
                "optical port",
                format!("expected port1, port2 or lumped, got {other:?}"),
            )),
        }
    }
}

/// The assembled tri-resonator description. Rates and frequencies in rad/s.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemParams {
    pub material: MaterialProps,
    /// Acoustic substrate thickness, m.
    pub l_m: f64,
    /// Optical cavity length, m.
    pub l_opt: f64,
    /// Optical mode waist, m.
    pub r_opt: f64,
    /// Acoustic mode area, m^2. Defaults to pi r_m^2 with r_m = r_opt/sqrt(2).
    pub a_m: Option<f64>,
    /// Pump angular frequency.
    pub omega_p: f64,
    pub kappa_opt: f64,
    pub kappa_opt_c1: f64,
    pub kappa_opt_c2: f64,
    pub kappa_opt_i: Option<f64>,
    pub kappa_mu: f64,
    pub kappa_mu_c: f64,
    pub kappa_mu_i: Option<f64>,
    pub gamma: f64,
    pub omega_mu: f64,
    /// Acoustic mode frequency.
    pub omega_m: f64,
    /// Optical signal detuning from the pump.
    pub delta_opt: f64,
    /// Simulated field for one quantum of microwave energy, V/m.
    pub e_sim: Option<f64>,
    /// Piezoelectric layer thickness, m.
    pub t_pz: f64,
    pub piezo_distribution: PiezoDistribution,
    /// Optical pump power, W.
    pub p_p: f64,
    /// Microwave drive power, W.
    pub p_mu: f64,
    /// Bath temperature, K.
    pub temperature: f64,
}

const SUM_TOLERANCE: f64 = 1e-9;

impl SystemParams {
    pub fn validate(&self) -> Result<()> {
        self.material.validate()?;
        require_positive("l_m", self.l_m)?;
        require_positive("l_opt", self.l_opt)?;
        require_positive("r_opt", self.r_opt)?;
        if let Some(a) = self.a_m {
            require_positive("a_m", a)?;
        }
        require_positive("omega_p", self.omega_p)?;
        for (name, v) in [
            ("kappa_opt", self.kappa_opt),
            ("kappa_opt_c1", self.kappa_opt_c1),
            ("kappa_opt_c2", self.kappa_opt_c2),
            ("kappa_mu", self.kappa_mu),
            ("kappa_mu_c", self.kappa_mu_c),
            ("gamma", self.gamma),
            ("omega_mu", self.omega_mu),
            ("omega_m", self.omega_m),
            ("p_p", self.p_p),
            ("p_mu", self.p_mu),
            ("temperature", self.temperature),
        ] {
            require_non_negative(name, v)?;
        }
        require_finite("delta_opt", self.delta_opt)?;
        if let Some(e) = self.e_sim {
            require_non_negative("e_sim", e)?;
        }
        if self.l_m > self.l_opt {
            return Err(Error::param("l_m", "acoustic thickness exceeds the optical cavity length"));
        }
        require_positive("t_pz", self.t_pz)?;
        if self.t_pz > self.l_m {
            return Err(Error::param("t_pz", "piezo layer thicker than the substrate"));
        }
        let port_sum = self.kappa_opt_c1 + self.kappa_opt_c2;
        match self.kappa_opt_i {
            Some(ki) => {
                require_non_negative("kappa_opt_i", ki)?;
                let total = port_sum + ki;
                if (total - self.kappa_opt).abs() > SUM_TOLERANCE * self.kappa_opt.max(total) {
                    return Err(Error::param(
                        "kappa_opt",
                        format!("total {} != c1 + c2 + i = {}", self.kappa_opt, total),
                    ));
                }
            }
            None if port_sum > self.kappa_opt * (1.0 + SUM_TOLERANCE) => {
                return Err(Error::param("kappa_opt", "port rates exceed the total loss rate"));
            }
            None => {}
        }
        match self.kappa_mu_i {
            Some(ki) => {
                require_non_negative("kappa_mu_i", ki)?;
                let total = self.kappa_mu_c + ki;
                if (total - self.kappa_mu).abs() > SUM_TOLERANCE * self.kappa_mu.max(total) {
                    return Err(Error::param(
                        "kappa_mu",
                        format!("total {} != c + i = {}", self.kappa_mu, total),
                    ));
                }
            }
            None if self.kappa_mu_c > self.kappa_mu * (1.0 + SUM_TOLERANCE) => {
                return Err(Error::param("kappa_mu", "port rate exceeds the total loss rate"));
            }
            None => {}
        }
        Ok(())
    }

    /// Acoustic waist r_opt/sqrt(2).
    pub fn acoustic_waist(&self) -> f64 {
        self.r_opt / core::f64::consts::SQRT_2
    }

    pub fn acoustic_area(&self) -> f64 {
        self.a_m.unwrap_or_else(|| {
            let r = self.acoustic_waist();
            PI * r * r
        })
    }

    /// Zero-point field amplitude, half the simulated field.
    pub fn zero_point_field(&self) -> Option<f64> {
        self.e_sim.map(|e| 0.5 * e)
    }

    pub fn sound_velocity(&self) -> Result<f64> {
        sound_velocity(&self.material)
    }

    /// Longitudinal stiffness, falling back to rho v^2.
    pub fn stiffness(&self) -> Result<f64> {
        if let Some(c33) = self.material.c33 {
            return Ok(c33);
        }
        match (self.material.density, self.material.sound_velocity) {
            (Some(rho), Some(v)) => Ok(rho * v * v),
            _ => Err(Error::InsufficientAcousticData(self.material.name.clone())),
        }
    }

    pub fn density(&self) -> Result<f64> {
        self.material
            .density
            .ok_or_else(|| Error::InsufficientAcousticData(self.material.name.clone()))
    }

    /// Acoustic wavelength v/f_m.
    pub fn acoustic_wavelength(&self) -> Result<f64> {
        let f = self.omega_m / TAU;
        Ok(self.sound_velocity()? / require_positive("omega_m", f)?)
    }

    /// Standing-wave index of the acoustic mode.
    pub fn mode_index(&self) -> Result<u64> {
        Ok(longitudinal_index(self.l_m, self.omega_m / TAU, self.sound_velocity()?))
    }

    /// Acoustic free spectral range (angular).
    pub fn acoustic_fsr(&self) -> Result<f64> {
        Ok(acoustic_fsr(self.sound_velocity()?, self.l_m))
    }

    /// Optical phase velocity c/n in the crystal.
    pub fn optical_velocity(&self) -> f64 {
        C / self.material.refractive_index
    }

    /// Single-pass optical transit time through the crystal.
    pub fn transit_time(&self) -> f64 {
        self.l_m * self.material.refractive_index / C
    }

    pub fn port_kappa(&self, port: OpticalPort) -> f64 {
        match port {
            OpticalPort::Port1 => self.kappa_opt_c1,
            OpticalPort::Port2 => self.kappa_opt_c2,
            OpticalPort::Lumped => self.kappa_opt_c1 + self.kappa_opt_c2,
        }
    }

    pub fn eta_opt(&self, port: OpticalPort) -> f64 {
        self.port_kappa(port) / self.kappa_opt
    }

    pub fn eta_mu(&self) -> f64 {
        self.kappa_mu_c / self.kappa_mu
    }

    /// Optical finesse pi v_o / (L_opt kappa_opt).
    pub fn finesse(&self) -> f64 {
        PI * self.optical_velocity() / (self.l_opt * self.kappa_opt)
    }
}

/// Omega_B = 2 omega_p n v / c.
pub fn brillouin_frequency(material: &MaterialProps, omega_p: f64) -> Result<f64> {
    material.validate()?;
    let v = sound_velocity(material)?;
    Ok(2.0 * omega_p * material.refractive_index * v / C)
}

/// Angular acoustic FSR, 2 pi v / (2 L).
pub fn acoustic_fsr(v: f64, l_m: f64) -> f64 {
    PI * v / l_m
}

/// j = round(2 L f / v), ties going to the odd neighbour, minimum 1.
pub fn longitudinal_index(l_m: f64, f_m: f64, v: f64) -> u64 {
    index_from_ratio(2.0 * l_m * f_m / v)
}

fn index_from_ratio(x: f64) -> u64 {
    let lo = x.floor();
    let frac = x - lo;
    let keep = frac < 0.5 || (frac == 0.5 && !(lo as u64).is_multiple_of(2));
    let j = if keep { lo } else { lo + 1.0 };
    (j as u64).max(1)
}

/// One rung of the acoustic ladder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcousticMode {
    pub index: u64,
    pub omega: f64,
}

impl AcousticMode {
    pub fn is_odd(&self) -> bool {
        self.index % 2 == 1
    }
}

/// `count` ladder modes centred on the rung nearest `center`.
pub fn acoustic_mode_ladder(params: &SystemParams, center: f64, count: usize) -> Result<Vec<AcousticMode>> {
    if count < 1 || count.is_multiple_of(2) {
        return Err(Error::InvalidModeCount(count));
    }
    let fsr = params.acoustic_fsr()?;
    require_positive("ladder center", center)?;
    let j0 = index_from_ratio(center / fsr);
    let half = (count / 2) as u64;
    if j0 <= half {
        return Err(Error::param("ladder center", "ladder would reach index zero"));
    }
    Ok((j0 - half..=j0 + half)
        .map(|j| AcousticMode { index: j, omega: j as f64 * fsr })
        .collect())
}

/// Unnormalized sinc, sin(x)/x.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// sinc^2((omega - omega_b) / (4 delta_m)).
pub fn phase_match_envelope(omega: f64, omega_b: f64, delta_m: f64) -> f64 {
    let s = phase_match_amplitude(omega, omega_b, delta_m);
    s * s
}

/// Amplitude form of the phase-matching envelope.
pub fn phase_match_amplitude(omega: f64, omega_b: f64, delta_m: f64) -> f64 {
    sinc((omega - omega_b) / (4.0 * delta_m))
}

/// Overlap factor of the piezo region with mode `index`.
pub fn distribution_factor(dist: PiezoDistribution, t_pz: f64, lambda_m: f64, index: u64) -> f64 {
    let odd = index % 2 == 1;
    let phase = PI * t_pz / lambda_m;
    match dist {
        PiezoDistribution::Bulk if odd => {
            let s = phase.sin();
            s * s
        }
        PiezoDistribution::Bulk => 0.0,
        PiezoDistribution::SurfaceOneSide => phase * phase,
        PiezoDistribution::SurfaceTwoSides if odd => 2.0 * phase * phase,
        PiezoDistribution::SurfaceTwoSides => 0.0,
    }
}

/// Electromechanical coupling per unit d33, i.e. g_em / d33.
pub fn g_em_per_d33(params: &SystemParams, dist: PiezoDistribution, t_pz: f64) -> Result<f64> {
    let e_sim = params.e_sim.ok_or(Error::FieldAmplitudeRequired)?;
    require_positive("e_sim", e_sim).map_err(|_| Error::FieldAmplitudeRequired)?;
    require_positive("omega_m", params.omega_m)?;
    let lambda = params.acoustic_wavelength()?;
    let c33 = params.stiffness()?;
    let a_m = params.acoustic_area();
    let f = distribution_factor(dist, t_pz, lambda, params.mode_index()?);
    if f == 0.0 {
        return Ok(0.0);
    }
    Ok(e_sim * (lambda / PI) * (params.omega_m * c33 * a_m / (2.0 * HBAR * params.l_m)).sqrt() * f)
}

/// Electromechanical coupling of the configured acoustic mode.
pub fn g_em(params: &SystemParams) -> Result<f64> {
    Ok(params.material.d33 * g_em_per_d33(params, params.piezo_distribution, params.t_pz)?)
}

/// Single-photon Brillouin coupling without the cavity filling factor.
pub fn g_om0_single_pass(params: &SystemParams) -> Result<f64> {
    let n = params.material.refractive_index;
    let rho = params.density()?;
    let omega_m = require_positive("omega_m", params.omega_m)?;
    let w = params.omega_p;
    Ok(w * w * n * n * n * params.material.p13 / (8.0 * C)
        * (2.0 * HBAR / (omega_m * rho * params.acoustic_area() * params.l_m)).sqrt())
}

/// Single-photon Brillouin coupling inside the optical cavity.
pub fn g_om0_cavity(params: &SystemParams) -> Result<f64> {
    Ok(g_om0_single_pass(params)? * params.l_m / params.l_opt)
}

/// Pump photons stored in the cavity, fed through the first port.
pub fn intracavity_photons(params: &SystemParams) -> Result<f64> {
    let k = require_positive("kappa_opt", params.kappa_opt)?;
    let flux = params.p_p / (HBAR * params.omega_p);
    Ok(params.kappa_opt_c1 * flux / (0.25 * k * k))
}

/// Pump photons inside the crystal during one pass.
pub fn single_pass_photons(params: &SystemParams) -> f64 {
    params.p_p * params.transit_time() / (HBAR * params.omega_p)
}

/// Electro-optic single-photon coupling, n^2 r13 E_sim omega_p L_m / (4 L_opt).
pub fn g_eo0(params: &SystemParams) -> Result<f64> {
    let r13 = params.material.r13;
    if r13 == 0.0 {
        return Ok(0.0);
    }
    let e_sim = params.e_sim.ok_or(Error::FieldAmplitudeRequired)?;
    Ok(0.25 * params.material.optical_permittivity() * r13 * e_sim * params.omega_p * params.l_m
        / params.l_opt)
}

/// Coupling rates before normalization by losses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rates {
    pub g_om0: f64,
    pub g_om: f64,
    pub g_em: f64,
    pub g_eo0: f64,
    pub g_eo: f64,
    pub n_p: f64,
    /// Field-enhanced single-pass Brillouin rate.
    pub g_om_single_pass: f64,
}

impl Rates {
    /// All rates from first principles. A missing field amplitude leaves
    /// the electrical couplings at zero.
    pub fn compute(params: &SystemParams) -> Result<Self> {
        params.validate()?;
        let n_p = intracavity_photons(params)?;
        let g_om0 = g_om0_cavity(params)?;
        let g_eo0 = match g_eo0(params) {
            Err(Error::FieldAmplitudeRequired) => 0.0,
            other => other?,
        };
        let g_em = match g_em(params) {
            Err(Error::FieldAmplitudeRequired) => 0.0,
            other => other?,
        };
        let g_om_single_pass = single_pass_photons(params).sqrt() * g_om0_single_pass(params)?;
        Ok(Rates {
            g_om0,
            g_om: n_p.sqrt() * g_om0,
            g_em,
            g_eo0,
            g_eo: n_p.sqrt() * g_eo0,
            n_p,
            g_om_single_pass,
        })
    }

    /// Replaces field-enhanced rates, keeping the single-photon values
    /// consistent with the photon number.
    pub fn with_overrides(mut self, g_om: Option<f64>, g_em: Option<f64>, g_eo: Option<f64>) -> Self {
        let root = self.n_p.sqrt();
        if let Some(g) = g_om {
            self.g_om = g;
            if root > 0.0 {
                self.g_om0 = g / root;
            }
        }
        if let Some(g) = g_em {
            self.g_em = g;
        }
        if let Some(g) = g_eo {
            self.g_eo = g;
            if root > 0.0 {
                self.g_eo0 = g / root;
            }
        }
        self
    }
}

/// Rates plus cooperativities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingSet {
    pub g_om0: f64,
    pub g_om: f64,
    pub g_em: f64,
    pub g_eo0: f64,
    pub g_eo: f64,
    pub n_p: f64,
    pub g_om_single_pass: f64,
    pub c_om: f64,
    pub c_em: f64,
    pub c_eo: f64,
    pub c_sp: f64,
}

/// 4 g^2 / (k1 k2).
pub fn cooperativity(g: f64, k1: f64, k2: f64) -> f64 {
    4.0 * g * g / (k1 * k2)
}

/// g^2 tau / Gamma.
pub fn single_pass_cooperativity(g: f64, tau: f64, gamma: f64) -> f64 {
    g * g * tau / gamma
}

pub fn cooperativities(params: &SystemParams, rates: &Rates) -> Result<CouplingSet> {
    for (name, v) in [("kappa_opt", params.kappa_opt), ("kappa_mu", params.kappa_mu), ("gamma", params.gamma)] {
        if !(v > 0.0) {
            return Err(Error::DegenerateLossless(format!("{name} = {v}")));
        }
    }
    Ok(CouplingSet {
        g_om0: rates.g_om0,
        g_om: rates.g_om,
        g_em: rates.g_em,
        g_eo0: rates.g_eo0,
        g_eo: rates.g_eo,
        n_p: rates.n_p,
        g_om_single_pass: rates.g_om_single_pass,
        c_om: cooperativity(rates.g_om, params.kappa_opt, params.gamma),
        c_em: cooperativity(rates.g_em, params.kappa_mu, params.gamma),
        c_eo: cooperativity(rates.g_eo, params.kappa_opt, params.kappa_mu),
        c_sp: single_pass_cooperativity(rates.g_om_single_pass, params.transit_time(), params.gamma),
    })
}

/// Rates and cooperativities from first principles.
pub fn coupling_set(params: &SystemParams) -> Result<CouplingSet> {
    cooperativities(params, &Rates::compute(params)?)
}

/// Sideband power from n_m phonons without a cavity.
pub fn signal_power_single_pass(params: &SystemParams, g_om0_single_pass: f64, n_m: f64) -> f64 {
    let x = g_om0_single_pass * params.l_m / params.optical_velocity();
    x * x * params.p_p * n_m
}

/// Sideband power from n_m phonons with the cavity, on the pump port.
pub fn signal_power_cavity(params: &SystemParams, g_om0: f64, n_m: f64) -> f64 {
    let k = params.kappa_opt_c1 / (params.kappa_opt * params.kappa_opt);
    16.0 * k * k * g_om0 * g_om0 * params.p_p * n_m
}

/// Cavity over single-pass signal ratio, (16/pi^2) eta^2 F^2.
pub fn cavity_signal_enhancement(params: &SystemParams) -> f64 {
    let eta = params.eta_opt(OpticalPort::Port1);
    let f = params.finesse();
    16.0 / (PI * PI) * eta * eta * f * f
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{angular, hertz, omega_from_wavelength};
    use crate::materials::MaterialRegistry;
    use crate::presets;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn brillouin_frequency_quartz() {
        let mut q = MaterialRegistry::builtin().lookup("quartz_xcut").unwrap().clone();
        q.sound_velocity = Some(5750.0);
        let wb = brillouin_frequency(&q, omega_from_wavelength(1546.4e-9)).unwrap();
        assert!(rel(hertz(wb), 11.36e9) < 0.01, "{}", hertz(wb));
    }

    #[test]
    fn brillouin_identity_at_half_light_speed() {
        let mut v = MaterialRegistry::builtin().lookup("vacuum").unwrap().clone();
        v.sound_velocity = Some(C / 2.0);
        let w = 1.2e15;
        assert!(rel(brillouin_frequency(&v, w).unwrap(), w) < 1e-15);
    }

    #[test]
    fn brillouin_caf2_round_trip() {
        let mut m = MaterialRegistry::builtin().lookup("caf2").unwrap().clone();
        let lambda = 1546.4e-9;
        m.sound_velocity = Some(13.354e9 * lambda / (2.0 * m.refractive_index));
        let wb = brillouin_frequency(&m, omega_from_wavelength(lambda)).unwrap();
        assert!(rel(hertz(wb), 13.354e9) < 1e-12);
    }

    #[test]
    fn ladder_spacing_and_centering() {
        let p = presets::quartz_experiment();
        let modes = acoustic_mode_ladder(&p, angular(11.366e9), 7).unwrap();
        assert_eq!(modes.len(), 7);
        for w in modes.windows(2) {
            assert_eq!(w[1].index, w[0].index + 1);
            assert!(rel(hertz(w[1].omega - w[0].omega), 5.5e6) < 0.05);
        }
        let single = acoustic_mode_ladder(&p, angular(11.366e9), 1).unwrap();
        assert_eq!(single[0], modes[3]);
        assert!((hertz(single[0].omega) - 11.366e9).abs() < hertz(p.acoustic_fsr().unwrap()) / 2.0);
        assert!(acoustic_mode_ladder(&p, angular(11.366e9), 0).is_err());
        assert!(acoustic_mode_ladder(&p, angular(11.366e9), 4).is_err());
    }

    #[test]
    fn caf2_fsr() {
        let p = presets::caf2_experiment();
        let mut m = p.material.clone();
        m.sound_velocity = Some(7221.0);
        assert!(rel(hertz(acoustic_fsr(sound_velocity(&m).unwrap(), p.l_m)), 7.2e6) < 0.01);
    }

    #[test]
    fn index_ties_go_odd() {
        assert_eq!(index_from_ratio(4.5), 5);
        assert_eq!(index_from_ratio(5.5), 5);
        assert_eq!(index_from_ratio(5.49), 5);
        assert_eq!(index_from_ratio(5.51), 6);
        assert_eq!(index_from_ratio(0.2), 1);
    }

    #[test]
    fn envelope_values() {
        let d = 1.0;
        assert_eq!(phase_match_envelope(3.0, 3.0, d), 1.0);
        assert!(phase_match_envelope(4.0 * PI, 0.0, d) < 1e-30);
        let half = phase_match_envelope(2.0 * PI, 0.0, d);
        assert!(rel(half, (2.0 / PI) * (2.0 / PI)) < 1e-14);
    }

    #[test]
    fn bulk_even_mode_is_exactly_zero() {
        let mut p = presets::quartz_experiment();
        let v = p.sound_velocity().unwrap();
        let j = p.mode_index().unwrap() + 1;
        p.omega_m = TAU * j as f64 * v / (2.0 * p.l_m);
        assert_eq!(p.mode_index().unwrap() % 2, 0);
        assert_eq!(g_em(&p).unwrap(), 0.0);
    }

    #[test]
    fn g_em_requires_field() {
        let mut p = presets::quartz_experiment();
        p.e_sim = None;
        assert_eq!(g_em(&p), Err(Error::FieldAmplitudeRequired));
    }

    #[test]
    fn g_em_linear_in_d33_and_field() {
        let p = presets::quartz_experiment();
        let g = g_em(&p).unwrap();
        let mut q = p.clone();
        q.material.d33 *= 3.0;
        assert!(rel(g_em(&q).unwrap(), 3.0 * g) < 1e-14);
        let mut q = p.clone();
        q.e_sim = q.e_sim.map(|e| e * 2.0);
        assert!(rel(g_em(&q).unwrap(), 2.0 * g) < 1e-14);
    }

    #[test]
    fn g_om0_quartz_band_and_ratio() {
        let p = presets::quartz_experiment();
        let cav = hertz(g_om0_cavity(&p).unwrap());
        let sp = hertz(g_om0_single_pass(&p).unwrap());
        assert!((3.0..=12.0).contains(&cav), "{cav}");
        let scale = p.l_opt / p.l_m;
        assert!((3.0 * scale..=12.0 * scale).contains(&sp), "{sp}");
        assert!(rel(cav / sp, p.l_m / p.l_opt) < 1e-14);
    }

    #[test]
    fn g_om0_filling_factor_one() {
        let mut p = presets::quartz_experiment();
        p.l_opt = p.l_m;
        assert_eq!(g_om0_cavity(&p).unwrap(), g_om0_single_pass(&p).unwrap());
    }

    #[test]
    fn g_om0_cavity_times_length_is_constant() {
        let p = presets::quartz_experiment();
        let mut q = p.clone();
        q.l_opt *= 2.7;
        let a = g_om0_cavity(&p).unwrap() * p.l_opt;
        let b = g_om0_cavity(&q).unwrap() * q.l_opt;
        assert!(rel(a, b) < 1e-14);
    }

    #[test]
    fn photon_number_quartz() {
        let mut p = presets::quartz_experiment();
        p.p_p = 0.0;
        assert_eq!(intracavity_photons(&p).unwrap(), 0.0);
        p.p_p = 0.112;
        let n = intracavity_photons(&p).unwrap();
        assert!(rel(n, 7e10) < 0.3, "{n}");
        let g = 7e10f64.sqrt() * 5.28;
        assert!(rel(g, 1.4e6) < 0.01, "{g}");
    }

    #[test]
    fn g_eo0_quartz_and_scaling() {
        let p = presets::quartz_experiment();
        let g = hertz(g_eo0(&p).unwrap());
        assert!(g > 1.05e-3 / 3.0 && g < 1.05e-3 * 3.0, "{g}");
        let mut q = p.clone();
        q.e_sim = q.e_sim.map(|e| 2.0 * e);
        assert!(rel(g_eo0(&q).unwrap(), 2.0 * g_eo0(&p).unwrap()) < 1e-15);
        let c = presets::caf2_experiment();
        assert_eq!(g_eo0(&c).unwrap(), 0.0);
    }

    #[test]
    fn cooperativity_examples() {
        let c_om = cooperativity(angular(643e3), angular(2.2e6), angular(500e3));
        assert!(rel(c_om, 1.48) < 0.03, "{c_om}");
        let c_em = cooperativity(angular(347.0), angular(17.1e6), angular(500e3));
        assert!(rel(c_em, 5.6e-8) < 0.03, "{c_em}");
        let c_eo = cooperativity(angular(162.0), angular(2.2e6), angular(17.1e6));
        assert!(rel(c_eo, 2.8e-9) < 0.05, "{c_eo}");
        let p = presets::quartz_experiment();
        let c_sp = single_pass_cooperativity(angular(180e3), p.transit_time(), angular(500e3));
        assert!(rel(c_sp, 1.1e-6) < 0.1, "{c_sp}");
    }

    #[test]
    fn cooperativity_scales_quadratically() {
        assert!(rel(cooperativity(2.0, 3.0, 5.0), 4.0 * cooperativity(1.0, 3.0, 5.0)) < 1e-15);
    }

    #[test]
    fn lossless_rejected() {
        let mut p = presets::quartz_experiment();
        p.gamma = 0.0;
        let r = Rates::compute(&p).unwrap();
        assert!(matches!(cooperativities(&p, &r), Err(Error::DegenerateLossless(_))));
    }

    #[test]
    fn enhanced_rates_follow_photon_number() {
        let p = presets::quartz_experiment();
        let r = Rates::compute(&p).unwrap();
        assert!(rel(r.g_om, r.n_p.sqrt() * r.g_om0) < 1e-15);
        assert!(rel(r.g_eo, r.n_p.sqrt() * r.g_eo0) < 1e-15);
        let o = r.with_overrides(Some(1.0), None, Some(2.0));
        assert!(rel(o.g_om, o.n_p.sqrt() * o.g_om0) < 1e-15);
        assert!(rel(o.g_eo, o.n_p.sqrt() * o.g_eo0) < 1e-15);
    }

    #[test]
    fn enhancement_matches_power_ratio() {
        let p = presets::quartz_experiment();
        let sp = g_om0_single_pass(&p).unwrap();
        let cav = g_om0_cavity(&p).unwrap();
        let ratio = signal_power_cavity(&p, cav, 1.3) / signal_power_single_pass(&p, sp, 1.3);
        assert!(rel(ratio, cavity_signal_enhancement(&p)) < 1e-12);
    }

    #[test]
    fn invariants_enforced() {
        let mut p = presets::quartz_experiment();
        p.kappa_opt_i = Some(p.kappa_opt_i.unwrap() * 1.01);
        assert!(p.validate().is_err());
        let mut p = presets::quartz_experiment();
        p.t_pz = 2.0 * p.l_m;
        assert!(p.validate().is_err());
        let mut p = presets::quartz_experiment();
        p.l_m = 2.0 * p.l_opt;
        assert!(p.validate().is_err());
        let mut p = presets::quartz_experiment();
        p.gamma = -1.0;
        assert!(p.validate().is_err());
    }

    #[test]
    fn zero_point_field_is_half() {
        let p = presets::caf2_experiment();
        assert_eq!(p.zero_point_field().unwrap(), p.e_sim.unwrap() / 2.0);
    }
}
