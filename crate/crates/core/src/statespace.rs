//! Linearized multimode dynamics and input-output scattering.
//!
//! Mode order is [optical signal, microwave, acoustic_1..acoustic_N]. The
//! rotating frame has the pump at zero, so the optical "resonance" is its
//! detuning from the pump.

use crate::constants::TAU;
use crate::couplings::{phase_match_amplitude, CouplingSet, OpticalPort, PiezoDistribution, SystemParams};
use crate::error::{require_finite, require_non_negative, Error, Result};
use crate::prelude::*;
use crate::spectrum::{edge_mean, Grid, Metadata, Spectrum, SpectrumKind};
use nalgebra::DMatrix;
use num_complex::Complex64;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeKind {
    Optical,
    Microwave,
    /// Longitudinal standing-wave index.
    Acoustic(u64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode {
    pub kind: ModeKind,
    /// Resonance in the rotating frame, rad/s.
    pub resonance: f64,
    /// Total energy loss rate, rad/s.
    pub loss: f64,
}

/// Acoustic ladder around the central mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ladder {
    /// Number of acoustic modes; odd.
    pub count: usize,
    /// Acoustic free spectral range, rad/s.
    pub spacing: f64,
    /// Standing-wave index of the central mode.
    pub center_index: u64,
    /// Centre of the phase-matching envelope, rad/s.
    pub envelope_center: f64,
    pub distribution: PiezoDistribution,
}

/// Flat parameter set of the linear model. Rates in rad/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearParams {
    pub delta_opt: f64,
    pub kappa_opt: f64,
    pub kappa_opt_port: f64,
    pub omega_mu: f64,
    pub kappa_mu: f64,
    pub kappa_mu_port: f64,
    pub omega_m: f64,
    pub gamma: f64,
    pub g_om: f64,
    pub g_em: f64,
    pub g_eo: f64,
    /// None for a single acoustic mode.
    pub ladder: Option<Ladder>,
}

impl LinearParams {
    /// Single-mode parameters from a system description.
    pub fn from_system(params: &SystemParams, couplings: &CouplingSet, port: OpticalPort) -> Self {
        LinearParams {
            delta_opt: params.delta_opt,
            kappa_opt: params.kappa_opt,
            kappa_opt_port: params.port_kappa(port),
            omega_mu: params.omega_mu,
            kappa_mu: params.kappa_mu,
            kappa_mu_port: params.kappa_mu_c,
            omega_m: params.omega_m,
            gamma: params.gamma,
            g_om: couplings.g_om,
            g_em: couplings.g_em,
            g_eo: couplings.g_eo,
            ladder: None,
        }
    }

    pub fn acoustic_count(&self) -> usize {
        self.ladder.map_or(1, |l| l.count)
    }

    pub fn cooperativities(&self) -> (f64, f64, f64) {
        (
            4.0 * self.g_om * self.g_om / (self.kappa_opt * self.gamma),
            4.0 * self.g_em * self.g_em / (self.kappa_mu * self.gamma),
            4.0 * self.g_eo * self.g_eo / (self.kappa_opt * self.kappa_mu),
        )
    }

    pub fn to_model(&self) -> Result<StateSpaceModel> {
        let mut modes = vec![
            Mode { kind: ModeKind::Optical, resonance: self.delta_opt, loss: self.kappa_opt },
            Mode { kind: ModeKind::Microwave, resonance: self.omega_mu, loss: self.kappa_mu },
        ];
        let mut g_om = Vec::new();
        let mut g_em = Vec::new();
        match self.ladder {
            None => {
                modes.push(Mode { kind: ModeKind::Acoustic(0), resonance: self.omega_m, loss: self.gamma });
                g_om.push(self.g_om);
                g_em.push(self.g_em);
            }
            Some(l) => {
                if l.count < 1 || l.count % 2 == 0 {
                    return Err(Error::InvalidModeCount(l.count));
                }
                if !(l.spacing > 0.0) {
                    return Err(Error::param("ladder spacing", "must be > 0"));
                }
                let half = (l.count / 2) as i64;
                if (l.center_index as i64) <= half {
                    return Err(Error::param("ladder", "ladder would reach index zero"));
                }
                let x0 = phase_match_amplitude(self.omega_m, l.envelope_center, l.spacing);
                for k in -half..=half {
                    let index = (l.center_index as i64 + k) as u64;
                    let omega = self.omega_m + k as f64 * l.spacing;
                    modes.push(Mode { kind: ModeKind::Acoustic(index), resonance: omega, loss: self.gamma });
                    g_om.push(if k == 0 {
                        self.g_om
                    } else {
                        self.g_om * phase_match_amplitude(omega, l.envelope_center, l.spacing) / x0
                    });
                    let coupled = match l.distribution {
                        PiezoDistribution::SurfaceOneSide => true,
                        _ => index % 2 == 1,
                    };
                    g_em.push(if k == 0 || coupled { self.g_em } else { 0.0 });
                }
            }
        }
        StateSpaceModel::new(modes, g_om, g_em, self.g_eo, self.kappa_opt_port, self.kappa_mu_port)
    }
}

/// Complex dynamics matrix A and real port matrix B.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpaceModel {
    modes: Vec<Mode>,
    a: DMatrix<Complex64>,
    b: DMatrix<f64>,
    g_om: Vec<f64>,
    g_em: Vec<f64>,
    g_eo: f64,
}

impl StateSpaceModel {
    /// `modes` must start with the optical and microwave modes followed by
    /// one acoustic mode per entry of `g_om`/`g_em`.
    pub fn new(
        modes: Vec<Mode>,
        g_om: Vec<f64>,
        g_em: Vec<f64>,
        g_eo: f64,
        kappa_opt_port: f64,
        kappa_mu_port: f64,
    ) -> Result<Self> {
        let n = g_om.len();
        if n < 1 || g_em.len() != n || modes.len() != n + 2 {
            return Err(Error::param(
                "modes",
                format!("{} modes for {} g_om and {} g_em entries", modes.len(), n, g_em.len()),
            ));
        }
        if modes[0].kind != ModeKind::Optical
            || modes[1].kind != ModeKind::Microwave
            || modes[2..].iter().any(|m| !matches!(m.kind, ModeKind::Acoustic(_)))
        {
            return Err(Error::param("modes", "order must be optical, microwave, acoustic..."));
        }
        for m in &modes {
            require_finite("resonance", m.resonance)?;
            require_non_negative("loss", m.loss)?;
        }
        for g in g_om.iter().chain(g_em.iter()).chain(core::iter::once(&g_eo)) {
            require_finite("coupling", *g)?;
        }
        require_non_negative("optical port rate", kappa_opt_port)?;
        require_non_negative("microwave port rate", kappa_mu_port)?;
        if kappa_opt_port > modes[0].loss * (1.0 + 1e-12) {
            return Err(Error::param("optical port rate", "exceeds the optical loss rate"));
        }
        if kappa_mu_port > modes[1].loss * (1.0 + 1e-12) {
            return Err(Error::param("microwave port rate", "exceeds the microwave loss rate"));
        }

        let dim = n + 2;
        let mut a = DMatrix::<Complex64>::zeros(dim, dim);
        for (i, m) in modes.iter().enumerate() {
            a[(i, i)] = Complex64::new(-0.5 * m.loss, -m.resonance);
        }
        let mut link = |i: usize, j: usize, g: f64| {
            a[(i, j)] = I * g;
            a[(j, i)] = I * g;
        };
        link(0, 1, g_eo);
        for j in 0..n {
            link(0, 2 + j, g_om[j]);
            link(1, 2 + j, g_em[j]);
        }
        let mut b = DMatrix::<f64>::zeros(dim, 2);
        b[(0, 0)] = kappa_opt_port.sqrt();
        b[(1, 1)] = kappa_mu_port.sqrt();
        Ok(StateSpaceModel { modes, a, b, g_om, g_em, g_eo })
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn a(&self) -> &DMatrix<Complex64> {
        &self.a
    }

    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn g_om(&self) -> &[f64] {
        &self.g_om
    }

    pub fn g_em(&self) -> &[f64] {
        &self.g_em
    }

    pub fn g_eo(&self) -> f64 {
        self.g_eo
    }

    pub fn dim(&self) -> usize {
        self.modes.len()
    }
}

/// 2x2 scattering matrix in (optical, microwave) order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scattering(pub [[Complex64; 2]; 2]);

impl Scattering {
    pub fn s_oo(&self) -> Complex64 {
        self.0[0][0]
    }
    /// Microwave in, optical out.
    pub fn s_oe(&self) -> Complex64 {
        self.0[0][1]
    }
    /// Optical in, microwave out.
    pub fn s_eo(&self) -> Complex64 {
        self.0[1][0]
    }
    pub fn s_ee(&self) -> Complex64 {
        self.0[1][1]
    }
}

/// S(omega) = B^T (-i omega - A)^-1 B - 1.
pub fn scattering(model: &StateSpaceModel, omega: f64) -> Result<Scattering> {
    let dim = model.dim();
    let mut m = -model.a.clone();
    for i in 0..dim {
        m[(i, i)] -= I * omega;
    }
    let rhs = model.b.map(|x| Complex64::new(x, 0.0));
    let x = m.lu().solve(&rhs).ok_or(Error::LosslessSingularity { omega })?;
    let mut s = [[Complex64::new(0.0, 0.0); 2]; 2];
    for (r, row) in s.iter_mut().enumerate() {
        for (c, cell) in row.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..dim {
                acc += model.b[(k, r)] * x[(k, c)];
            }
            if r == c {
                acc -= 1.0;
            }
            if !(acc.re.is_finite() && acc.im.is_finite()) {
                return Err(Error::LosslessSingularity { omega });
            }
            *cell = acc;
        }
    }
    Ok(Scattering(s))
}

fn snapshot(model: &StateSpaceModel) -> Metadata {
    let mut meta = Metadata::default();
    let hz = |x: f64| x / TAU;
    meta.set_param("delta_opt_hz", hz(model.modes[0].resonance));
    meta.set_param("kappa_opt_hz", hz(model.modes[0].loss));
    meta.set_param("kappa_opt_port_hz", hz(model.b[(0, 0)] * model.b[(0, 0)]));
    meta.set_param("omega_mu_hz", hz(model.modes[1].resonance));
    meta.set_param("kappa_mu_hz", hz(model.modes[1].loss));
    meta.set_param("kappa_mu_port_hz", hz(model.b[(1, 1)] * model.b[(1, 1)]));
    let c = model.modes.len() / 2 + 1;
    meta.set_param("omega_m_hz", hz(model.modes[c].resonance));
    meta.set_param("gamma_hz", hz(model.modes[c].loss));
    meta.set_param("g_om_hz", hz(model.g_om[c - 2]));
    meta.set_param("g_em_hz", hz(model.g_em[c - 2]));
    meta.set_param("g_eo_hz", hz(model.g_eo));
    meta.set_param("acoustic_modes", model.g_om.len() as f64);
    meta
}

/// |S_oe|^2 (microwave to optical) or |S_eo|^2 (optical to microwave).
pub fn transduction_spectrum(model: &StateSpaceModel, grid: &Grid, kind: SpectrumKind) -> Result<Spectrum> {
    let pick: fn(&Scattering) -> Complex64 = match kind {
        SpectrumKind::Moc => Scattering::s_oe,
        SpectrumKind::Om => Scattering::s_eo,
        other => {
            return Err(Error::param("kind", format!("{} is not a transduction spectrum", other.name())))
        }
    };
    let amplitude = grid
        .angular()
        .map(|w| scattering(model, w).map(|s| pick(&s)))
        .collect::<Result<Vec<_>>>()?;
    Spectrum::new(kind, grid.clone(), amplitude, snapshot(model))
}

/// Fraction of the grid at each end used for the OMIT baseline.
pub const BASELINE_FRACTION: f64 = 0.05;

/// Optical reflection |S_oo|^2 normalized to its off-resonant baseline.
pub fn omit_spectrum(model: &StateSpaceModel, grid: &Grid) -> Result<Spectrum> {
    let raw = grid
        .angular()
        .map(|w| scattering(model, w).map(|s| s.s_oo()))
        .collect::<Result<Vec<_>>>()?;
    let raw_power: Vec<f64> = raw.iter().map(|a| a.norm_sqr()).collect();
    let baseline = edge_mean(&raw_power, BASELINE_FRACTION);
    if !(baseline > 0.0) {
        return Err(Error::NonFiniteModel(vec![("omit_baseline".into(), baseline)]));
    }
    let scale = 1.0 / baseline.sqrt();
    let amplitude = raw.iter().map(|a| a * scale).collect();
    let mut meta = snapshot(model);
    meta.baseline = Some(baseline);
    let kappa_hz = model.modes[0].loss / TAU;
    if grid.span_hz() < 10.0 * kappa_hz {
        meta.warnings.push(format!(
            "grid span {:.4e} Hz is under 10 optical linewidths ({:.4e} Hz); baseline may be biased",
            grid.span_hz(),
            10.0 * kappa_hz
        ));
    }
    Spectrum::new(SpectrumKind::Omit, grid.clone(), amplitude, meta)
}

/// Assemble the model for `n_acoustic` ladder modes around the configured
/// acoustic mode. The phase-matching envelope is centred on that mode.
pub fn build(
    params: &SystemParams,
    couplings: &CouplingSet,
    n_acoustic: usize,
    port: OpticalPort,
) -> Result<StateSpaceModel> {
    params.validate()?;
    if n_acoustic < 1 || n_acoustic.is_multiple_of(2) {
        return Err(Error::InvalidModeCount(n_acoustic));
    }
    let mut lp = LinearParams::from_system(params, couplings, port);
    if n_acoustic > 1 {
        lp.ladder = Some(Ladder {
            count: n_acoustic,
            spacing: params.acoustic_fsr()?,
            center_index: params.mode_index()?,
            envelope_center: params.omega_m,
            distribution: params.piezo_distribution,
        });
    }
    lp.to_model()
}

/// Closed-form transduction efficiency of the single-acoustic-mode model.
pub fn closed_form_eta(p: &LinearParams, omega: f64) -> f64 {
    let (c_om, c_em, c_eo) = p.cooperativities();
    let x = |w0: f64, k: f64| Complex64::new(1.0, -(omega - w0) / (0.5 * k));
    let xo = x(p.delta_opt, p.kappa_opt);
    let xu = x(p.omega_mu, p.kappa_mu);
    let xm = x(p.omega_m, p.gamma);
    let alpha = 2.0 * (Complex64::new(-(c_em * c_om).sqrt(), 0.0) + I * c_eo.sqrt() * xm);
    let beta = 2.0 * I * (c_em * c_om * c_eo).sqrt() + c_em * xo + c_om * xu + c_eo * xm + xo * xu * xm;
    (p.kappa_opt_port / p.kappa_opt) * (p.kappa_mu_port / p.kappa_mu) * (alpha / beta).norm_sqr()
}

/// Transduction efficiency at the triple resonance.
pub fn closed_form_eta_peak(c_om: f64, c_em: f64, c_eo: f64, eta_opt: f64, eta_mu: f64) -> f64 {
    let s = c_em + c_om + c_eo + 1.0;
    eta_opt * eta_mu * 4.0 * (c_em * c_om + c_eo) / (4.0 * c_em * c_om * c_eo + s * s)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Eigenmode {
    pub value: Complex64,
    /// |v_i|^2 normalized to sum 1, in model mode order.
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Eigenmodes {
    /// Sorted by imaginary part, ascending.
    pub modes: Vec<Eigenmode>,
    /// Set when an eigenvector could not be separated (near-defective A).
    pub defective: bool,
}

/// Eigen-decomposition of A via complex Schur form and back-substitution.
pub fn eigenmodes(model: &StateSpaceModel) -> Eigenmodes {
    let dim = model.dim();
    let schur = nalgebra::Schur::new(model.a.clone());
    let (q, t) = schur.unpack();
    let scale = t.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let tiny = 1e-13 * scale;
    let mut defective = false;
    let mut modes = Vec::with_capacity(dim);
    for k in 0..dim {
        let lambda = t[(k, k)];
        let mut y = vec![Complex64::new(0.0, 0.0); dim];
        y[k] = Complex64::new(1.0, 0.0);
        for i in (0..k).rev() {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in i + 1..=k {
                acc += t[(i, j)] * y[j];
            }
            let denom = t[(i, i)] - lambda;
            if denom.norm() <= tiny {
                if acc.norm() > tiny {
                    defective = true;
                }
                y[i] = Complex64::new(0.0, 0.0);
            } else {
                y[i] = -acc / denom;
            }
        }
        let mut weights: Vec<f64> = (0..dim)
            .map(|r| {
                let mut v = Complex64::new(0.0, 0.0);
                for (c, yc) in y.iter().enumerate().take(k + 1) {
                    v += q[(r, c)] * yc;
                }
                v.norm_sqr()
            })
            .collect();
        let total: f64 = weights.iter().sum();
        if total > 0.0 && total.is_finite() {
            for w in &mut weights {
                *w /= total;
            }
        } else {
            defective = true;
        }
        modes.push(Eigenmode { value: lambda, weights });
    }
    modes.sort_by(|a, b| a.value.im.total_cmp(&b.value.im));
    Eigenmodes { modes, defective }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{angular, hertz};
    use crate::couplings::{coupling_set, cooperativity};
    use crate::presets;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }

    fn quartz_linear() -> LinearParams {
        let w = angular(11.366e9);
        LinearParams {
            delta_opt: w,
            kappa_opt: angular(2.2e6),
            kappa_opt_port: angular(1.2e6),
            omega_mu: w,
            kappa_mu: angular(17.1e6),
            kappa_mu_port: angular(7.33e6),
            omega_m: w,
            gamma: angular(500e3),
            g_om: angular(643e3),
            g_em: angular(347.0),
            g_eo: angular(162.0),
            ladder: None,
        }
    }

    #[test]
    fn decoupled_model_is_diagonal() {
        let mut p = quartz_linear();
        p.g_om = 0.0;
        p.g_em = 0.0;
        p.g_eo = 0.0;
        let m = p.to_model().unwrap();
        let a = m.a();
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert_eq!(a[(i, j)], Complex64::new(0.0, 0.0));
                }
            }
        }
        assert_eq!(a[(0, 0)], Complex64::new(-p.kappa_opt / 2.0, -p.delta_opt));
        assert_eq!(a[(1, 1)], Complex64::new(-p.kappa_mu / 2.0, -p.omega_mu));
        assert_eq!(a[(2, 2)], Complex64::new(-p.gamma / 2.0, -p.omega_m));
        let eig = eigenmodes(&m);
        let mut diag: Vec<Complex64> = (0..3).map(|i| a[(i, i)]).collect();
        diag.sort_by(|x, y| x.im.total_cmp(&y.im));
        for (e, d) in eig.modes.iter().zip(diag) {
            assert!((e.value - d).norm() <= 1e-12 * d.norm());
        }
    }

    #[test]
    fn three_mode_matrix_entries() {
        let p = quartz_linear();
        let m = p.to_model().unwrap();
        let a = m.a();
        assert_eq!(a[(0, 1)], I * p.g_eo);
        assert_eq!(a[(1, 0)], I * p.g_eo);
        assert_eq!(a[(0, 2)], I * p.g_om);
        assert_eq!(a[(2, 0)], I * p.g_om);
        assert_eq!(a[(1, 2)], I * p.g_em);
        assert_eq!(a[(2, 1)], I * p.g_em);
        let b = m.b();
        assert_eq!(b[(0, 0)], p.kappa_opt_port.sqrt());
        assert_eq!(b[(1, 1)], p.kappa_mu_port.sqrt());
        assert_eq!(b.iter().filter(|x| **x != 0.0).count(), 2);
    }

    #[test]
    fn bare_cavity_reflection_limits() {
        let mut p = quartz_linear();
        p.g_om = 0.0;
        p.g_em = 0.0;
        p.g_eo = 0.0;
        p.kappa_opt_port = p.kappa_opt;
        let s = scattering(&p.to_model().unwrap(), p.delta_opt).unwrap();
        assert!((s.s_oo() - 1.0).norm() < 1e-12);
        p.kappa_opt_port = p.kappa_opt / 2.0;
        let s = scattering(&p.to_model().unwrap(), p.delta_opt).unwrap();
        assert!(s.s_oo().norm() < 1e-12);
    }

    #[test]
    fn lossless_singularity_reported() {
        let mut p = quartz_linear();
        p.g_om = 0.0;
        p.g_em = 0.0;
        p.g_eo = 0.0;
        p.kappa_opt = 0.0;
        p.kappa_opt_port = 0.0;
        let m = p.to_model().unwrap();
        assert!(matches!(scattering(&m, p.delta_opt), Err(Error::LosslessSingularity { .. })));
    }

    #[test]
    fn reciprocity_on_grid() {
        let m = quartz_linear().to_model().unwrap();
        let g = Grid::linspace(11.36e9, 11.372e9, 301).unwrap();
        let moc = transduction_spectrum(&m, &g, SpectrumKind::Moc).unwrap();
        let om = transduction_spectrum(&m, &g, SpectrumKind::Om).unwrap();
        for (a, b) in moc.power().iter().zip(om.power()) {
            assert!(rel(*a, *b) < 1e-12);
        }
    }

    #[test]
    fn peak_matches_closed_form() {
        let p = quartz_linear();
        let m = p.to_model().unwrap();
        let s = scattering(&m, p.omega_m).unwrap();
        let (c_om, c_em, c_eo) = p.cooperativities();
        let peak = closed_form_eta_peak(
            c_om,
            c_em,
            c_eo,
            p.kappa_opt_port / p.kappa_opt,
            p.kappa_mu_port / p.kappa_mu,
        );
        assert!(rel(s.s_oe().norm_sqr(), peak) < 1e-10);
        assert!(rel(closed_form_eta(&p, p.omega_m), peak) < 1e-12);
    }

    #[test]
    fn peak_formula_examples() {
        let e = closed_form_eta_peak(1.0, 5.6e-8, 0.0, 0.53, 0.43);
        assert!(rel(e, 1.28e-8) < 0.01, "{e}");
        assert!(rel(closed_form_eta_peak(10.0, 10.0, 0.0, 1.0, 1.0), 400.0 / 441.0) < 1e-15);
        assert_eq!(closed_form_eta_peak(0.0, 0.0, 0.0, 1.0, 1.0), 0.0);
        // reduces to 4 C_om C_em / (1 + C_om + C_em)^2
        let (a, b) = (0.7, 0.2);
        assert!(rel(closed_form_eta_peak(a, b, 0.0, 1.0, 1.0), 4.0 * a * b / (1.0 + a + b).powi(2)) < 1e-15);
    }

    #[test]
    fn symmetric_without_electro_optic_path() {
        let mut p = quartz_linear();
        p.g_eo = 0.0;
        let m = p.to_model().unwrap();
        for k in 1..50 {
            let d = angular(20e3) * k as f64;
            let lo = scattering(&m, p.omega_m - d).unwrap().s_oe().norm_sqr();
            let hi = scattering(&m, p.omega_m + d).unwrap().s_oe().norm_sqr();
            assert!(rel(lo, hi) < 1e-9, "{k}");
        }
    }

    #[test]
    fn electro_optic_path_leaves_one_dip_above_resonance() {
        let p = quartz_linear();
        let m = p.to_model().unwrap();
        let (f_m, gam) = (hertz(p.omega_m), hertz(p.gamma));
        let g = Grid::linspace(f_m - 5.0 * gam, f_m + 5.0 * gam, 4001).unwrap();
        let s = transduction_spectrum(&m, &g, SpectrumKind::Moc).unwrap();
        let minima = s.local_minima();
        assert_eq!(minima.len(), 1);
        let offset = (s.freq_hz()[minima[0]] - f_m) / gam;
        assert!(offset > 0.0 && offset < 5.0, "{offset}");
    }

    #[test]
    fn quartz_peak_efficiency() {
        let p = quartz_linear();
        let m = p.to_model().unwrap();
        let eta = scattering(&m, p.omega_m).unwrap().s_oe().norm_sqr();
        assert!(rel(eta, 1.2e-8) < 0.15, "{eta}");
    }

    #[test]
    fn bare_omit_is_inverted_lorentzian() {
        let mut p = quartz_linear();
        p.g_om = 0.0;
        p.g_em = 0.0;
        p.g_eo = 0.0;
        p.kappa_opt_port = angular(0.7e6);
        let m = p.to_model().unwrap();
        let f0 = 11.366e9;
        let g = Grid::linspace(f0 - 30e6, f0 + 30e6, 2001).unwrap();
        let s = omit_spectrum(&m, &g).unwrap();
        let b = s.metadata.baseline.unwrap();
        let (k, kc) = (p.kappa_opt, p.kappa_opt_port);
        for (f, pw) in s.freq_hz().iter().zip(s.power()) {
            let d = angular(*f) - p.delta_opt;
            let expected = (Complex64::new(kc, 0.0) / Complex64::new(k / 2.0, -d) - 1.0).norm_sqr() / b;
            assert!(rel(*pw, expected) < 1e-10);
        }
        assert_eq!(s.local_minima().len(), 1);
        assert!(s.metadata.warnings.is_empty());
        let narrow = Grid::linspace(f0 - 1e6, f0 + 1e6, 11).unwrap();
        assert_eq!(omit_spectrum(&m, &narrow).unwrap().metadata.warnings.len(), 1);
    }

    #[test]
    fn omit_matches_two_mode_formula_at_line_center() {
        let mut p = quartz_linear();
        p.g_em = 0.0;
        p.g_eo = 0.0;
        p.kappa_opt_port = angular(0.7e6);
        let c_om = 1.48;
        p.g_om = (c_om * p.kappa_opt * p.gamma / 4.0).sqrt();
        let m = p.to_model().unwrap();
        let s = scattering(&m, p.omega_m).unwrap().s_oo();
        let oracle = p.kappa_opt_port / (p.kappa_opt / 2.0 + p.g_om * p.g_om / (p.gamma / 2.0)) - 1.0;
        assert!(rel(s.norm_sqr(), oracle * oracle) < 1e-6);
    }

    #[test]
    fn strong_coupling_eigen_splitting() {
        let w = angular(11.366e9);
        let (k, gam, g) = (angular(2.2e6), angular(500e3), angular(5e6));
        let modes = vec![
            Mode { kind: ModeKind::Optical, resonance: w, loss: k },
            Mode { kind: ModeKind::Microwave, resonance: w + angular(1e9), loss: k },
            Mode { kind: ModeKind::Acoustic(1), resonance: w, loss: gam },
        ];
        let m = StateSpaceModel::new(modes, vec![g], vec![0.0], 0.0, 0.0, 0.0).unwrap();
        let e = eigenmodes(&m);
        assert!(!e.defective);
        // the detuned microwave mode sorts first
        assert!(e.modes[0].weights[1] > 0.999);
        let lo = &e.modes[1];
        let hi = &e.modes[2];
        let split = hi.value.im - lo.value.im;
        let analytic = 2.0 * (g * g - ((k - gam) / 4.0).powi(2)).sqrt();
        assert!(rel(split, analytic) < 1e-9);
        assert!(rel(split, 2.0 * g) < 0.01);
        for mode in &e.modes {
            assert!((mode.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn multimode_envelope_and_parity() {
        let p = presets::quartz_experiment();
        let mut c = coupling_set(&p).unwrap();
        c.g_om = angular(643e3);
        c.g_em = angular(347.0);
        let m = build(&p, &c, 7, OpticalPort::Port2).unwrap();
        assert_eq!(m.dim(), 9);
        let a = m.a();
        for i in 2..9 {
            for j in 2..9 {
                if i != j {
                    assert_eq!(a[(i, j)], Complex64::new(0.0, 0.0));
                }
            }
        }
        let fsr = p.acoustic_fsr().unwrap();
        for (j, mode) in m.modes()[2..].iter().enumerate() {
            let k = j as f64 - 3.0;
            let env = crate::couplings::phase_match_envelope(mode.resonance, p.omega_m, fsr);
            assert!(rel(m.g_om()[j] * m.g_om()[j], c.g_om * c.g_om * env) < 1e-12);
            assert!(rel(mode.resonance, p.omega_m + k * fsr) < 1e-15);
            let ModeKind::Acoustic(idx) = mode.kind else { panic!() };
            if idx % 2 == 0 {
                assert_eq!(m.g_em()[j], 0.0);
            } else {
                assert_eq!(m.g_em()[j], c.g_em);
            }
        }
        assert!(m.g_om()[1] < m.g_om()[3]);
        assert!(build(&p, &c, 4, OpticalPort::Port2).is_err());
        assert!(build(&p, &c, 0, OpticalPort::Port2).is_err());
    }

    #[test]
    fn single_mode_build_equals_three_by_three() {
        let p = presets::quartz_experiment();
        let c = coupling_set(&p).unwrap();
        let m = build(&p, &c, 1, OpticalPort::Port2).unwrap();
        let direct = LinearParams::from_system(&p, &c, OpticalPort::Port2).to_model().unwrap();
        assert_eq!(m, direct);
        assert!(rel(cooperativity(c.g_om, p.kappa_opt, p.gamma), c.c_om) < 1e-15);
        assert!(hertz(m.modes()[2].resonance) > 1e10);
    }

    #[test]
    fn mismatched_counts_rejected() {
        let p = quartz_linear();
        let m = p.to_model().unwrap();
        assert!(StateSpaceModel::new(m.modes().to_vec(), vec![1.0, 2.0], vec![0.0], 0.0, 0.0, 0.0).is_err());
        assert!(StateSpaceModel::new(m.modes().to_vec(), vec![1.0], vec![0.0], 0.0, -1.0, 0.0).is_err());
    }
}
