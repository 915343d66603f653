//! Damped least-squares (Levenberg-Marquardt) fits of the linear model to
//! OMIT and transduction spectra.

use crate::constants::TAU;
use crate::error::{require_positive, Error, Result};
use crate::prelude::*;
use crate::spectrum::{edge_mean, Spectrum, SpectrumKind};
use crate::statespace::{scattering, LinearParams, StateSpaceModel, BASELINE_FRACTION};
use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitParam {
    GOm,
    GEm,
    GEo,
    Gamma,
    KappaOpt,
    KappaMu,
    DeltaOpt,
    OmegaM,
    AmplitudeScale,
    Baseline,
}

impl FitParam {
    pub const ALL: [FitParam; 10] = [
        FitParam::GOm,
        FitParam::GEm,
        FitParam::GEo,
        FitParam::Gamma,
        FitParam::KappaOpt,
        FitParam::KappaMu,
        FitParam::DeltaOpt,
        FitParam::OmegaM,
        FitParam::AmplitudeScale,
        FitParam::Baseline,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FitParam::GOm => "g_om",
            FitParam::GEm => "g_em",
            FitParam::GEo => "g_eo",
            FitParam::Gamma => "Gamma",
            FitParam::KappaOpt => "kappa_opt",
            FitParam::KappaMu => "kappa_mu",
            FitParam::DeltaOpt => "Delta_opt",
            FitParam::OmegaM => "Omega_m",
            FitParam::AmplitudeScale => "amplitude_scale",
            FitParam::Baseline => "baseline",
        }
    }

    /// Case-insensitive on the names above.
    pub fn parse(s: &str) -> Result<Self> {
        FitParam::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| {
                let names: Vec<&str> = FitParam::ALL.iter().map(|p| p.name()).collect();
                Error::param("free", format!("unknown parameter {s:?}; expected one of {}", names.join(", ")))
            })
    }

    /// Angular rate or frequency (reported in Hz).
    pub fn is_rate(self) -> bool {
        !matches!(self, FitParam::AmplitudeScale | FitParam::Baseline)
    }
}

/// Linear model plus the two output-scaling parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelState {
    pub linear: LinearParams,
    pub amplitude_scale: f64,
    pub baseline: f64,
}

impl ModelState {
    pub fn new(linear: LinearParams) -> Self {
        ModelState { linear, amplitude_scale: 1.0, baseline: 0.0 }
    }

    pub fn get(&self, p: FitParam) -> f64 {
        let l = &self.linear;
        match p {
            FitParam::GOm => l.g_om,
            FitParam::GEm => l.g_em,
            FitParam::GEo => l.g_eo,
            FitParam::Gamma => l.gamma,
            FitParam::KappaOpt => l.kappa_opt,
            FitParam::KappaMu => l.kappa_mu,
            FitParam::DeltaOpt => l.delta_opt,
            FitParam::OmegaM => l.omega_m,
            FitParam::AmplitudeScale => self.amplitude_scale,
            FitParam::Baseline => self.baseline,
        }
    }

    /// Port rates keep their fraction of a fitted total loss.
    pub fn set(&mut self, p: FitParam, v: f64) {
        let l = &mut self.linear;
        match p {
            FitParam::GOm => l.g_om = v,
            FitParam::GEm => l.g_em = v,
            FitParam::GEo => l.g_eo = v,
            FitParam::Gamma => l.gamma = v,
            FitParam::KappaOpt => {
                l.kappa_opt_port *= if l.kappa_opt > 0.0 { v / l.kappa_opt } else { 0.0 };
                l.kappa_opt = v;
            }
            FitParam::KappaMu => {
                l.kappa_mu_port *= if l.kappa_mu > 0.0 { v / l.kappa_mu } else { 0.0 };
                l.kappa_mu = v;
            }
            FitParam::DeltaOpt => l.delta_opt = v,
            FitParam::OmegaM => l.omega_m = v,
            FitParam::AmplitudeScale => self.amplitude_scale = v,
            FitParam::Baseline => self.baseline = v,
        }
    }

    pub fn c_om(&self) -> f64 {
        self.linear.cooperativities().0
    }
}

/// Default bound ratio for fitted loss rates.
pub const LOSS_RATE_SPAN: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreeParameter {
    pub param: FitParam,
    pub initial: f64,
    pub lower: f64,
    pub upper: f64,
}

impl FreeParameter {
    /// Default bounds: loss rates within three decades of the guess,
    /// other rates and the scale nonnegative, baseline unbounded.
    pub fn new(param: FitParam, initial: f64) -> Self {
        let (lower, upper) = match param {
            FitParam::Gamma | FitParam::KappaOpt | FitParam::KappaMu if initial > 0.0 => {
                (initial * LOSS_RATE_SPAN.recip(), initial * LOSS_RATE_SPAN)
            }
            FitParam::Baseline => (f64::NEG_INFINITY, f64::INFINITY),
            _ => (0.0, f64::INFINITY),
        };
        FreeParameter { param, initial, lower, upper }
    }

    pub fn bounded(param: FitParam, initial: f64, lower: f64, upper: f64) -> Self {
        FreeParameter { param, initial, lower, upper }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResidualSpace {
    Linear,
    /// Residuals of 10 log10(power).
    LogPower,
}

impl ResidualSpace {
    /// Linear for OMIT, dB for transduction.
    pub fn default_for(kind: SpectrumKind) -> Self {
        match kind {
            SpectrumKind::Moc | SpectrumKind::Om => ResidualSpace::LogPower,
            _ => ResidualSpace::Linear,
        }
    }
}

/// Half-width of the default fit window, in acoustic linewidths.
pub const DEFAULT_WINDOW_LINEWIDTHS: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Window {
    /// +/- 10 Gamma around the initial Omega_m.
    Default,
    Full,
    /// Hz, inclusive.
    Range(f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitProblem {
    pub data: Spectrum,
    /// Initial guess for free parameters and values of fixed ones.
    pub model: ModelState,
    pub free: Vec<FreeParameter>,
    pub residual_space: ResidualSpace,
    pub window: Window,
}

impl FitProblem {
    /// Problem with default residual space and window.
    pub fn new(data: Spectrum, model: ModelState, free: Vec<FreeParameter>) -> Self {
        let residual_space = ResidualSpace::default_for(data.kind);
        FitProblem { data, model, free, residual_space, window: Window::Default }
    }

    fn window_hz(&self) -> (f64, f64) {
        match self.window {
            Window::Full => (f64::NEG_INFINITY, f64::INFINITY),
            Window::Range(a, b) => (a, b),
            Window::Default => {
                let c = self.model.linear.omega_m / TAU;
                let h = DEFAULT_WINDOW_LINEWIDTHS * self.model.linear.gamma / TAU;
                (c - h, c + h)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// Relative change of the objective fell below the threshold.
    Converged,
    /// No damped step reduced the objective.
    Stalled,
    ZeroResidual,
    MaxIterations,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    /// Best values, internal units (rad/s for rates).
    pub params: Vec<(FitParam, f64)>,
    /// Standard errors, same units.
    pub uncertainties: Vec<f64>,
    /// Row-major n x n covariance.
    pub covariance: Vec<f64>,
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    pub stop_reason: StopReason,
    /// Of the scaled normal matrix J^T J.
    pub condition_number: f64,
    /// Objective after each accepted step, starting with the initial value.
    pub history: Vec<f64>,
    pub points: usize,
    /// Full model at the optimum.
    pub model: ModelState,
}

impl FitReport {
    pub fn value(&self, p: FitParam) -> Option<f64> {
        self.params.iter().find(|(q, _)| *q == p).map(|(_, v)| *v)
    }
}

/// Relative objective change below which the search stops.
pub const RELATIVE_TOLERANCE: f64 = 1e-10;
pub const MAX_ITERATIONS: usize = 500;
/// Finite-difference step, relative to the parameter.
pub const FD_RELATIVE_STEP: f64 = 1e-6;
/// Finite-difference step floor.
pub const FD_ABSOLUTE_STEP: f64 = 1e-12;

struct Evaluator<'a> {
    problem: &'a FitProblem,
    /// Indices of data points inside the window.
    window: Vec<usize>,
    /// Edge indices used for OMIT normalization, when normalized.
    edges: Option<Vec<usize>>,
    targets: Vec<f64>,
}

fn observable(kind: SpectrumKind, model: &StateSpaceModel, omega: f64) -> Result<f64> {
    let s = scattering(model, omega)?;
    Ok(match kind {
        SpectrumKind::Moc => s.s_oe().norm_sqr(),
        SpectrumKind::Om => s.s_eo().norm_sqr(),
        SpectrumKind::Omit | SpectrumKind::Reflection => s.s_oo().norm_sqr(),
    })
}

impl<'a> Evaluator<'a> {
    fn new(problem: &'a FitProblem) -> Result<Self> {
        if problem.free.is_empty() {
            return Err(Error::param("free", "at least one free parameter is required"));
        }
        for (i, f) in problem.free.iter().enumerate() {
            if problem.free[..i].iter().any(|g| g.param == f.param) {
                return Err(Error::param("free", format!("{} listed twice", f.param.name())));
            }
            if !(f.lower <= f.initial && f.initial <= f.upper) || !f.initial.is_finite() {
                return Err(Error::param(
                    f.param.name(),
                    format!("initial {} outside bounds [{}, {}]", f.initial, f.lower, f.upper),
                ));
            }
        }
        let (lo, hi) = problem.window_hz();
        let freq = problem.data.freq_hz();
        let window: Vec<usize> = (0..freq.len()).filter(|&i| freq[i] >= lo && freq[i] <= hi).collect();
        if window.len() <= problem.free.len() {
            return Err(Error::InvalidGrid(format!(
                "{} points in the fit window for {} free parameters",
                window.len(),
                problem.free.len()
            )));
        }
        let power = problem.data.power();
        let values: Vec<f64> = window.iter().map(|&i| power[i]).collect();
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        if values.iter().all(|v| (v - mean).abs() <= 1e-300 + f64::EPSILON * mean.abs()) {
            return Err(Error::FlatData);
        }
        let targets = match problem.residual_space {
            ResidualSpace::Linear => values,
            ResidualSpace::LogPower => {
                if values.iter().any(|v| !(*v > 0.0)) {
                    return Err(Error::param("data", "log-power residuals need strictly positive power"));
                }
                values.iter().map(|v| 10.0 * v.log10()).collect()
            }
        };
        let normalized = problem.data.kind == SpectrumKind::Omit && problem.data.metadata.baseline.is_some();
        let edges = normalized.then(|| {
            let n = freq.len();
            let k = ((n as f64 * BASELINE_FRACTION) as usize).max(1).min(n);
            (0..k).chain(n - k..n).collect()
        });
        Ok(Evaluator { problem, window, edges, targets })
    }

    fn state(&self, x: &[f64]) -> ModelState {
        let mut m = self.problem.model;
        for (f, v) in self.problem.free.iter().zip(x) {
            m.set(f.param, *v);
        }
        m
    }

    fn snapshot(&self, x: &[f64]) -> Vec<(String, f64)> {
        self.problem.free.iter().zip(x).map(|(f, v)| (f.param.name().to_string(), *v)).collect()
    }

    fn residuals(&self, x: &[f64]) -> Result<Vec<f64>> {
        let state = self.state(x);
        let bad = || Error::NonFiniteModel(self.snapshot(x));
        let model = state.linear.to_model().map_err(|e| match e {
            Error::InvalidParameter { .. } => bad(),
            other => other,
        })?;
        let kind = self.problem.data.kind;
        let freq = self.problem.data.freq_hz();
        let norm = match &self.edges {
            None => 1.0,
            Some(idx) => {
                let p = idx
                    .iter()
                    .map(|&i| observable(kind, &model, TAU * freq[i]))
                    .collect::<Result<Vec<_>>>()
                    .map_err(|_| bad())?;
                edge_mean(&p, 0.5)
            }
        };
        let mut out = Vec::with_capacity(self.window.len());
        for (&i, t) in self.window.iter().zip(&self.targets) {
            let p = observable(kind, &model, TAU * freq[i]).map_err(|_| bad())? / norm;
            let y = state.amplitude_scale * p + state.baseline;
            let r = match self.problem.residual_space {
                ResidualSpace::Linear => y - t,
                ResidualSpace::LogPower => 10.0 * y.log10() - t,
            };
            if !r.is_finite() {
                return Err(bad());
            }
            out.push(r);
        }
        Ok(out)
    }

    fn step(&self, k: usize, x: f64) -> f64 {
        let h = (FD_RELATIVE_STEP * x.abs()).max(FD_ABSOLUTE_STEP);
        if x + h > self.problem.free[k].upper {
            -h
        } else {
            h
        }
    }

    /// Forward-difference Jacobian in physical units.
    fn jacobian(&self, x: &[f64], r0: &[f64]) -> Result<DMatrix<f64>> {
        let mut j = DMatrix::zeros(r0.len(), x.len());
        let mut xp = x.to_vec();
        for k in 0..x.len() {
            let h = self.step(k, x[k]);
            xp[k] = x[k] + h;
            let r1 = self.residuals(&xp)?;
            xp[k] = x[k];
            for (row, (a, b)) in r1.iter().zip(r0).enumerate() {
                j[(row, k)] = (a - b) / h;
            }
        }
        Ok(j)
    }
}

fn cost(r: &[f64]) -> f64 {
    r.iter().map(|v| v * v).sum()
}

/// Sum of squared residuals at `x` (free parameters in problem order).
pub fn objective(problem: &FitProblem, x: &[f64]) -> Result<f64> {
    Ok(cost(&Evaluator::new(problem)?.residuals(x)?))
}

/// Gradient of [`objective`] from the forward-difference Jacobian, 2 J^T r.
pub fn objective_gradient(problem: &FitProblem, x: &[f64]) -> Result<Vec<f64>> {
    let ev = Evaluator::new(problem)?;
    let r = ev.residuals(x)?;
    let j = ev.jacobian(x, &r)?;
    let g = j.transpose() * DVector::from_column_slice(&r) * 2.0;
    Ok(g.iter().copied().collect())
}

pub fn fit(problem: &FitProblem) -> Result<FitReport> {
    let ev = Evaluator::new(problem)?;
    let n = problem.free.len();
    let scale: Vec<f64> = problem.free.iter().map(|f| if f.initial != 0.0 { f.initial.abs() } else { 1.0 }).collect();
    let clamp = |k: usize, v: f64| v.max(problem.free[k].lower).min(problem.free[k].upper);

    let mut x: Vec<f64> = problem.free.iter().map(|f| f.initial).collect();
    let mut r = ev.residuals(&x)?;
    let mut c = cost(&r);
    let mut history = vec![c];
    let mut jac = ev.jacobian(&x, &r)?;
    let scaled = |j: &DMatrix<f64>| {
        let mut js = j.clone();
        for k in 0..n {
            js.column_mut(k).scale_mut(scale[k]);
        }
        js
    };
    let mut js = scaled(&jac);
    let mut lambda = {
        let jtj = js.transpose() * &js;
        1e-3 * (0..n).map(|k| jtj[(k, k)]).fold(0.0, f64::max).max(f64::MIN_POSITIVE)
    };
    let mut iterations = 0;
    let mut stop = StopReason::MaxIterations;
    if c == 0.0 {
        stop = StopReason::ZeroResidual;
    }
    while stop == StopReason::MaxIterations && iterations < MAX_ITERATIONS {
        iterations += 1;
        let jtj = js.transpose() * &js;
        let grad = js.transpose() * DVector::from_column_slice(&r);
        let dmax = (0..n).map(|k| jtj[(k, k)]).fold(0.0, f64::max);
        let mut accepted = false;
        while lambda < 1e16 * dmax.max(1.0) {
            let mut a = jtj.clone();
            for k in 0..n {
                a[(k, k)] += lambda * jtj[(k, k)].max(1e-12 * dmax).max(f64::MIN_POSITIVE);
            }
            let Some(delta) = a.lu().solve(&(-&grad)) else {
                lambda *= 4.0;
                continue;
            };
            let trial: Vec<f64> = (0..n).map(|k| clamp(k, x[k] + delta[k] * scale[k])).collect();
            if trial == x {
                break;
            }
            let rt = ev.residuals(&trial)?;
            let ct = cost(&rt);
            if ct < c {
                let change = (c - ct) / c;
                x = trial;
                r = rt;
                c = ct;
                history.push(c);
                lambda = (lambda / 3.0).max(1e-300);
                accepted = true;
                if c == 0.0 {
                    stop = StopReason::ZeroResidual;
                } else if change < RELATIVE_TOLERANCE {
                    stop = StopReason::Converged;
                }
                break;
            }
            lambda *= 4.0;
        }
        if !accepted {
            stop = StopReason::Stalled;
            break;
        }
        jac = ev.jacobian(&x, &r)?;
        js = scaled(&jac);
    }

    let m = r.len();
    let jtj = js.transpose() * &js;
    let svd = jtj.clone().svd(false, false);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition_number = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    let sigma2 = if m > n { c / (m - n) as f64 } else { 0.0 };
    let mut covariance = vec![f64::NAN; n * n];
    if let Some(inv) = jtj.try_inverse() {
        for i in 0..n {
            for j in 0..n {
                covariance[i * n + j] = sigma2 * inv[(i, j)] * scale[i] * scale[j];
            }
        }
    }
    let uncertainties = (0..n).map(|i| covariance[i * n + i].sqrt()).collect();
    Ok(FitReport {
        params: problem.free.iter().map(|f| f.param).zip(x.iter().copied()).collect(),
        uncertainties,
        covariance,
        residual_norm: c.sqrt(),
        iterations,
        converged: matches!(stop, StopReason::Converged | StopReason::ZeroResidual | StopReason::Stalled),
        stop_reason: stop,
        condition_number,
        history,
        points: m,
        model: ev.state(&x),
    })
}

/// C_om against pump power, regressed through the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSeries {
    pub powers: Vec<f64>,
    pub c_om: Vec<f64>,
    /// C_om per watt.
    pub slope: f64,
    pub r_squared: f64,
    pub reports: Vec<FitReport>,
}

/// Fits each OMIT spectrum and regresses the fitted C_om on pump power.
pub fn cooperativity_vs_power(series: &[(f64, FitProblem)]) -> Result<PowerSeries> {
    if series.len() < 3 {
        return Err(Error::param("series", format!("need at least 3 powers, got {}", series.len())));
    }
    for (p, _) in series {
        require_positive("pump power", *p)?;
    }
    let reports = fit_all(series)?;
    let powers: Vec<f64> = series.iter().map(|(p, _)| *p).collect();
    let c_om: Vec<f64> = reports.iter().map(|r| r.model.c_om()).collect();
    let (slope, r_squared) = regress_through_origin(&powers, &c_om);
    Ok(PowerSeries { powers, c_om, slope, r_squared, reports })
}

#[cfg(feature = "std")]
fn fit_all(series: &[(f64, FitProblem)]) -> Result<Vec<FitReport>> {
    std::thread::scope(|scope| {
        let handles: Vec<_> = series.iter().map(|(_, p)| scope.spawn(move || fit(p))).collect();
        handles.into_iter().map(|h| h.join().expect("fit thread panicked")).collect()
    })
}

#[cfg(not(feature = "std"))]
fn fit_all(series: &[(f64, FitProblem)]) -> Result<Vec<FitReport>> {
    series.iter().map(|(_, p)| fit(p)).collect()
}

/// Least-squares slope of y = k x and its coefficient of determination.
pub fn regress_through_origin(x: &[f64], y: &[f64]) -> (f64, f64) {
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let sxx: f64 = x.iter().map(|a| a * a).sum();
    let k = sxy / sxx;
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let ss_res: f64 = x.iter().zip(y).map(|(a, b)| (b - k * a).powi(2)).sum();
    let ss_tot: f64 = y.iter().map(|b| (b - mean).powi(2)).sum();
    let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    (k, r2)
}
