//! Subcommands and dispatch. Exit codes: 0 success, 1 validation or usage
//! error, 2 numerical failure.

use crate::config::{load_config, LoadedConfig, Origin};
use crate::error::{CliError, CliResult};
use crate::format::{
    json_text, parse_grid, parse_range, spectrum_from_csv, spectrum_from_json, spectrum_to_csv, spectrum_to_json,
    Report,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use piezobrill_core::cavity::{match_fsr, mode_spacings};
use piezobrill_core::constants::{angular, dbm_to_watts, hertz, TAU};
use piezobrill_core::couplings::{cooperativities, CouplingSet, Rates, SystemParams};
use piezobrill_core::design::{project, CooperativityChoice, ImprovementLedger};
use piezobrill_core::fit::{
    cooperativity_vs_power, fit, FitParam, FitProblem, FitReport, FreeParameter, ModelState, ResidualSpace, Window,
};
use piezobrill_core::materials::MaterialRegistry;
use piezobrill_core::sensing::{
    displacement, driven_phonons, extract_d33, extract_gem, is_weak_coupling, sensitivity_floor, thermal_occupancy,
    zero_point_displacement, DisplacementConvention, NoiseFloor,
};
use piezobrill_core::spectrum::{Spectrum, SpectrumKind};
use piezobrill_core::statespace::{build, closed_form_eta_peak, omit_spectrum, transduction_spectrum, LinearParams};
use serde_json::{json, Value};
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Debug, Parser)]
#[command(name = "piezobrill", version, about = "Piezo-Brillouin transducer modelling toolkit")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Config file, or the name of a shipped config.
    #[arg(long, global = true)]
    config: Option<String>,
    /// Extra material table; its records replace built-ins of the same name.
    #[arg(long, global = true)]
    materials: Option<PathBuf>,
    /// Output file; `.json` selects JSON. Writes a `.meta.json` sidecar.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Warn about unknown config keys instead of failing.
    #[arg(long, global = true)]
    lax: bool,
    /// JSON reports on standard output.
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Kind {
    Omit,
    Moc,
    Om,
}

impl Kind {
    fn spectrum_kind(self) -> SpectrumKind {
        match self {
            Kind::Omit => SpectrumKind::Omit,
            Kind::Moc => SpectrumKind::Moc,
            Kind::Om => SpectrumKind::Om,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Residuals {
    Linear,
    Log,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// List the material table.
    Materials,
    /// Coupling rates and cooperativities.
    Couple,
    /// Scattering spectrum on a frequency grid.
    Spectrum {
        #[arg(value_enum)]
        kind: Kind,
        /// start:stop:points in Hz.
        #[arg(long)]
        grid: Option<String>,
        /// Add a power_db column.
        #[arg(long)]
        db: bool,
        /// Number of acoustic modes (odd); overrides the config.
        #[arg(long)]
        modes: Option<usize>,
    },
    /// Optical mode spacings of the composite cavity.
    Fsr {
        /// Search for a piezo displacement matching a target spacing.
        #[arg(long = "match")]
        find_match: bool,
        /// Target spacing in Hz; defaults to the config target.
        #[arg(long)]
        target_hz: Option<f64>,
    },
    /// Phonon, displacement and piezoelectric calibration.
    Sense {
        /// Driven phonon number.
        #[arg(long)]
        nm: Option<f64>,
        /// Microwave drive power in dBm.
        #[arg(long, allow_hyphen_values = true)]
        pmu_dbm: Option<f64>,
        /// Detection bandwidth in Hz for the sensitivity floor.
        #[arg(long)]
        bandwidth_hz: Option<f64>,
        /// driven_peak or rms_pair.
        #[arg(long)]
        convention: Option<String>,
    },
    /// Improvement ledger projections.
    Design {
        #[command(subcommand)]
        action: DesignAction,
    },
    /// Fit the model to measured or synthetic spectra.
    Fit {
        #[arg(value_enum)]
        kind: Kind,
        /// Spectrum file (CSV or JSON); repeat with --pump-w for a power series.
        #[arg(long, required = true)]
        data: Vec<PathBuf>,
        /// Comma-separated free parameters, e.g. g_om,Gamma.
        #[arg(long, value_delimiter = ',', required = true)]
        free: Vec<String>,
        /// Initial values, name=value (Hz for rates), comma-separated.
        #[arg(long, value_delimiter = ',')]
        init: Vec<String>,
        /// Bounds, name=lower:upper (Hz for rates), comma-separated.
        #[arg(long, value_delimiter = ',')]
        bounds: Vec<String>,
        /// start:stop in Hz, or `full`; defaults to +/-10 linewidths.
        #[arg(long)]
        window: Option<String>,
        #[arg(long, value_enum)]
        residuals: Option<Residuals>,
        /// Pump power per data file, W, for a cooperativity-vs-power fit.
        #[arg(long, value_delimiter = ',')]
        pump_w: Vec<f64>,
    },
}

#[derive(Debug, Subcommand)]
enum DesignAction {
    /// List ledger entries.
    List {
        /// Improvement table file; defaults to the built-in one
        #[arg(long)]
        ledger: Option<PathBuf>,
    },
    /// Project g_em, C_em and efficiency for a set of improvements.
    Project {
        /// Comma-separated entry labels; defaults to the config selection.
        #[arg(long, value_delimiter = ',')]
        select: Vec<String>,
        /// baseline, matched, or a number.
        #[arg(long)]
        c_om: Option<String>,
        /// Improvement table file; defaults to the built-in one
        #[arg(long)]
        ledger: Option<PathBuf>,
    },
}

struct Context {
    config: LoadedConfig,
    registry: MaterialRegistry,
    argv: Vec<String>,
}

enum Output {
    /// Text by default, JSON on request.
    Report(Report),
    Json(Value),
    Csv(String),
}

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

impl Context {
    fn params(&self) -> CliResult<SystemParams> {
        self.config.document.system_params(&self.registry)
    }

    fn couplings(&self, params: &SystemParams) -> CliResult<CouplingSet> {
        let (g_om, g_em, g_eo) = self.config.document.overrides();
        let rates = Rates::compute(params)?.with_overrides(g_om, g_em, g_eo);
        Ok(cooperativities(params, &rates)?)
    }

    fn sidecar(&self, out: &Path, warnings: &[String]) -> Value {
        let provenance: serde_json::Map<String, Value> = self
            .config
            .provenance
            .iter()
            .map(|(k, o)| (k.clone(), json!(if *o == Origin::Given { "given" } else { "defaulted" })))
            .collect();
        json!({
            "tool": "piezobrill",
            "version": env!("CARGO_PKG_VERSION"),
            "arguments": self.argv,
            "config": self.config.source,
            "output": out.display().to_string(),
            "warnings": warnings,
            "provenance": provenance,
        })
    }
}

fn sidecar_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

fn is_json_path(p: &Path) -> bool {
    p.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

fn materials(ctx: &Context) -> CliResult<Report> {
    let mut r = Report::default();
    for m in ctx.registry.iter() {
        let n = &m.name;
        r.number(&format!("{n}.refractive_index"), m.refractive_index);
        if let Some(v) = m.density {
            r.number(&format!("{n}.density"), v);
        }
        if let Some(v) = m.c33 {
            r.number(&format!("{n}.c33"), v);
        }
        r.number(&format!("{n}.d33"), m.d33)
            .number(&format!("{n}.p13"), m.p13)
            .number(&format!("{n}.r13"), m.r13)
            .number(&format!("{n}.permittivity_rf"), m.permittivity_rf);
        if let Ok(v) = m.sound_velocity() {
            r.number(&format!("{n}.sound_velocity"), v);
        }
    }
    Ok(r)
}

fn couple(ctx: &Context) -> CliResult<Report> {
    let p = ctx.params()?;
    let c = ctx.couplings(&p)?;
    let port = ctx.config.document.transduction_port()?;
    let mut r = Report::default();
    r.text("material", p.material.name.clone())
        .number("sound_velocity_m_s", p.sound_velocity()?)
        .integer("mode_index", p.mode_index()? as i64)
        .number("acoustic_fsr_hz", hertz(p.acoustic_fsr()?))
        .number("finesse", p.finesse())
        .number("intracavity_photons", c.n_p)
        .number("g_om0_hz", hertz(c.g_om0))
        .number("g_om_hz", hertz(c.g_om))
        .number("g_em_hz", hertz(c.g_em))
        .number("g_eo0_hz", hertz(c.g_eo0))
        .number("g_eo_hz", hertz(c.g_eo))
        .number("g_om_single_pass_hz", hertz(c.g_om_single_pass))
        .number("c_om", c.c_om)
        .number("c_em", c.c_em)
        .number("c_eo", c.c_eo)
        .number("c_sp", c.c_sp)
        .text("transduction_port", port.name())
        .number("eta_opt", p.eta_opt(port))
        .number("eta_mu", p.eta_mu())
        .number("peak_efficiency", closed_form_eta_peak(c.c_om, c.c_em, c.c_eo, p.eta_opt(port), p.eta_mu()));
    Ok(r)
}

fn spectrum(ctx: &Context, kind: Kind, grid: Option<&str>, modes: Option<usize>) -> CliResult<Spectrum> {
    let doc = &ctx.config.document;
    let grid = match grid {
        Some(g) => parse_grid(g)?,
        None => doc.grid()?,
    };
    let p = ctx.params()?;
    let c = ctx.couplings(&p)?;
    let n = modes.unwrap_or(doc.acoustic.modes);
    let port = match kind {
        Kind::Omit => doc.omit_port()?,
        _ => doc.transduction_port()?,
    };
    let model = build(&p, &c, n, port)?;
    let mut s = match kind {
        Kind::Omit => omit_spectrum(&model, &grid)?,
        k => transduction_spectrum(&model, &grid, k.spectrum_kind())?,
    };
    s.metadata.comments.push(format!("optical port = {}", port.name()));
    Ok(s)
}

fn fsr(ctx: &Context, find_match: bool, target_hz: Option<f64>) -> CliResult<Output> {
    let doc = &ctx.config.document;
    let stack = doc.cavity_stack(&ctx.registry)?;
    let band = doc.cavity_band()?;
    if find_match {
        let target = target_hz.map(angular).unwrap_or_else(|| doc.fsr_target());
        let tol = angular(doc.cavity.tolerance_hz);
        let found = match_fsr(&stack, band, target, tol)?;
        let mut r = Report::default();
        r.number("target_hz", hertz(target)).number("tolerance_hz", hertz(tol)).flag("matched", found.is_some());
        if let Some(m) = found {
            r.number("wavelength_nm", m.wavelength * 1e9)
                .number("displacement_m", m.displacement)
                .number("spacing_hz", hertz(m.spacing));
        }
        return Ok(Output::Report(r));
    }
    let mut out = String::from("wavelength_nm,spacing_ghz\n");
    for s in mode_spacings(&stack, band)? {
        out.push_str(&format!("{:?},{:?}\n", s.wavelength * 1e9, hertz(s.spacing) * 1e-9));
    }
    Ok(Output::Csv(out))
}

fn sense(
    ctx: &Context,
    nm: Option<f64>,
    pmu_dbm: Option<f64>,
    bandwidth_hz: Option<f64>,
    convention: Option<&str>,
) -> CliResult<Report> {
    let doc = &ctx.config.document;
    let p = ctx.params()?;
    let c = ctx.couplings(&p)?;
    let n_m = nm.unwrap_or(doc.sensing.driven_phonons);
    let p_mu = pmu_dbm.map(dbm_to_watts).unwrap_or(p.p_mu);
    let bandwidth = bandwidth_hz.unwrap_or(doc.sensing.bandwidth_hz);
    let convention = match convention {
        Some(s) => DisplacementConvention::parse(s)?,
        None => doc.convention()?,
    };
    let g_em = extract_gem(&p, n_m, p_mu)?;
    let occupancy = thermal_occupancy(p.omega_m, p.temperature, c.c_om)?;
    let x = displacement(&p, n_m, convention)?;
    let floor = NoiseFloor { phonons: doc.sensing.floor_phonons, bandwidth: doc.sensing.floor_bandwidth_hz };
    let sens = sensitivity_floor(&p, floor, bandwidth, p_mu, convention)?;
    let mut r = Report::default();
    r.number("microwave_power_w", p_mu)
        .number("microwave_power_dbm", 10.0 * (p_mu / 1e-3).log10())
        .number("driven_phonons", n_m)
        .number("g_em_hz", hertz(g_em))
        .flag("weak_coupling", is_weak_coupling(&p, g_em))
        .number("check_driven_phonons", driven_phonons(&p, g_em, p_mu));
    match extract_d33(&p, g_em, None) {
        Ok(est) => {
            for e in est {
                r.number(&format!("d33_{}_m_per_v", e.distribution.name()), e.d33)
                    .number(&format!("d33_{}_thickness_m", e.distribution.name()), e.t_pz);
            }
        }
        Err(piezobrill_core::Error::FieldAmplitudeRequired) => {
            r.text("d33", "unavailable: microwave.zero_point_field_v_per_m not set");
        }
        Err(e) => return Err(e.into()),
    }
    r.number("thermal_bath_occupancy", occupancy.bath)
        .number("thermal_effective_occupancy", occupancy.effective)
        .number("c_om", c.c_om)
        .number("zero_point_displacement_m", zero_point_displacement(&p)?)
        .text("convention", convention.name())
        .number("displacement_m", x.meters)
        .number("floor_phonons", floor.phonons)
        .number("floor_bandwidth_hz", floor.bandwidth)
        .number("bandwidth_hz", sens.bandwidth)
        .number("displacement_density_m_per_rthz", sens.displacement_density)
        .number("floor_g_em_hz", hertz(sens.g_em));
    for e in &sens.d33 {
        r.number(&format!("floor_d33_{}_m_per_v", e.distribution.name()), e.d33);
    }
    Ok(r)
}

fn ledger(ctx: &Context, flag: Option<&Path>) -> CliResult<ImprovementLedger> {
    let path = flag.map(Path::to_path_buf).or_else(|| ctx.config.document.design.ledger.as_ref().map(PathBuf::from));
    match path {
        Some(p) => Ok(ImprovementLedger::from_table(&read(&p)?)?),
        None => Ok(ImprovementLedger::builtin()),
    }
}

fn design(ctx: &Context, action: &DesignAction) -> CliResult<Report> {
    let mut r = Report::default();
    match action {
        DesignAction::List { ledger: path } => {
            let l = ledger(ctx, path.as_deref())?;
            r.number("baseline.g_em_hz", hertz(l.baseline.g_em))
                .number("baseline.c_em", l.baseline.c_em)
                .number("baseline.c_om", l.baseline.c_om)
                .number("baseline.eta_opt", l.baseline.eta_opt)
                .number("baseline.eta_mu", l.baseline.eta_mu);
            for e in &l.entries {
                r.text(&format!("{}.description", e.label), e.description.clone())
                    .number(&format!("{}.g_em_factor", e.label), e.g_factor())
                    .number(&format!("{}.c_em_factor", e.label), e.c_factor());
            }
        }
        DesignAction::Project { select, c_om, ledger: path } => {
            let l = ledger(ctx, path.as_deref())?;
            let labels: Vec<&str> = if select.is_empty() {
                ctx.config.document.design.select.iter().map(String::as_str).collect()
            } else {
                select.iter().map(String::as_str).collect()
            };
            let choice = match c_om.as_deref() {
                None => ctx.config.document.cooperativity_choice()?,
                Some("baseline") => CooperativityChoice::Baseline,
                Some("matched") => CooperativityChoice::Matched,
                Some(v) => CooperativityChoice::Fixed(v.parse().map_err(|_| {
                    CliError::Usage(format!("--c-om {v:?}: expected baseline, matched or a number"))
                })?),
            };
            let pr = project(&l, &labels, choice)?;
            r.list("selection", pr.labels.clone())
                .number("g_em_factor", pr.g_em_factor)
                .number("c_em_factor", pr.c_em_factor)
                .number("g_em_hz", hertz(pr.g_em))
                .number("c_em", pr.c_em)
                .number("c_om", pr.c_om)
                .number("eta_opt", pr.eta_opt)
                .number("eta_mu", pr.eta_mu)
                .number("eta", pr.eta);
        }
    }
    Ok(r)
}

fn load_spectrum(path: &Path, kind: SpectrumKind) -> CliResult<Spectrum> {
    let text = read(path)?;
    let s = if is_json_path(path) {
        let v: Value = serde_json::from_str(&text).map_err(|e| CliError::Format(format!("{}: {e}", path.display())))?;
        spectrum_from_json(&v)?
    } else {
        spectrum_from_csv(&text, Some(kind)).map_err(|e| CliError::Format(format!("{}: {e}", path.display())))?
    };
    if s.kind != kind {
        return Err(CliError::Usage(format!(
            "{} holds a {} spectrum, not {}",
            path.display(),
            s.kind.name(),
            kind.name()
        )));
    }
    Ok(s)
}

/// `name=value` pairs; rates in Hz are converted to rad/s.
fn parse_assignments(items: &[String], flag: &str) -> CliResult<Vec<(FitParam, String)>> {
    items
        .iter()
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            let (k, v) = s
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("{flag} {s:?}: expected name=value")))?;
            Ok((FitParam::parse(k)?, v.trim().to_string()))
        })
        .collect()
}

fn to_internal(p: FitParam, v: f64) -> f64 {
    if p.is_rate() {
        angular(v)
    } else {
        v
    }
}

fn to_user(p: FitParam, v: f64) -> f64 {
    if p.is_rate() {
        hertz(v)
    } else {
        v
    }
}

struct FitSetup {
    model: ModelState,
    free: Vec<FreeParameter>,
    residuals: Option<ResidualSpace>,
    window: Window,
}

fn fit_setup(
    ctx: &Context,
    kind: Kind,
    free: &[String],
    init: &[String],
    bounds: &[String],
    window: Option<&str>,
    residuals: Option<Residuals>,
) -> CliResult<FitSetup> {
    let doc = &ctx.config.document;
    let p = ctx.params()?;
    let c = ctx.couplings(&p)?;
    let port = match kind {
        Kind::Omit => doc.omit_port()?,
        _ => doc.transduction_port()?,
    };
    let mut model = ModelState::new(LinearParams::from_system(&p, &c, port));
    for (param, v) in parse_assignments(init, "--init")? {
        let v: f64 = v.parse().map_err(|_| CliError::Usage(format!("--init {}: bad number {v:?}", param.name())))?;
        model.set(param, to_internal(param, v));
    }
    let mut params: Vec<FreeParameter> = Vec::new();
    for name in free.iter().filter(|s| !s.trim().is_empty()) {
        let param = FitParam::parse(name)?;
        params.push(FreeParameter::new(param, model.get(param)));
    }
    for (param, v) in parse_assignments(bounds, "--bounds")? {
        let (lo, hi) = v
            .split_once(':')
            .and_then(|(a, b)| Some((a.trim().parse::<f64>().ok()?, b.trim().parse::<f64>().ok()?)))
            .ok_or_else(|| CliError::Usage(format!("--bounds {}: expected lower:upper", param.name())))?;
        let slot = params
            .iter_mut()
            .find(|f| f.param == param)
            .ok_or_else(|| CliError::Usage(format!("--bounds {}: not a free parameter", param.name())))?;
        slot.lower = to_internal(param, lo);
        slot.upper = to_internal(param, hi);
    }
    let window = match window {
        None => Window::Default,
        Some("full") => Window::Full,
        Some(w) => {
            let (a, b) = parse_range(w, "--window")?;
            Window::Range(a, b)
        }
    };
    let residuals = residuals.map(|r| match r {
        Residuals::Linear => ResidualSpace::Linear,
        Residuals::Log => ResidualSpace::LogPower,
    });
    Ok(FitSetup { model, free: params, residuals, window })
}

fn problem(setup: &FitSetup, data: Spectrum) -> FitProblem {
    let mut pr = FitProblem::new(data, setup.model, setup.free.clone());
    if let Some(r) = setup.residuals {
        pr.residual_space = r;
    }
    pr.window = setup.window;
    pr
}

/// Fit report with rates in Hz.
pub fn fit_report_json(rep: &FitReport, kind: SpectrumKind, space: ResidualSpace) -> Value {
    let params: Vec<Value> = rep
        .params
        .iter()
        .zip(&rep.uncertainties)
        .map(|((p, v), s)| {
            json!({
                "name": p.name(),
                "unit": if p.is_rate() { "Hz" } else { "1" },
                "value": to_user(*p, *v),
                "sigma": to_user(*p, *s),
            })
        })
        .collect();
    let n = rep.params.len();
    let scale: Vec<f64> = rep.params.iter().map(|(p, _)| if p.is_rate() { TAU } else { 1.0 }).collect();
    let cov: Vec<Vec<f64>> =
        (0..n).map(|i| (0..n).map(|j| rep.covariance[i * n + j] / (scale[i] * scale[j])).collect()).collect();
    let m = &rep.model.linear;
    let (c_om, c_em, c_eo) = m.cooperativities();
    json!({
        "kind": kind.name(),
        "residual_space": match space { ResidualSpace::Linear => "linear", ResidualSpace::LogPower => "log_power" },
        "converged": rep.converged,
        "stop_reason": format!("{:?}", rep.stop_reason).to_lowercase(),
        "iterations": rep.iterations,
        "points": rep.points,
        "residual_norm": rep.residual_norm,
        "condition_number": rep.condition_number,
        "params": params,
        "covariance": cov,
        "cooperativities": {"c_om": c_om, "c_em": c_em, "c_eo": c_eo},
        "history": rep.history,
    })
}

#[allow(clippy::too_many_arguments)]
fn fit_command(
    ctx: &Context,
    kind: Kind,
    data: &[PathBuf],
    free: &[String],
    init: &[String],
    bounds: &[String],
    window: Option<&str>,
    residuals: Option<Residuals>,
    pump_w: &[f64],
) -> CliResult<Value> {
    let setup = fit_setup(ctx, kind, free, init, bounds, window, residuals)?;
    let sk = kind.spectrum_kind();
    if data.len() == 1 && pump_w.is_empty() {
        let pr = problem(&setup, load_spectrum(&data[0], sk)?);
        let rep = fit(&pr)?;
        return Ok(fit_report_json(&rep, sk, pr.residual_space));
    }
    if pump_w.len() != data.len() {
        return Err(CliError::Usage(format!(
            "a power series needs one --pump-w value per --data file ({} vs {})",
            pump_w.len(),
            data.len()
        )));
    }
    let series = data
        .iter()
        .zip(pump_w)
        .map(|(d, w)| Ok((*w, problem(&setup, load_spectrum(d, sk)?))))
        .collect::<CliResult<Vec<_>>>()?;
    let out = cooperativity_vs_power(&series)?;
    let fits: Vec<Value> = out
        .reports
        .iter()
        .zip(&series)
        .map(|(r, (_, pr))| fit_report_json(r, sk, pr.residual_space))
        .collect();
    Ok(json!({
        "pump_power_w": out.powers,
        "c_om": out.c_om,
        "slope_per_w": out.slope,
        "r_squared": out.r_squared,
        "fits": fits,
    }))
}

fn execute(cli: &Cli, ctx: &Context) -> CliResult<(Output, Vec<String>)> {
    let mut warnings = ctx.config.warnings.clone();
    warnings.extend(ctx.registry.warnings().iter().cloned());
    let out = match &cli.command {
        Command::Materials => Output::Report(materials(ctx)?),
        Command::Couple => Output::Report(couple(ctx)?),
        Command::Spectrum { kind, grid, db, modes } => {
            let s = spectrum(ctx, *kind, grid.as_deref(), *modes)?;
            warnings.extend(s.metadata.warnings.iter().cloned());
            let as_json = cli.common.json || cli.common.out.as_deref().is_some_and(is_json_path);
            if as_json {
                Output::Json(spectrum_to_json(&s, *db))
            } else {
                Output::Csv(spectrum_to_csv(&s, *db))
            }
        }
        Command::Fsr { find_match, target_hz } => fsr(ctx, *find_match, *target_hz)?,
        Command::Sense { nm, pmu_dbm, bandwidth_hz, convention } => {
            Output::Report(sense(ctx, *nm, *pmu_dbm, *bandwidth_hz, convention.as_deref())?)
        }
        Command::Design { action } => Output::Report(design(ctx, action)?),
        Command::Fit { kind, data, free, init, bounds, window, residuals, pump_w } => Output::Json(fit_command(
            ctx,
            *kind,
            data,
            free,
            init,
            bounds,
            window.as_deref(),
            *residuals,
            pump_w,
        )?),
    };
    Ok((out, warnings))
}

fn render(out: Output, json_requested: bool) -> String {
    match out {
        Output::Report(r) if json_requested => json_text(&r.to_json()),
        Output::Report(r) => r.to_text(),
        Output::Json(v) => json_text(&v),
        Output::Csv(s) => s,
    }
}

/// Parses `argv` and runs one command, writing results to `stdout` (or
/// `--out`) and diagnostics to `stderr`. Returns the process exit code.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { write!(stdout, "{text}") } else { write!(stderr, "{text}") };
            return code;
        }
    };
    let args: Vec<String> = argv.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    match run_parsed(&cli, args, stdout, stderr) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

fn run_parsed(cli: &Cli, argv: Vec<String>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult<()> {
    let config = load_config(cli.common.config.as_deref(), cli.common.lax)?;
    let mut registry = MaterialRegistry::builtin();
    if let Some(path) = &cli.common.materials {
        let extra = MaterialRegistry::from_table(&read(path)?)?;
        for m in extra.iter() {
            registry.insert(m.clone())?;
        }
    }
    let ctx = Context { config, registry, argv };
    let (out, warnings) = execute(cli, &ctx)?;
    for w in &warnings {
        let _ = writeln!(stderr, "warning: {w}");
    }
    let json_requested = cli.common.json || cli.common.out.as_deref().is_some_and(is_json_path);
    let text = render(out, json_requested);
    match &cli.common.out {
        None => stdout.write_all(text.as_bytes()).map_err(|e| CliError::io("<stdout>", e))?,
        Some(path) => {
            std::fs::write(path, &text).map_err(|e| CliError::io(path, e))?;
            let side = sidecar_path(path);
            std::fs::write(&side, json_text(&ctx.sidecar(path, &warnings))).map_err(|e| CliError::io(&side, e))?;
        }
    }
    Ok(())
}
