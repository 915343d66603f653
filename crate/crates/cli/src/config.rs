//! TOML configuration document. Every frequency and rate is given in Hz and
//! converted to rad/s when a model is built.
//!
//! A missing section takes the values of the quartz transducer operating
//! point. Inside a section that is present, missing required keys take the
//! same defaults while optional keys stay unset, so a `[material]` table
//! selects a material without inheriting the quartz velocity override.

use crate::error::{CliError, CliResult};
use piezobrill_core::cavity::{CavityStack, Segment, DEFAULT_REFLECTIVITY};
use piezobrill_core::constants::{angular, omega_from_wavelength};
use piezobrill_core::couplings::{OpticalPort, PiezoDistribution, SystemParams};
use piezobrill_core::design::CooperativityChoice;
use piezobrill_core::materials::{MaterialProps, MaterialRegistry};
use piezobrill_core::sensing::DisplacementConvention;
use piezobrill_core::spectrum::Grid;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use toml::{Table, Value};

/// Environment variable naming a directory searched for named configs.
pub const CONFIG_DIR_ENV: &str = "PIEZOBRILL_CONFIG_DIR";

/// Configs compiled into the binary, by name.
pub const SHIPPED: [(&str, &str); 2] = [
    ("quartz_experiment", include_str!("../configs/quartz_experiment.toml")),
    ("caf2_experiment", include_str!("../configs/caf2_experiment.toml")),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaterialSection {
    #[serde(default = "default_material_name")]
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refractive_index: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c33: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d33: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p13: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r13: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub permittivity_rf: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sound_velocity: Option<f64>,
}

fn default_material_name() -> String {
    "quartz_xcut".into()
}

impl Default for MaterialSection {
    fn default() -> Self {
        MaterialSection {
            name: default_material_name(),
            refractive_index: None,
            density: None,
            c33: None,
            d33: None,
            p13: None,
            r13: None,
            permittivity_rf: None,
            sound_velocity: Some(5714.43),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeometrySection {
    pub substrate_thickness_m: f64,
    pub cavity_length_m: f64,
    pub optical_waist_m: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub acoustic_area_m2: Option<f64>,
    pub pump_wavelength_nm: f64,
    /// Defaults to the substrate thickness.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub piezo_thickness_m: Option<f64>,
    pub piezo_distribution: String,
}

impl Default for GeometrySection {
    fn default() -> Self {
        GeometrySection {
            substrate_thickness_m: 0.5e-3,
            cavity_length_m: 11.5e-3,
            optical_waist_m: 50e-6,
            acoustic_area_m2: None,
            pump_wavelength_nm: 1546.4,
            piezo_thickness_m: None,
            piezo_distribution: "bulk".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OpticalSection {
    pub kappa_hz: f64,
    pub kappa_c1_hz: f64,
    pub kappa_c2_hz: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa_i_hz: Option<f64>,
    pub detuning_hz: f64,
    /// Port probed by OMIT spectra.
    pub omit_port: String,
    /// Port carrying the transduced signal.
    pub transduction_port: String,
}

impl Default for OpticalSection {
    fn default() -> Self {
        OpticalSection {
            kappa_hz: 2.2e6,
            kappa_c1_hz: 0.7e6,
            kappa_c2_hz: 1.2e6,
            kappa_i_hz: Some(0.3e6),
            detuning_hz: 11.366e9,
            omit_port: "port1".into(),
            transduction_port: "port2".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MicrowaveSection {
    pub frequency_hz: f64,
    pub kappa_hz: f64,
    pub kappa_c_hz: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa_i_hz: Option<f64>,
    /// Field at the substrate for one microwave quantum, V/m.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zero_point_field_v_per_m: Option<f64>,
}

impl Default for MicrowaveSection {
    fn default() -> Self {
        MicrowaveSection {
            frequency_hz: 11.366e9,
            kappa_hz: 17.1e6,
            kappa_c_hz: 7.33e6,
            kappa_i_hz: None,
            zero_point_field_v_per_m: Some(2.0 * 0.80e-3 / std::f64::consts::SQRT_2),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AcousticSection {
    pub frequency_hz: f64,
    pub linewidth_hz: f64,
    /// Odd number of ladder modes in spectra.
    pub modes: usize,
}

impl Default for AcousticSection {
    fn default() -> Self {
        AcousticSection { frequency_hz: 11.366e9, linewidth_hz: 500e3, modes: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DriveSection {
    pub pump_power_w: f64,
    pub microwave_power_w: f64,
    pub temperature_k: f64,
}

impl Default for DriveSection {
    fn default() -> Self {
        DriveSection { pump_power_w: 23.8e-3, microwave_power_w: 1e-3, temperature_k: 9.0 }
    }
}

/// Measured coupling rates replacing the first-principles values.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CouplingOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_om_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_em_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_eo_hz: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SensingSection {
    /// Driven phonon number to calibrate.
    pub driven_phonons: f64,
    pub floor_phonons: f64,
    pub floor_bandwidth_hz: f64,
    pub bandwidth_hz: f64,
    pub convention: String,
}

impl Default for SensingSection {
    fn default() -> Self {
        SensingSection {
            driven_phonons: 1.2,
            floor_phonons: 0.21,
            floor_bandwidth_hz: 1e3,
            bandwidth_hz: 1e3,
            convention: "rms_pair".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub material: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refractive_index: Option<f64>,
    pub length_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CavitySection {
    pub reflectivity: f64,
    pub piezo_travel_m: f64,
    pub band_start_nm: f64,
    pub band_stop_nm: f64,
    /// Mode-pair matching target; defaults to the acoustic frequency.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_fsr_hz: Option<f64>,
    pub tolerance_hz: f64,
    pub segments: Vec<SegmentSection>,
}

impl Default for CavitySection {
    fn default() -> Self {
        CavitySection {
            reflectivity: DEFAULT_REFLECTIVITY,
            piezo_travel_m: 500e-9,
            band_start_nm: 1545.0,
            band_stop_nm: 1547.5,
            target_fsr_hz: None,
            tolerance_hz: 2e6,
            segments: vec![
                SegmentSection { material: Some("vacuum".into()), refractive_index: None, length_m: 11e-3 },
                SegmentSection { material: Some("quartz_xcut".into()), refractive_index: None, length_m: 0.5e-3 },
            ],
        }
    }
}

/// `"baseline"`, `"matched"`, or a fixed optomechanical cooperativity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CooperativitySetting {
    Value(f64),
    Named(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DesignSection {
    /// Improvement ledger file; the built-in ledger when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ledger: Option<String>,
    pub select: Vec<String>,
    pub c_om: CooperativitySetting,
}

impl Default for DesignSection {
    fn default() -> Self {
        DesignSection { ledger: None, select: Vec::new(), c_om: CooperativitySetting::Named("baseline".into()) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridSection {
    pub start_hz: f64,
    pub stop_hz: f64,
    pub points: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection { start_hz: 11.30e9, stop_hz: 11.45e9, points: 4001 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConfigDocument {
    pub material: MaterialSection,
    pub geometry: GeometrySection,
    pub optical: OpticalSection,
    pub microwave: MicrowaveSection,
    pub acoustic: AcousticSection,
    pub drive: DriveSection,
    pub couplings: CouplingOverrides,
    pub sensing: SensingSection,
    pub cavity: CavitySection,
    pub design: DesignSection,
    pub grid: GridSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    Given,
    Defaulted,
}

/// A parsed document with where each key came from.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedConfig {
    pub document: ConfigDocument,
    /// Dotted key path and origin, for every known key.
    pub provenance: Vec<(String, Origin)>,
    /// Unknown keys under `--lax`.
    pub warnings: Vec<String>,
    /// Path or shipped name the document came from.
    pub source: String,
}

impl LoadedConfig {
    pub fn origin(&self, key: &str) -> Option<Origin> {
        self.provenance.iter().find(|(k, _)| k == key).map(|(_, o)| *o)
    }
}

impl ConfigDocument {
    /// A document with every optional key filled, listing all known keys.
    fn schema() -> Table {
        let mut d = ConfigDocument::default();
        d.material = MaterialSection {
            name: String::new(),
            refractive_index: Some(0.0),
            density: Some(0.0),
            c33: Some(0.0),
            d33: Some(0.0),
            p13: Some(0.0),
            r13: Some(0.0),
            permittivity_rf: Some(0.0),
            sound_velocity: Some(0.0),
        };
        d.geometry.acoustic_area_m2 = Some(0.0);
        d.geometry.piezo_thickness_m = Some(0.0);
        d.optical.kappa_i_hz = Some(0.0);
        d.microwave.kappa_i_hz = Some(0.0);
        d.microwave.zero_point_field_v_per_m = Some(0.0);
        d.couplings = CouplingOverrides { g_om_hz: Some(0.0), g_em_hz: Some(0.0), g_eo_hz: Some(0.0) };
        d.cavity.target_fsr_hz = Some(0.0);
        d.cavity.segments =
            vec![SegmentSection { material: Some(String::new()), refractive_index: Some(0.0), length_m: 0.0 }];
        d.design.ledger = Some(String::new());
        Table::try_from(&d).expect("schema serializes")
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].bytes().filter(|b| *b == b'\n').count() + 1
}

fn unknown_keys(user: &Table, schema: &Table, prefix: &str, out: &mut Vec<String>) {
    for (k, v) in user {
        let path = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        match schema.get(k) {
            None => out.push(path),
            Some(Value::Table(s)) => {
                if let Value::Table(u) = v {
                    unknown_keys(u, s, &path, out);
                }
            }
            Some(Value::Array(s)) => {
                if let (Value::Array(u), Some(Value::Table(first))) = (v, s.first()) {
                    for (i, item) in u.iter().enumerate() {
                        if let Value::Table(t) = item {
                            unknown_keys(t, first, &format!("{path}[{i}]"), out);
                        }
                    }
                }
            }
            Some(_) => {}
        }
    }
}

fn provenance(user: &Table, schema: &Table, prefix: &str, out: &mut Vec<(String, Origin)>) {
    for (k, s) in schema {
        let path = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        match (s, user.get(k)) {
            (Value::Table(st), Some(Value::Table(ut))) => provenance(ut, st, &path, out),
            (Value::Table(st), _) => provenance(&Table::new(), st, &path, out),
            (_, found) => out.push((path, if found.is_some() { Origin::Given } else { Origin::Defaulted })),
        }
    }
}

/// Parses a document. Unknown keys are errors unless `lax`, which turns
/// them into warnings.
pub fn parse_config(text: &str, source: &str, lax: bool) -> CliResult<LoadedConfig> {
    let located = |e: toml::de::Error| {
        let line = e.span().map(|s| line_of(text, s.start)).unwrap_or(0);
        CliError::Config(format!("{source}:{line}: {}", e.message()))
    };
    let user: Table = toml::from_str(text).map_err(located)?;
    let document: ConfigDocument = toml::from_str(text).map_err(located)?;
    let schema = ConfigDocument::schema();
    let mut unknown = Vec::new();
    unknown_keys(&user, &schema, "", &mut unknown);
    let mut warnings = Vec::new();
    if !unknown.is_empty() {
        if !lax {
            return Err(CliError::Config(format!(
                "{source}: unknown key(s): {} (use --lax to ignore)",
                unknown.join(", ")
            )));
        }
        warnings.extend(unknown.iter().map(|k| format!("{source}: ignoring unknown key {k}")));
    }
    let mut prov = Vec::new();
    provenance(&user, &schema, "", &mut prov);
    let loaded = LoadedConfig { document, provenance: prov, warnings, source: source.to_string() };
    loaded.document.check()?;
    Ok(loaded)
}

/// Resolves `--config`: an existing file path, else a named config in the
/// directory given by [`CONFIG_DIR_ENV`], else a shipped config.
pub fn load_config(spec: Option<&str>, lax: bool) -> CliResult<LoadedConfig> {
    let Some(spec) = spec else {
        return parse_config("", "<defaults>", lax);
    };
    let path = Path::new(spec);
    if path.is_file() {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        return parse_config(&text, spec, lax);
    }
    let name = spec.strip_suffix(".toml").unwrap_or(spec);
    if let Some(dir) = std::env::var_os(CONFIG_DIR_ENV) {
        let candidate = PathBuf::from(dir).join(format!("{name}.toml"));
        if candidate.is_file() {
            let text = std::fs::read_to_string(&candidate).map_err(|e| CliError::io(&candidate, e))?;
            return parse_config(&text, &candidate.display().to_string(), lax);
        }
    }
    match SHIPPED.iter().find(|(n, _)| *n == name) {
        Some((n, text)) => parse_config(text, n, lax),
        None => {
            let names: Vec<&str> = SHIPPED.iter().map(|(n, _)| *n).collect();
            Err(CliError::Config(format!(
                "config {spec:?} is neither a file nor a known name ({})",
                names.join(", ")
            )))
        }
    }
}

fn invalid(key: &str, reason: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{key}: {reason}"))
}

impl ConfigDocument {
    /// Document-level invariants, reported by key.
    pub fn check(&self) -> CliResult<()> {
        let rates = [
            ("optical.kappa_hz", Some(self.optical.kappa_hz)),
            ("optical.kappa_c1_hz", Some(self.optical.kappa_c1_hz)),
            ("optical.kappa_c2_hz", Some(self.optical.kappa_c2_hz)),
            ("optical.kappa_i_hz", self.optical.kappa_i_hz),
            ("optical.detuning_hz", Some(self.optical.detuning_hz)),
            ("microwave.frequency_hz", Some(self.microwave.frequency_hz)),
            ("microwave.kappa_hz", Some(self.microwave.kappa_hz)),
            ("microwave.kappa_c_hz", Some(self.microwave.kappa_c_hz)),
            ("microwave.kappa_i_hz", self.microwave.kappa_i_hz),
            ("acoustic.frequency_hz", Some(self.acoustic.frequency_hz)),
            ("acoustic.linewidth_hz", Some(self.acoustic.linewidth_hz)),
            ("couplings.g_om_hz", self.couplings.g_om_hz),
            ("couplings.g_em_hz", self.couplings.g_em_hz),
            ("couplings.g_eo_hz", self.couplings.g_eo_hz),
            ("sensing.floor_bandwidth_hz", Some(self.sensing.floor_bandwidth_hz)),
            ("sensing.bandwidth_hz", Some(self.sensing.bandwidth_hz)),
            ("cavity.target_fsr_hz", self.cavity.target_fsr_hz),
            ("cavity.tolerance_hz", Some(self.cavity.tolerance_hz)),
        ];
        for (key, v) in rates {
            if let Some(v) = v {
                if !(v.is_finite() && v >= 0.0) {
                    return Err(invalid(key, format!("must be a nonnegative rate, got {v}")));
                }
            }
        }
        self.grid()?;
        if self.acoustic.modes == 0 || self.acoustic.modes.is_multiple_of(2) {
            return Err(invalid("acoustic.modes", format!("must be odd, got {}", self.acoustic.modes)));
        }
        for (i, s) in self.cavity.segments.iter().enumerate() {
            if s.material.is_some() == s.refractive_index.is_some() {
                return Err(invalid(
                    &format!("cavity.segments[{i}]"),
                    "give exactly one of material and refractive_index",
                ));
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> CliResult<Grid> {
        let g = &self.grid;
        if g.points < 2 {
            return Err(invalid("grid.points", format!("must be at least 2, got {}", g.points)));
        }
        if !(g.stop_hz > g.start_hz) {
            return Err(invalid("grid.stop_hz", format!("must exceed grid.start_hz ({} <= {})", g.stop_hz, g.start_hz)));
        }
        Ok(Grid::linspace(g.start_hz, g.stop_hz, g.points)?)
    }

    pub fn material(&self, registry: &MaterialRegistry) -> CliResult<MaterialProps> {
        let m = &self.material;
        let mut props = registry.lookup(&m.name)?.clone();
        let set = |slot: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *slot = v;
            }
        };
        set(&mut props.refractive_index, m.refractive_index);
        set(&mut props.d33, m.d33);
        set(&mut props.p13, m.p13);
        set(&mut props.r13, m.r13);
        set(&mut props.permittivity_rf, m.permittivity_rf);
        props.density = m.density.or(props.density);
        props.c33 = m.c33.or(props.c33);
        props.sound_velocity = m.sound_velocity.or(props.sound_velocity);
        props.validate()?;
        Ok(props)
    }

    pub fn system_params(&self, registry: &MaterialRegistry) -> CliResult<SystemParams> {
        let g = &self.geometry;
        let params = SystemParams {
            material: self.material(registry)?,
            l_m: g.substrate_thickness_m,
            l_opt: g.cavity_length_m,
            r_opt: g.optical_waist_m,
            a_m: g.acoustic_area_m2,
            omega_p: omega_from_wavelength(g.pump_wavelength_nm * 1e-9),
            kappa_opt: angular(self.optical.kappa_hz),
            kappa_opt_c1: angular(self.optical.kappa_c1_hz),
            kappa_opt_c2: angular(self.optical.kappa_c2_hz),
            kappa_opt_i: self.optical.kappa_i_hz.map(angular),
            kappa_mu: angular(self.microwave.kappa_hz),
            kappa_mu_c: angular(self.microwave.kappa_c_hz),
            kappa_mu_i: self.microwave.kappa_i_hz.map(angular),
            gamma: angular(self.acoustic.linewidth_hz),
            omega_mu: angular(self.microwave.frequency_hz),
            omega_m: angular(self.acoustic.frequency_hz),
            delta_opt: angular(self.optical.detuning_hz),
            e_sim: self.microwave.zero_point_field_v_per_m,
            t_pz: g.piezo_thickness_m.unwrap_or(g.substrate_thickness_m),
            piezo_distribution: PiezoDistribution::parse(&g.piezo_distribution)
                .map_err(|e| invalid("geometry.piezo_distribution", e))?,
            p_p: self.drive.pump_power_w,
            p_mu: self.drive.microwave_power_w,
            temperature: self.drive.temperature_k,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn omit_port(&self) -> CliResult<OpticalPort> {
        OpticalPort::parse(&self.optical.omit_port).map_err(|e| invalid("optical.omit_port", e))
    }

    pub fn transduction_port(&self) -> CliResult<OpticalPort> {
        OpticalPort::parse(&self.optical.transduction_port).map_err(|e| invalid("optical.transduction_port", e))
    }

    /// Coupling overrides in rad/s.
    pub fn overrides(&self) -> (Option<f64>, Option<f64>, Option<f64>) {
        let c = &self.couplings;
        (c.g_om_hz.map(angular), c.g_em_hz.map(angular), c.g_eo_hz.map(angular))
    }

    pub fn convention(&self) -> CliResult<DisplacementConvention> {
        DisplacementConvention::parse(&self.sensing.convention).map_err(|e| invalid("sensing.convention", e))
    }

    pub fn cavity_stack(&self, registry: &MaterialRegistry) -> CliResult<CavityStack> {
        let mut segments = Vec::new();
        for s in &self.cavity.segments {
            let n = match (&s.material, s.refractive_index) {
                (Some(name), _) => registry.lookup(name)?.refractive_index,
                (None, Some(n)) => n,
                (None, None) => unreachable!("checked when parsed"),
            };
            segments.push(Segment { n, length: s.length_m });
        }
        let stack =
            CavityStack { segments, mirror_reflectivity: self.cavity.reflectivity, piezo_travel: self.cavity.piezo_travel_m };
        stack.validate()?;
        Ok(stack)
    }

    /// Scan band in rad/s, ascending.
    pub fn cavity_band(&self) -> CliResult<(f64, f64)> {
        let (a, b) = (self.cavity.band_start_nm, self.cavity.band_stop_nm);
        if !(a > 0.0 && b > a) {
            return Err(invalid("cavity.band_stop_nm", "band must satisfy 0 < band_start_nm < band_stop_nm"));
        }
        Ok((omega_from_wavelength(b * 1e-9), omega_from_wavelength(a * 1e-9)))
    }

    pub fn fsr_target(&self) -> f64 {
        angular(self.cavity.target_fsr_hz.unwrap_or(self.acoustic.frequency_hz))
    }

    pub fn cooperativity_choice(&self) -> CliResult<CooperativityChoice> {
        match &self.design.c_om {
            CooperativitySetting::Value(v) if *v >= 0.0 => Ok(CooperativityChoice::Fixed(*v)),
            CooperativitySetting::Named(s) if s == "baseline" => Ok(CooperativityChoice::Baseline),
            CooperativitySetting::Named(s) if s == "matched" => Ok(CooperativityChoice::Matched),
            other => Err(invalid("design.c_om", format!("expected \"baseline\", \"matched\" or a number >= 0, got {other:?}"))),
        }
    }
}
