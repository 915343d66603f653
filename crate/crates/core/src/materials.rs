//! Crystal constants and the material registry.

use crate::error::{Error, Result};
use crate::prelude::*;
use crate::table::{self, Record};

/// Shipped material table.
pub const BUILTIN_TABLE: &str = include_str!("../data/materials.dat");

/// Scalar material constants along the acoustic axis. SI units.
#[derive(Debug, Clone, PartialEq)]
pub struct MaterialProps {
    pub name: String,
    pub refractive_index: f64,
    /// kg/m^3
    pub density: Option<f64>,
    /// Pa
    pub c33: Option<f64>,
    /// m/V
    pub d33: f64,
    pub p13: f64,
    /// m/V
    pub r13: f64,
    pub permittivity_rf: f64,
    /// m/s; derived from stiffness and density when absent.
    pub sound_velocity: Option<f64>,
}

/// Relative mismatch above which an explicit velocity is flagged.
pub const VELOCITY_MISMATCH_WARN: f64 = 0.25;

impl MaterialProps {
    /// Checks the invariants. Returns advisory warnings on success.
    pub fn validate(&self) -> Result<Vec<String>> {
        let bad = |reason: String| Error::InvalidMaterial { name: self.name.clone(), reason };
        if self.name.trim().is_empty() {
            return Err(bad("empty name".into()));
        }
        if !(self.refractive_index >= 1.0 && self.refractive_index.is_finite()) {
            return Err(bad(format!("refractive index must be >= 1, got {}", self.refractive_index)));
        }
        if let Some(rho) = self.density {
            if !(rho > 0.0 && rho.is_finite()) {
                return Err(bad(format!("density must be > 0, got {rho}")));
            }
        }
        if let Some(c33) = self.c33 {
            if !(c33 > 0.0 && c33.is_finite()) {
                return Err(bad(format!("c33 must be > 0, got {c33}")));
            }
        }
        if let Some(v) = self.sound_velocity {
            if !(v > 0.0 && v.is_finite()) {
                return Err(bad(format!("sound velocity must be > 0, got {v}")));
            }
        }
        if !(self.permittivity_rf >= 1.0 && self.permittivity_rf.is_finite()) {
            return Err(bad(format!("rf permittivity must be >= 1, got {}", self.permittivity_rf)));
        }
        for (label, v) in [("d33", self.d33), ("p13", self.p13), ("r13", self.r13)] {
            if !v.is_finite() {
                return Err(bad(format!("{label} must be finite, got {v}")));
            }
        }
        let mut warnings = Vec::new();
        if let (Some(v), Some(c33), Some(rho)) = (self.sound_velocity, self.c33, self.density) {
            let derived = (c33 / rho).sqrt();
            let mismatch = (v - derived).abs() / v;
            if mismatch >= VELOCITY_MISMATCH_WARN {
                warnings.push(format!(
                    "{}: sound velocity {v} m/s differs from sqrt(c33/rho) = {derived:.1} m/s by {:.0}%",
                    self.name,
                    100.0 * mismatch
                ));
            }
        }
        Ok(warnings)
    }

    pub fn sound_velocity(&self) -> Result<f64> {
        sound_velocity(self)
    }

    /// Optical relative permittivity n^2.
    pub fn optical_permittivity(&self) -> f64 {
        self.refractive_index * self.refractive_index
    }

    fn from_record(rec: &Record) -> Result<Self> {
        rec.check_keys(&["n", "rho", "c33", "d33", "p13", "r13", "eps_r", "v"])?;
        let required = |key: &str| -> Result<f64> {
            rec.number(key)?.ok_or_else(|| Error::Parse {
                line: rec.line,
                reason: format!("[{}] is missing {key}", rec.name),
            })
        };
        let m = MaterialProps {
            name: rec.name.clone(),
            refractive_index: required("n")?,
            density: rec.number("rho")?,
            c33: rec.number("c33")?,
            d33: rec.number("d33")?.unwrap_or(0.0),
            p13: rec.number("p13")?.unwrap_or(0.0),
            r13: rec.number("r13")?.unwrap_or(0.0),
            permittivity_rf: rec.number("eps_r")?.unwrap_or(1.0),
            sound_velocity: rec.number("v")?,
        };
        m.validate()?;
        Ok(m)
    }
}

/// Explicit velocity if set, else sqrt(c33/rho).
pub fn sound_velocity(m: &MaterialProps) -> Result<f64> {
    if let Some(v) = m.sound_velocity {
        return Ok(v);
    }
    match (m.c33, m.density) {
        (Some(c33), Some(rho)) if c33 > 0.0 && rho > 0.0 => Ok((c33 / rho).sqrt()),
        _ => Err(Error::InsufficientAcousticData(m.name.clone())),
    }
}

/// Name-keyed set of materials. Lookup ignores ASCII case.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MaterialRegistry {
    materials: Vec<MaterialProps>,
    warnings: Vec<String>,
}

impl MaterialRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registry loaded from the shipped table.
    pub fn builtin() -> Self {
        Self::from_table(BUILTIN_TABLE).expect("shipped material table is valid")
    }

    pub fn from_table(text: &str) -> Result<Self> {
        let mut reg = Self::new();
        for rec in table::parse(text)? {
            reg.insert(MaterialProps::from_record(&rec)?)?;
        }
        Ok(reg)
    }

    /// Adds or replaces a material after validating it.
    pub fn insert(&mut self, m: MaterialProps) -> Result<()> {
        let warnings = m.validate()?;
        self.warnings.extend(warnings);
        match self.materials.iter_mut().find(|x| x.name.eq_ignore_ascii_case(&m.name)) {
            Some(slot) => *slot = m,
            None => self.materials.push(m),
        }
        Ok(())
    }

    pub fn lookup(&self, name: &str) -> Result<&MaterialProps> {
        self.materials
            .iter()
            .find(|m| m.name.eq_ignore_ascii_case(name.trim()))
            .ok_or_else(|| Error::MaterialNotFound {
                name: name.to_string(),
                registered: self.names().map(String::from).collect(),
            })
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.materials.iter().map(|m| m.name.as_str())
    }

    pub fn iter(&self) -> impl Iterator<Item = &MaterialProps> {
        self.materials.iter()
    }

    /// Warnings raised while loading, such as velocity mismatches.
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn builtin_quartz_and_lithium_niobate() {
        let reg = MaterialRegistry::builtin();
        let q = reg.lookup("quartz_xcut").unwrap();
        assert_eq!(q.d33, 2.3e-12);
        assert_eq!(q.c33, Some(86.6e9));
        assert_eq!(q.density, Some(2650.0));
        let l = reg.lookup("linbo3_zcut").unwrap();
        assert_eq!(l.d33, 16.2e-12);
        assert_eq!(l.c33, Some(244e9));
        assert_eq!(l.density, Some(4630.0));
    }

    #[test]
    fn vacuum_is_identity_medium() {
        let reg = MaterialRegistry::builtin();
        let v = reg.lookup("vacuum").unwrap();
        assert_eq!(v.refractive_index, 1.0);
        assert_eq!(v.d33, 0.0);
        assert_eq!(v.r13, 0.0);
        assert!(matches!(sound_velocity(v), Err(Error::InsufficientAcousticData(_))));
    }

    #[test]
    fn lookup_is_case_insensitive_and_lists_names_on_miss() {
        let reg = MaterialRegistry::builtin();
        assert_eq!(reg.lookup("Quartz_XCut").unwrap().name, "quartz_xcut");
        match reg.lookup("unobtainium") {
            Err(Error::MaterialNotFound { registered, .. }) => {
                assert!(registered.iter().any(|n| n == "caf2"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn quartz_velocity_from_stiffness() {
        let reg = MaterialRegistry::builtin();
        let v = sound_velocity(reg.lookup("quartz_xcut").unwrap()).unwrap();
        assert!((v - 5716.0).abs() < 1.0, "{v}");
    }

    #[test]
    fn caf2_velocity_from_brillouin_inversion() {
        // Omega_B = 2 n v / lambda  =>  v = f_B lambda / (2 n)
        let v = 13.354e9 * 1546.4e-9 / (2.0 * 1.43);
        assert!(rel(v, 7221.0) < 1e-3, "{v}");
    }

    #[test]
    fn explicit_velocity_passes_through() {
        let mut m = MaterialRegistry::builtin().lookup("quartz_xcut").unwrap().clone();
        m.sound_velocity = Some(5000.0);
        assert_eq!(sound_velocity(&m).unwrap(), 5000.0);
        // 12.5% off the derived value: no warning
        assert!(m.validate().unwrap().is_empty());
        m.sound_velocity = Some(3000.0);
        assert_eq!(m.validate().unwrap().len(), 1);
    }

    #[test]
    fn quadrupled_stiffness_doubles_velocity() {
        let mut m = MaterialRegistry::builtin().lookup("caf2").unwrap().clone();
        let v = sound_velocity(&m).unwrap();
        m.c33 = m.c33.map(|c| 4.0 * c);
        assert!(rel(sound_velocity(&m).unwrap(), 2.0 * v) < 1e-15);
    }

    #[test]
    fn invalid_values_rejected_not_clamped() {
        let base = MaterialRegistry::builtin().lookup("quartz_xcut").unwrap().clone();
        let mut m = base.clone();
        m.refractive_index = 0.9;
        assert!(m.validate().is_err());
        let mut m = base.clone();
        m.density = Some(-1.0);
        assert!(m.validate().is_err());
        let mut m = base.clone();
        m.permittivity_rf = 0.5;
        assert!(m.validate().is_err());
        let mut reg = MaterialRegistry::new();
        assert!(reg.insert(m).is_err());
        assert!(MaterialRegistry::from_table("[x]\nn = 1.5\nrho = 0\n").is_err());
    }

    #[test]
    fn variants_and_overrides() {
        let mut reg = MaterialRegistry::builtin();
        let mut cold = reg.lookup("quartz_xcut").unwrap().clone();
        cold.name = "quartz_xcut@4K".into();
        cold.d33 *= 0.5;
        reg.insert(cold).unwrap();
        assert_eq!(reg.lookup("QUARTZ_XCUT@4k").unwrap().d33, 1.15e-12);
        assert_eq!(reg.lookup("quartz_xcut").unwrap().d33, 2.3e-12);
    }

    #[test]
    fn unknown_key_in_table_rejected() {
        assert!(MaterialRegistry::from_table("[x]\nn = 1.5\nbogus = 1\n").is_err());
    }
}
