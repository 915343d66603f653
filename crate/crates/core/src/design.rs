//! Projection of upgrade factors onto a baseline transducer.

use crate::constants::TAU;
use crate::error::{require_positive, Error, Result};
use crate::prelude::*;
use crate::statespace::closed_form_eta_peak;
use crate::table::{self, Record};

/// Shipped ledger mirroring the published improvement table.
pub const BUILTIN_LEDGER: &str = include_str!("../data/improvements.dat");

/// Allowed mismatch between c_em_factor and g_em_factor^2 on g_em-only
/// entries; published factors are rounded.
pub const SQUARE_LAW_TOLERANCE: f64 = 0.15;

#[derive(Debug, Clone, PartialEq)]
pub struct Baseline {
    /// rad/s
    pub g_em: f64,
    pub c_em: f64,
    pub c_om: f64,
    pub c_eo: f64,
    pub eta_opt: f64,
    pub eta_mu: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImprovementEntry {
    pub label: String,
    pub description: String,
    pub g_em_factor: Option<f64>,
    pub c_em_factor: Option<f64>,
    pub eta_opt_target: Option<f64>,
    pub eta_mu_target: Option<f64>,
    pub gem_only: bool,
}

impl ImprovementEntry {
    /// Factor on g_em; unchanged when the entry only lists C_em.
    pub fn g_factor(&self) -> f64 {
        self.g_em_factor.unwrap_or(1.0)
    }

    /// Factor on C_em; g^2 when the entry only lists g_em.
    pub fn c_factor(&self) -> f64 {
        match (self.c_em_factor, self.g_em_factor) {
            (Some(c), _) => c,
            (None, Some(g)) => g * g,
            (None, None) => 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let name = |k: &str| format!("{}.{k}", self.label);
        for (k, v) in [("g_em_factor", self.g_em_factor), ("c_em_factor", self.c_em_factor)] {
            if let Some(v) = v {
                require_positive(&name(k), v)?;
            }
        }
        for (k, v) in [("eta_opt_target", self.eta_opt_target), ("eta_mu_target", self.eta_mu_target)] {
            if let Some(v) = v {
                if !(v > 0.0 && v <= 1.0) {
                    return Err(Error::param(&name(k), format!("must lie in (0, 1], got {v}")));
                }
            }
        }
        if self.gem_only {
            if let (Some(g), Some(c)) = (self.g_em_factor, self.c_em_factor) {
                if ((c - g * g) / (g * g)).abs() > SQUARE_LAW_TOLERANCE {
                    return Err(Error::param(
                        &name("c_em_factor"),
                        format!("{c} is not g_em_factor^2 = {}", g * g),
                    ));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImprovementLedger {
    pub baseline: Baseline,
    pub entries: Vec<ImprovementEntry>,
}

/// Which optomechanical cooperativity the projected efficiency uses.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum CooperativityChoice {
    #[default]
    Baseline,
    /// C_om = projected C_em.
    Matched,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub labels: Vec<String>,
    pub g_em_factor: f64,
    pub c_em_factor: f64,
    /// rad/s
    pub g_em: f64,
    pub c_em: f64,
    pub c_om: f64,
    pub eta_opt: f64,
    pub eta_mu: f64,
    pub eta: f64,
}

fn baseline_from(rec: &Record) -> Result<Baseline> {
    rec.check_keys(&["g_em_hz", "c_em", "c_om", "c_eo", "eta_opt", "eta_mu"])?;
    let need = |k: &str| -> Result<f64> {
        rec.number(k)?.ok_or_else(|| Error::Parse { line: rec.line, reason: format!("[baseline] is missing {k}") })
    };
    Ok(Baseline {
        g_em: TAU * need("g_em_hz")?,
        c_em: need("c_em")?,
        c_om: need("c_om")?,
        c_eo: rec.number("c_eo")?.unwrap_or(0.0),
        eta_opt: need("eta_opt")?,
        eta_mu: need("eta_mu")?,
    })
}

fn entry_from(rec: &Record) -> Result<ImprovementEntry> {
    rec.check_keys(&["description", "g_em_factor", "c_em_factor", "eta_opt_target", "eta_mu_target", "gem_only"])?;
    let e = ImprovementEntry {
        label: rec.name.clone(),
        description: rec.text("description").unwrap_or_default().to_string(),
        g_em_factor: rec.number("g_em_factor")?,
        c_em_factor: rec.number("c_em_factor")?,
        eta_opt_target: rec.number("eta_opt_target")?,
        eta_mu_target: rec.number("eta_mu_target")?,
        gem_only: rec.flag("gem_only")?,
    };
    e.validate()?;
    Ok(e)
}

impl ImprovementLedger {
    pub fn builtin() -> Self {
        Self::from_table(BUILTIN_LEDGER).expect("shipped ledger is valid")
    }

    pub fn from_table(text: &str) -> Result<Self> {
        let records = table::parse(text)?;
        let mut baseline = None;
        let mut entries = Vec::new();
        for rec in &records {
            if rec.name == "baseline" {
                baseline = Some(baseline_from(rec)?);
            } else {
                entries.push(entry_from(rec)?);
            }
        }
        let baseline = baseline.ok_or(Error::Parse { line: 1, reason: "ledger has no [baseline] record".into() })?;
        let ledger = ImprovementLedger { baseline, entries };
        ledger.validate()?;
        Ok(ledger)
    }

    pub fn validate(&self) -> Result<()> {
        let b = &self.baseline;
        require_positive("baseline g_em", b.g_em)?;
        require_positive("baseline c_em", b.c_em)?;
        for (k, v) in [("baseline eta_opt", b.eta_opt), ("baseline eta_mu", b.eta_mu)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::param(k, format!("must lie in [0, 1], got {v}")));
            }
        }
        for e in &self.entries {
            e.validate()?;
        }
        Ok(())
    }

    pub fn entry(&self, label: &str) -> Option<&ImprovementEntry> {
        self.entries.iter().find(|e| e.label == label)
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.label.as_str())
    }
}

/// Applies the selected entries to the baseline.
pub fn project(ledger: &ImprovementLedger, selection: &[&str], c_om: CooperativityChoice) -> Result<Projection> {
    let mut chosen: Vec<&ImprovementEntry> = Vec::new();
    for label in selection {
        let e = ledger.entry(label).ok_or_else(|| Error::UnknownEntry(label.to_string()))?;
        if chosen.iter().any(|c| c.label == e.label) {
            return Err(Error::DuplicateSelection(label.to_string()));
        }
        chosen.push(e);
    }
    let b = &ledger.baseline;
    let g_em_factor: f64 = chosen.iter().map(|e| e.g_factor()).product();
    let c_em_factor: f64 = chosen.iter().map(|e| e.c_factor()).product();
    let best = |f: fn(&ImprovementEntry) -> Option<f64>, base: f64| {
        chosen.iter().filter_map(|e| f(e)).fold(base, f64::max)
    };
    let eta_opt = best(|e| e.eta_opt_target, b.eta_opt);
    let eta_mu = best(|e| e.eta_mu_target, b.eta_mu);
    let c_em = b.c_em * c_em_factor;
    let c_om = match c_om {
        CooperativityChoice::Baseline => b.c_om,
        CooperativityChoice::Matched => c_em,
        CooperativityChoice::Fixed(x) => require_positive("c_om", x)?,
    };
    Ok(Projection {
        labels: chosen.iter().map(|e| e.label.clone()).collect(),
        g_em_factor,
        c_em_factor,
        g_em: b.g_em * g_em_factor,
        c_em,
        c_om,
        eta_opt,
        eta_mu,
        eta: closed_form_eta_peak(c_om, c_em, b.c_eo, eta_opt, eta_mu),
    })
}
