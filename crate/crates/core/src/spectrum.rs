//! Frequency grids and spectra.

use crate::constants::TAU;
use crate::error::{Error, Result};
use crate::prelude::*;
use num_complex::Complex64;

/// Strictly increasing frequency grid in Hz.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    hz: Vec<f64>,
}

impl Grid {
    pub fn new(hz: Vec<f64>) -> Result<Self> {
        if hz.len() < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2 points, got {}", hz.len())));
        }
        if hz.iter().any(|f| !f.is_finite()) {
            return Err(Error::InvalidGrid("non-finite frequency".into()));
        }
        if hz.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid("frequencies must be strictly increasing".into()));
        }
        Ok(Grid { hz })
    }

    /// `points` evenly spaced values from `start` to `stop` inclusive.
    pub fn linspace(start: f64, stop: f64, points: usize) -> Result<Self> {
        if points < 2 {
            return Err(Error::InvalidGrid(format!("points must be >= 2, got {points}")));
        }
        if !(stop > start) {
            return Err(Error::InvalidGrid(format!("stop {stop} must exceed start {start}")));
        }
        let step = (stop - start) / (points - 1) as f64;
        let mut hz: Vec<f64> = (0..points).map(|i| start + step * i as f64).collect();
        hz[points - 1] = stop;
        Grid::new(hz)
    }

    pub fn hz(&self) -> &[f64] {
        &self.hz
    }

    pub fn len(&self) -> usize {
        self.hz.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hz.is_empty()
    }

    pub fn angular(&self) -> impl Iterator<Item = f64> + '_ {
        self.hz.iter().map(|f| TAU * f)
    }

    pub fn span_hz(&self) -> f64 {
        self.hz[self.hz.len() - 1] - self.hz[0]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumKind {
    Omit,
    /// Microwave to optical.
    Moc,
    /// Optical to microwave.
    Om,
    Reflection,
}

impl SpectrumKind {
    pub fn name(self) -> &'static str {
        match self {
            SpectrumKind::Omit => "omit",
            SpectrumKind::Moc => "moc",
            SpectrumKind::Om => "om",
            SpectrumKind::Reflection => "reflection",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "omit" => Ok(SpectrumKind::Omit),
            "moc" => Ok(SpectrumKind::Moc),
            "om" => Ok(SpectrumKind::Om),
            "reflection" => Ok(SpectrumKind::Reflection),
            other => Err(Error::param("kind", format!("unknown spectrum kind {other:?}"))),
        }
    }
}

/// Parameter snapshot and notes carried with a spectrum.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Metadata {
    /// Name/value pairs, in insertion order.
    pub params: Vec<(String, f64)>,
    /// Mean raw power used to normalize, when normalized.
    pub baseline: Option<f64>,
    pub warnings: Vec<String>,
    /// Free-form comment lines, e.g. read from a file.
    pub comments: Vec<String>,
}

impl Metadata {
    pub fn param(&self, name: &str) -> Option<f64> {
        self.params.iter().find(|(k, _)| k == name).map(|(_, v)| *v)
    }

    pub fn set_param(&mut self, name: &str, value: f64) {
        match self.params.iter_mut().find(|(k, _)| k == name) {
            Some(slot) => slot.1 = value,
            None => self.params.push((name.to_string(), value)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub kind: SpectrumKind,
    grid: Grid,
    amplitude: Vec<Complex64>,
    power: Vec<f64>,
    pub metadata: Metadata,
}

impl Spectrum {
    /// Power is derived from the amplitudes.
    pub fn new(kind: SpectrumKind, grid: Grid, amplitude: Vec<Complex64>, metadata: Metadata) -> Result<Self> {
        if amplitude.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "{} amplitudes for {} grid points",
                amplitude.len(),
                grid.len()
            )));
        }
        let power = amplitude.iter().map(|a| a.norm_sqr()).collect();
        Ok(Spectrum { kind, grid, amplitude, power, metadata })
    }

    /// A power-only spectrum (e.g. measured data). Amplitudes are set to
    /// sqrt(power) with zero phase.
    pub fn from_power(kind: SpectrumKind, grid: Grid, power: Vec<f64>, metadata: Metadata) -> Result<Self> {
        if power.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::param("power", "must be finite and >= 0"));
        }
        let amplitude = power.iter().map(|p| Complex64::new(p.sqrt(), 0.0)).collect();
        let mut s = Spectrum::new(kind, grid, amplitude, metadata)?;
        s.power = power;
        Ok(s)
    }

    /// Trusts the caller that `power` matches `amplitude`, e.g. when both
    /// were read from a file.
    pub fn from_parts(
        kind: SpectrumKind,
        grid: Grid,
        amplitude: Vec<Complex64>,
        power: Vec<f64>,
        metadata: Metadata,
    ) -> Result<Self> {
        if amplitude.len() != grid.len() || power.len() != grid.len() {
            return Err(Error::InvalidGrid("column lengths differ".into()));
        }
        Ok(Spectrum { kind, grid, amplitude, power, metadata })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn freq_hz(&self) -> &[f64] {
        self.grid.hz()
    }

    pub fn amplitude(&self) -> &[Complex64] {
        &self.amplitude
    }

    pub fn power(&self) -> &[f64] {
        &self.power
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// Power before baseline normalization.
    pub fn raw_power(&self) -> Vec<f64> {
        let b = self.metadata.baseline.unwrap_or(1.0);
        self.power.iter().map(|p| p * b).collect()
    }

    /// Interior local minima of power, as grid indices.
    pub fn local_minima(&self) -> Vec<usize> {
        local_minima(&self.power)
    }
}

/// Indices i with p[i-1] > p[i] < p[i+1]; flat bottoms count once.
pub fn local_minima(p: &[f64]) -> Vec<usize> {
    let mut out = Vec::new();
    let mut i = 1;
    while i + 1 < p.len() {
        if p[i] < p[i - 1] {
            let mut j = i;
            while j + 1 < p.len() && p[j + 1] == p[i] {
                j += 1;
            }
            if j + 1 < p.len() && p[j + 1] > p[i] {
                out.push(i);
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    out
}

/// Mean of the first and last `fraction` of the samples (at least one each).
pub fn edge_mean(p: &[f64], fraction: f64) -> f64 {
    let k = ((p.len() as f64 * fraction) as usize).max(1).min(p.len());
    let head: f64 = p[..k].iter().sum();
    let tail: f64 = p[p.len() - k..].iter().sum();
    (head + tail) / (2 * k) as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linspace_endpoints_exact() {
        let g = Grid::linspace(11.30e9, 11.45e9, 4001).unwrap();
        assert_eq!(g.len(), 4001);
        assert_eq!(g.hz()[0], 11.30e9);
        assert_eq!(g.hz()[4000], 11.45e9);
    }

    #[test]
    fn bad_grids_rejected() {
        assert!(Grid::linspace(1.0, 2.0, 1).is_err());
        assert!(Grid::linspace(2.0, 1.0, 5).is_err());
        assert!(Grid::new(vec![1.0, 1.0, 2.0]).is_err());
    }

    #[test]
    fn power_is_norm_squared() {
        let g = Grid::linspace(0.0, 1.0, 3).unwrap();
        let a = vec![Complex64::new(3.0, 4.0), Complex64::new(0.0, -1.0), Complex64::new(0.5, 0.5)];
        let s = Spectrum::new(SpectrumKind::Moc, g, a, Metadata::default()).unwrap();
        assert_eq!(s.power(), &[25.0, 1.0, 0.5]);
    }

    #[test]
    fn minima_detection() {
        assert_eq!(local_minima(&[3.0, 1.0, 2.0, 0.5, 0.5, 4.0, 4.0]), vec![1, 3]);
        assert!(local_minima(&[1.0, 2.0, 3.0]).is_empty());
    }

    #[test]
    fn edge_mean_uses_both_ends() {
        let p: Vec<f64> = (0..100).map(|i| i as f64).collect();
        // first 5: 0..4 mean 2; last 5: 95..99 mean 97
        assert_eq!(edge_mean(&p, 0.05), 49.5);
    }
}
