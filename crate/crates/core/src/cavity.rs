//! Composite Fabry-Perot resonator: mirror, dielectric/vacuum segments,
//! mirror. Transfer matrices act on (forward, backward) field amplitudes.

use crate::constants::{wavelength_from_omega, C, PI, TAU};
use crate::error::{require_positive, Error, Result};
use crate::prelude::*;
use num_complex::Complex64;

type M2 = [[Complex64; 2]; 2];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub n: f64,
    /// m
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CavityStack {
    pub segments: Vec<Segment>,
    /// Power reflectivity of each end mirror.
    pub mirror_reflectivity: f64,
    /// Maximum extra length of the last segment, m.
    pub piezo_travel: f64,
}

/// Default end-mirror reflectivity.
pub const DEFAULT_REFLECTIVITY: f64 = 0.999;

impl CavityStack {
    pub fn validate(&self) -> Result<()> {
        if self.segments.is_empty() {
            return Err(Error::param("segments", "stack needs at least one segment"));
        }
        for s in &self.segments {
            require_positive("segment length", s.length)?;
            if !(s.n >= 1.0 && s.n.is_finite()) {
                return Err(Error::param("segment index", format!("must be >= 1, got {}", s.n)));
            }
        }
        let r = self.mirror_reflectivity;
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::param("mirror_reflectivity", format!("must lie in (0, 1), got {r}")));
        }
        if !(self.piezo_travel >= 0.0 && self.piezo_travel.is_finite()) {
            return Err(Error::param("piezo_travel", "must be >= 0"));
        }
        Ok(())
    }

    /// Copy with the last segment lengthened by `delta`.
    pub fn displaced(&self, delta: f64) -> Self {
        let mut s = self.clone();
        if let Some(last) = s.segments.last_mut() {
            last.length += delta;
        }
        s
    }

    /// Sum of n_i L_i.
    pub fn optical_length(&self) -> f64 {
        self.segments.iter().map(|s| s.n * s.length).sum()
    }

    /// FSR of a uniform cavity with the same optical length, rad/s.
    pub fn nominal_fsr(&self) -> f64 {
        PI * C / self.optical_length()
    }
}

fn mul(a: &M2, b: &M2) -> M2 {
    let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

fn real(m: [[f64; 2]; 2]) -> M2 {
    m.map(|row| row.map(|x| Complex64::new(x, 0.0)))
}

/// Step from index n1 into index n2.
fn interface(n1: f64, n2: f64) -> M2 {
    let r = (n1 - n2) / (n1 + n2);
    let t = 2.0 * n1 / (n1 + n2);
    let rp = -r;
    let tp = 2.0 * n2 / (n1 + n2);
    real([[(t * tp - r * rp) / tp, rp / tp], [-r / tp, 1.0 / tp]])
}

fn mirror(reflectivity: f64) -> M2 {
    let r = reflectivity.sqrt();
    let t = (1.0 - reflectivity).sqrt();
    real([[(t * t + r * r) / t, -r / t], [-r / t, 1.0 / t]])
}

fn propagation(n: f64, length: f64, omega: f64) -> M2 {
    let phi = n * length * omega / C;
    let (s, c) = phi.sin_cos();
    [
        [Complex64::new(c, s), Complex64::new(0.0, 0.0)],
        [Complex64::new(0.0, 0.0), Complex64::new(c, -s)],
    ]
}

/// Whole-stack transfer matrix, vacuum on both sides.
pub fn transfer_matrix(stack: &CavityStack, omega: f64) -> M2 {
    let mut m = mirror(stack.mirror_reflectivity);
    let mut n_prev = 1.0;
    for s in &stack.segments {
        m = mul(&interface(n_prev, s.n), &m);
        m = mul(&propagation(s.n, s.length, omega), &m);
        n_prev = s.n;
    }
    m = mul(&interface(n_prev, 1.0), &m);
    mul(&mirror(stack.mirror_reflectivity), &m)
}

/// Amplitude transmission and reflection (t, r).
pub fn transfer(stack: &CavityStack, omega: f64) -> (Complex64, Complex64) {
    let m = transfer_matrix(stack, omega);
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    (det / m[1][1], -m[1][0] / m[1][1])
}

/// Power transmission |t|^2.
pub fn transmission(stack: &CavityStack, omega: f64) -> f64 {
    transfer(stack, omega).0.norm_sqr()
}

// Transmission maxima are minima of |M22|^2.
fn inverse_transmission(stack: &CavityStack, omega: f64) -> f64 {
    transfer_matrix(stack, omega)[1][1].norm_sqr()
}

/// Bisection stop width, rad/s.
const RESONANCE_TOLERANCE: f64 = TAU * 0.5;
/// Coarse grid points per nominal FSR.
const COARSE_PER_FSR: f64 = 50.0;

fn refine(stack: &CavityStack, mut a: f64, mut b: f64) -> f64 {
    let h = TAU * 10.0;
    while b - a > RESONANCE_TOLERANCE {
        let m = 0.5 * (a + b);
        if inverse_transmission(stack, m + h) > inverse_transmission(stack, m - h) {
            b = m;
        } else {
            a = m;
        }
    }
    0.5 * (a + b)
}

fn scan(stack: &CavityStack, lo: f64, hi: f64) -> Vec<f64> {
    let step = stack.nominal_fsr() / COARSE_PER_FSR;
    let n = ((hi - lo) / step).ceil().max(2.0) as usize + 1;
    let dw = (hi - lo) / (n - 1) as f64;
    let w: Vec<f64> = (0..n).map(|i| lo + dw * i as f64).collect();
    let f: Vec<f64> = w.iter().map(|x| inverse_transmission(stack, *x)).collect();
    let mut out = Vec::new();
    for i in 1..n - 1 {
        if f[i] <= f[i - 1] && f[i] < f[i + 1] {
            let r = refine(stack, w[i - 1], w[i + 1]);
            if r >= lo && r <= hi {
                out.push(r);
            }
        }
    }
    out
}

/// Transmission peaks inside `band` (rad/s), ascending.
pub fn resonances(stack: &CavityStack, band: (f64, f64)) -> Result<Vec<f64>> {
    stack.validate()?;
    let (lo, hi) = band;
    require_positive("band start", lo)?;
    if !(hi > lo) {
        return Err(Error::param("band", "upper edge must exceed lower edge"));
    }
    Ok(scan(stack, lo, hi))
}

/// Spacing between neighbouring resonances, tagged with the lower mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeSpacing {
    /// Vacuum wavelength of the lower-frequency mode, m.
    pub wavelength: f64,
    /// rad/s
    pub spacing: f64,
}

pub fn mode_spacings(stack: &CavityStack, band: (f64, f64)) -> Result<Vec<ModeSpacing>> {
    let res = resonances(stack, band)?;
    Ok(res
        .windows(2)
        .map(|w| ModeSpacing { wavelength: wavelength_from_omega(w[0]), spacing: w[1] - w[0] })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FsrMatch {
    /// Wavelength of the pair's lower mode at the matched displacement, m.
    pub wavelength: f64,
    /// Extra length of the last segment, m.
    pub displacement: f64,
    /// rad/s
    pub spacing: f64,
}

/// Displacement steps used to follow a pair across the piezo travel.
const TRACK_STEPS: usize = 200;

fn resonance_near(stack: &CavityStack, guess: f64) -> Option<f64> {
    let half = 0.3 * stack.nominal_fsr();
    let found = scan(stack, guess - half, guess + half);
    found.into_iter().min_by(|a, b| (a - guess).abs().total_cmp(&(b - guess).abs()))
}

fn track(stack: &CavityStack, delta: f64, pair: (f64, f64)) -> Option<(f64, f64)> {
    let s = stack.displaced(delta);
    Some((resonance_near(&s, pair.0)?, resonance_near(&s, pair.1)?))
}

/// Finds a mode pair whose spacing can be tuned to `target` within
/// `tolerance` by lengthening the last segment. Pairs are those in `band`
/// at zero displacement, tried from the shortest wavelength; for each pair
/// the smallest matching displacement wins.
pub fn match_fsr(stack: &CavityStack, band: (f64, f64), target: f64, tolerance: f64) -> Result<Option<FsrMatch>> {
    require_positive("tolerance", tolerance)?;
    require_positive("target", target)?;
    let res = resonances(stack, band)?;
    let travel = stack.piezo_travel;
    for k in (0..res.len().saturating_sub(1)).rev() {
        let mut pair = (res[k], res[k + 1]);
        let mut prev_delta = 0.0;
        let mut prev_err = pair.1 - pair.0 - target;
        let found = |pair: (f64, f64), delta: f64| FsrMatch {
            wavelength: wavelength_from_omega(pair.0),
            displacement: delta,
            spacing: pair.1 - pair.0,
        };
        if prev_err.abs() <= tolerance {
            return Ok(Some(found(pair, 0.0)));
        }
        if travel <= 0.0 {
            continue;
        }
        for i in 1..=TRACK_STEPS {
            let delta = travel * i as f64 / TRACK_STEPS as f64;
            let Some(next) = track(stack, delta, pair) else { break };
            let err = next.1 - next.0 - target;
            if err.abs() <= tolerance {
                return Ok(Some(found(next, delta)));
            }
            if err.signum() != prev_err.signum() {
                // bisect the displacement, re-tracking from the lower end
                let (mut a, mut b) = (prev_delta, delta);
                let anchor = pair;
                let mut fa = prev_err;
                for _ in 0..80 {
                    let m = 0.5 * (a + b);
                    let Some(pm) = track(stack, m, anchor) else { break };
                    let em = pm.1 - pm.0 - target;
                    if em.abs() <= tolerance {
                        return Ok(Some(found(pm, m)));
                    }
                    if em.signum() == fa.signum() {
                        a = m;
                        fa = em;
                    } else {
                        b = m;
                    }
                }
            }
            pair = next;
            prev_err = err;
            prev_delta = delta;
        }
    }
    Ok(None)
}
