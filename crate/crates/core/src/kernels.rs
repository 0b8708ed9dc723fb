//! Closed-form first-passage kernels of standard Brownian motion started at 0.
//!
//! One-sided (absorbing level `y > 0`):
//!
//! ```text
//! f(t, x, y) = [φ(x/√t) − φ((x − 2y)/√t)] / √t          x < y
//! g(t, y)    = 2 [1 − Φ(y/√t)]
//! ```
//!
//! Two-sided strip `(z, y)` with `z < 0 < y` and width `w = y − z`, by the
//! method of images:
//!
//! ```text
//! f(t, x, y, z) = Σ_{n∈ℤ} [φ((x + 2nw)/√t) − φ((x + 2nw − 2y)/√t)] / √t
//! g(t, y, z)    = 2 Σ_{n≥0} [Φ(((2n+1)w − z)/√t) − Φ(((2n+1)w + z)/√t)]   (upper exit first)
//! h(t, y, z)    = 2 Σ_{n≥0} [Φ(((2n+1)w + y)/√t) − Φ(((2n+1)w − y)/√t)]   (lower exit first)
//! ```
//!
//! The image sums are truncated once two consecutive terms fall below
//! `series_tol`. The sum indexing has been checked against the conservation
//! identity `∫f + g + h = 1` (see the tests).

use serde::{Deserialize, Serialize};
use libm::erfc;
use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Beyond `t = SETTLED · w²` a strip of width `w` has been left with
/// probability above `1 − (4/π)·exp(−π²·SETTLED/2) > 1 − 1e-17`, so the exit
/// probabilities equal their limits and the survival density is zero to double
/// precision. Saves summing hundreds of image terms.
const SETTLED: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KernelConfig {
    pub series_tol: f64,
    pub max_terms: usize,
    pub quad_tol: f64,
}

impl Default for KernelConfig {
    fn default() -> Self {
        KernelConfig {
            series_tol: 1e-13,
            max_terms: 200,
            quad_tol: 1e-10,
        }
    }
}

impl KernelConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.series_tol > 0.0) {
            return Err(Error::InvalidConfig("series_tol must be positive".into()));
        }
        if self.max_terms < 1 {
            return Err(Error::InvalidConfig("max_terms must be at least 1".into()));
        }
        if !(self.quad_tol > 0.0) {
            return Err(Error::InvalidConfig("quad_tol must be positive".into()));
        }
        Ok(())
    }
}

/// Standard normal density.
#[inline]
pub fn phi(x: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Standard normal distribution function, via the complementary error function.
#[inline]
pub fn big_phi(x: f64) -> f64 {
    0.5 * erfc(-x * FRAC_1_SQRT_2)
}

/// Upper tail `1 − Φ(x)`, accurate for large positive `x`.
#[inline]
pub fn normal_sf(x: f64) -> f64 {
    0.5 * erfc(x * FRAC_1_SQRT_2)
}

/// `Φ(hi) − Φ(lo)` without cancellation when both arguments sit in the same tail.
#[inline]
pub fn normal_between(lo: f64, hi: f64) -> f64 {
    if lo >= 0.0 {
        normal_sf(lo) - normal_sf(hi)
    } else if hi <= 0.0 {
        big_phi(hi) - big_phi(lo)
    } else {
        1.0 - normal_sf(hi) - big_phi(lo)
    }
}

// ---------------------------------------------------------------------------
// Unchecked fast paths used inside the solver's quadrature loops.
// ---------------------------------------------------------------------------

/// One-sided killed density, written as φ(x/√t)·(1 − e^{−2y(y−x)/t})/√t so
/// that it stays non-negative and accurate next to the absorbing level.
#[inline]
pub(crate) fn killed_density(t: f64, x: f64, y: f64) -> f64 {
    let st = t.sqrt();
    let gap = y - x;
    if gap <= 0.0 {
        return 0.0;
    }
    phi(x / st) * (-(-2.0 * y * gap / t).exp_m1()) / st
}

/// One-sided hitting probability by time `t` of a level at distance `d > 0`.
#[inline]
pub(crate) fn hit_prob(t: f64, d: f64) -> f64 {
    if d <= 0.0 {
        return 1.0;
    }
    if t <= 0.0 {
        return 0.0;
    }
    if t.is_infinite() {
        return 1.0;
    }
    erfc(d / (2.0 * t).sqrt())
}

/// Squared argument beyond which a φ-term is below `tol` after scaling by 1/√t.
#[inline]
fn negligible_sq(tol: f64, st: f64) -> f64 {
    let v = tol * st / INV_SQRT_2PI;
    if v >= 1.0 {
        0.0
    } else {
        -2.0 * v.ln()
    }
}

pub(crate) fn strip_density(t: f64, x: f64, y: f64, z: f64, cfg: &KernelConfig) -> Result<f64> {
    if x >= y || x <= z {
        return Ok(0.0);
    }
    let w = y - z;
    if t >= SETTLED * w * w {
        return Ok(0.0);
    }
    let st = t.sqrt();
    let cut = negligible_sq(cfg.series_tol, st);
    let term = |a: f64| -> f64 {
        let u = a / st;
        let v = (a - 2.0 * y) / st;
        let pu = if u * u > cut { 0.0 } else { phi(u) };
        let pv = if v * v > cut { 0.0 } else { phi(v) };
        pu - pv
    };
    // n = 0 in the cancellation-free form.
    let mut sum = phi(x / st) * (-(-2.0 * y * (y - x) / t).exp_m1());
    let mut quiet = 0;
    let mut n = 1usize;
    loop {
        if n > cfg.max_terms {
            return Err(Error::SeriesNotConverged {
                terms: cfg.max_terms,
            });
        }
        let shift = 2.0 * n as f64 * w;
        let pair = term(x + shift) + term(x - shift);
        sum += pair;
        if pair.abs() / st < cfg.series_tol {
            quiet += 1;
            if quiet >= 2 {
                break;
            }
        } else {
            quiet = 0;
        }
        n += 1;
    }
    let value = sum / st;
    if value < 0.0 {
        if value > -cfg.series_tol {
            return Ok(0.0);
        }
        return Err(Error::Numerical(format!(
            "strip density {value:e} is negative at t={t}, x={x}, y={y}, z={z}"
        )));
    }
    Ok(value)
}

/// Shared image series for the two exit-first probabilities. `near` is the
/// level whose exit is counted and `far` the opposite one, both as distances
/// from the start (`near, far > 0`).
fn exit_first_series(t: f64, near: f64, far: f64, cfg: &KernelConfig) -> Result<f64> {
    if t <= 0.0 {
        return Ok(0.0);
    }
    let w = near + far;
    if t >= SETTLED * w * w {
        return Ok(far / w);
    }
    let st = t.sqrt();
    let mut sum = 0.0;
    let mut quiet = 0;
    for n in 0..cfg.max_terms {
        let base = (2 * n + 1) as f64 * w;
        // Φ((base + far)/√t) − Φ((base − far)/√t); both arguments are positive.
        let term = 2.0 * normal_between((base - far) / st, (base + far) / st);
        sum += term;
        if term.abs() < cfg.series_tol {
            quiet += 1;
            if quiet >= 2 {
                return Ok(sum.clamp(0.0, 1.0));
            }
        } else {
            quiet = 0;
        }
    }
    Err(Error::SeriesNotConverged {
        terms: cfg.max_terms,
    })
}

#[inline]
pub(crate) fn strip_hit_upper(t: f64, y: f64, z: f64, cfg: &KernelConfig) -> Result<f64> {
    exit_first_series(t, y, -z, cfg)
}

#[inline]
pub(crate) fn strip_hit_lower(t: f64, y: f64, z: f64, cfg: &KernelConfig) -> Result<f64> {
    exit_first_series(t, -z, y, cfg)
}

// ---------------------------------------------------------------------------
// Checked public surface.
// ---------------------------------------------------------------------------

/// Density of surviving paths, `P(B_t ∈ dx, τ_y > t)/dx`.
pub fn survival_density_1s(t: f64, x: f64, y: f64) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::DomainError(format!("time must be positive, got {t}")));
    }
    if !(y > 0.0) {
        return Err(Error::DomainError(format!("level must be positive, got {y}")));
    }
    if !(x < y) {
        return Err(Error::DomainError(format!("x={x} must lie below the level {y}")));
    }
    Ok(killed_density(t, x, y))
}

/// `P(τ_y ≤ t) = 2[1 − Φ(y/√t)]`.
pub fn hit_cdf_1s(t: f64, y: f64) -> Result<f64> {
    if !(y > 0.0) {
        return Err(Error::DomainError(format!("level must be positive, got {y}")));
    }
    if t < 0.0 || t.is_nan() {
        return Err(Error::DomainError(format!("time must be non-negative, got {t}")));
    }
    Ok(hit_prob(t, y))
}

fn check_strip(y: f64, z: f64) -> Result<()> {
    if !(y > 0.0) || !(z < 0.0) || !y.is_finite() || !z.is_finite() {
        return Err(Error::DomainError(format!(
            "strip levels must satisfy z < 0 < y, got y={y}, z={z}"
        )));
    }
    Ok(())
}

/// Density of paths that have left neither `y` nor `z` by time `t`.
pub fn survival_density_2s(t: f64, x: f64, y: f64, z: f64, cfg: &KernelConfig) -> Result<f64> {
    check_strip(y, z)?;
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::DomainError(format!("time must be positive, got {t}")));
    }
    if !(z < x && x < y) {
        return Err(Error::DomainError(format!(
            "x={x} must lie strictly inside ({z}, {y})"
        )));
    }
    strip_density(t, x, y, z, cfg)
}

/// `P(τ_y < τ_z, τ_{y,z} ≤ t)`; `t = ∞` gives the gambler's-ruin limit `−z/(y−z)`.
pub fn hit_upper_first_cdf(t: f64, y: f64, z: f64, cfg: &KernelConfig) -> Result<f64> {
    check_strip(y, z)?;
    if t < 0.0 || t.is_nan() {
        return Err(Error::DomainError(format!("time must be non-negative, got {t}")));
    }
    strip_hit_upper(t, y, z, cfg)
}

/// `P(τ_z < τ_y, τ_{y,z} ≤ t)`; `t = ∞` gives `y/(y−z)`.
pub fn hit_lower_first_cdf(t: f64, y: f64, z: f64, cfg: &KernelConfig) -> Result<f64> {
    check_strip(y, z)?;
    if t < 0.0 || t.is_nan() {
        return Err(Error::DomainError(format!("time must be non-negative, got {t}")));
    }
    strip_hit_lower(t, y, z, cfg)
}
