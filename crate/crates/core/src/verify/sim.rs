//! Path simulation of the stopped process.
//!
//! Paths advance by exact Gaussian increments. Within a step the levels are
//! constant, and the probability that the Brownian bridge between the two
//! endpoints touched a level `u` is `exp(−2(u − x)(u − y)/h)`; this is exact
//! for a single level, so one-sided barriers are simulated without
//! discretization bias in `B_τ` however long the step.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::law::DiscreteLaw;
use crate::solver::Barrier;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Bridge crossing test every step, `τ` at the step midpoint.
    Bridge,
    /// Levels checked at step ends only, `τ` at the step end.
    Naive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub n_paths: usize,
    /// Base time step.
    pub step: f64,
    /// Paths still running at this time are reported as truncated.
    pub horizon: f64,
    pub seed: u64,
    pub scheme: Scheme,
    /// The step used at time `t` is `max(step, step_growth·t)`, which lets
    /// long-lived paths reach a distant horizon. `0` keeps the step fixed.
    pub step_growth: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            n_paths: 100_000,
            step: 1e-3,
            horizon: 1e4,
            seed: 0x5eed,
            scheme: Scheme::Bridge,
            step_growth: 1e-3,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_paths == 0 {
            return Err(Error::InvalidConfig("n_paths must be at least 1".into()));
        }
        if !(self.step > 0.0) || !self.step.is_finite() {
            return Err(Error::InvalidConfig(format!("step must be positive, got {}", self.step)));
        }
        if !(self.horizon > 0.0) {
            return Err(Error::InvalidConfig(format!("horizon must be positive, got {}", self.horizon)));
        }
        if !(self.step_growth >= 0.0) || !self.step_growth.is_finite() {
            return Err(Error::InvalidConfig("step_growth must be non-negative".into()));
        }
        Ok(())
    }
}

/// One stopped path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub tau: f64,
    pub value: f64,
    /// The path was still running at the horizon; `tau` is the horizon and
    /// `value` the position there.
    pub truncated: bool,
}

/// In a strip of width `w` the step is kept below `w²/STRIP_STEPS`, so that
/// a bridge touching both levels within one step has probability below
/// `exp(−2·STRIP_STEPS)`.
const STRIP_STEPS: f64 = 30.0;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Independent generators for the increments and the bridge uniforms of path
/// `i`. The increment stream depends only on the seed and the index, so two
/// simulations with the same seed see the same Brownian increments.
pub(crate) fn path_rngs(seed: u64, i: u64) -> (ChaCha8Rng, ChaCha8Rng) {
    let key = seed ^ splitmix64(i);
    let mut inc = ChaCha8Rng::seed_from_u64(key);
    inc.set_stream(0);
    let mut unif = ChaCha8Rng::seed_from_u64(key);
    unif.set_stream(1);
    (inc, unif)
}

#[inline]
fn bridge_cross(x: f64, y: f64, level: f64, h: f64) -> f64 {
    (-2.0 * (level - x) * (level - y) / h).exp()
}

fn base_step(cfg: &SimConfig, t: f64) -> f64 {
    cfg.step.max(cfg.step_growth * t)
}

fn stopped_path(barrier: &Barrier, cfg: &SimConfig, i: u64) -> Sample {
    let (mut inc, mut unif) = path_rngs(cfg.seed, i);
    let bps = barrier.breakpoints();
    let mut k = 0;
    let mut t = 0.0;
    let mut x = 0.0;
    loop {
        let bp = &bps[k];
        let (u, l) = (bp.upper, bp.lower);
        let mut h = base_step(cfg, t);
        if u.is_finite() && l.is_finite() {
            h = h.min((u - l) * (u - l) / STRIP_STEPS);
        }
        let mut end_of_interval = false;
        if t + h >= bp.t_end {
            h = bp.t_end - t;
            end_of_interval = true;
        }
        let mut truncated = false;
        if t + h >= cfg.horizon {
            h = cfg.horizon - t;
            truncated = true;
        }
        let z: f64 = inc.sample(StandardNormal);
        let y = x + h.sqrt() * z;
        match cfg.scheme {
            Scheme::Naive => {
                if y >= u {
                    return Sample { tau: t + h, value: u, truncated: false };
                }
                if y <= l {
                    return Sample { tau: t + h, value: l, truncated: false };
                }
            }
            Scheme::Bridge => {
                let mid = t + 0.5 * h;
                if y >= u {
                    return Sample { tau: mid, value: u, truncated: false };
                }
                if y <= l {
                    return Sample { tau: mid, value: l, truncated: false };
                }
                let pu = if u.is_finite() { bridge_cross(x, y, u, h) } else { 0.0 };
                let pl = if l.is_finite() { bridge_cross(x, y, l, h) } else { 0.0 };
                let hit_u = pu > 0.0 && unif.random::<f64>() < pu;
                let hit_l = pl > 0.0 && unif.random::<f64>() < pl;
                match (hit_u, hit_l) {
                    (true, true) => {
                        let value = if pu >= pl { u } else { l };
                        return Sample { tau: mid, value, truncated: false };
                    }
                    (true, false) => return Sample { tau: mid, value: u, truncated: false },
                    (false, true) => return Sample { tau: mid, value: l, truncated: false },
                    (false, false) => {}
                }
            }
        }
        t += h;
        x = y;
        if truncated {
            return Sample { tau: cfg.horizon, value: x, truncated: true };
        }
        if end_of_interval {
            t = bp.t_end;
            k += 1;
        }
    }
}

/// Simulates `cfg.n_paths` paths stopped at the barrier. Paths are seeded by
/// their index, so the output does not depend on the thread count.
pub fn simulate_stopped(barrier: &Barrier, cfg: &SimConfig) -> Result<Vec<Sample>> {
    cfg.validate()?;
    Ok((0..cfg.n_paths as u64)
        .into_par_iter()
        .map(|i| stopped_path(barrier, cfg, i))
        .collect())
}

/// Atoms and barycenters `ψ_j = E[X | X ≥ a_j]` of a centered law.
struct AyRule {
    atoms: Vec<f64>,
    psi: Vec<f64>,
}

fn ay_path(rule: &AyRule, cfg: &SimConfig, i: u64) -> Sample {
    let (mut inc, mut unif) = path_rngs(cfg.seed, i);
    let m = rule.atoms.len();
    let mut j = 0;
    let mut t = 0.0;
    let mut x: f64 = 0.0;
    loop {
        if j == m - 1 {
            // The running maximum reached the top atom, where B now sits.
            return Sample { tau: t, value: rule.atoms[j], truncated: false };
        }
        let a = rule.atoms[j];
        let next = rule.psi[j + 1];
        let mut h = base_step(cfg, t).min((next - a) * (next - a) / STRIP_STEPS);
        let mut truncated = false;
        if t + h >= cfg.horizon {
            h = cfg.horizon - t;
            truncated = true;
        }
        let z: f64 = inc.sample(StandardNormal);
        let y = x + h.sqrt() * z;
        let mid = t + 0.5 * h;
        match cfg.scheme {
            Scheme::Naive => {
                if y <= a {
                    return Sample { tau: t + h, value: a, truncated: false };
                }
                while j + 1 < m && y >= rule.psi[j + 1] {
                    j += 1;
                }
                if j == m - 1 {
                    return Sample { tau: t + h, value: rule.atoms[j], truncated: false };
                }
            }
            Scheme::Bridge => {
                if y <= a || unif.random::<f64>() < bridge_cross(x, y, a, h) {
                    return Sample { tau: mid, value: a, truncated: false };
                }
                // Maximum of the bridge from x to y over h, sampled exactly.
                let e = -(unif.random::<f64>()).ln();
                let top = 0.5 * (x + y + ((y - x) * (y - x) + 2.0 * h * e).sqrt());
                while j + 1 < m && top >= rule.psi[j + 1] {
                    j += 1;
                }
                if j == m - 1 {
                    return Sample { tau: mid, value: rule.atoms[j], truncated: false };
                }
                if y <= rule.atoms[j] {
                    return Sample { tau: mid, value: rule.atoms[j], truncated: false };
                }
            }
        }
        t += h;
        x = y;
        if truncated {
            return Sample { tau: cfg.horizon, value: x, truncated: true };
        }
    }
}

/// The comparison embedding: stop the first time the running maximum
/// reaches `E[X | X ≥ B_t]`. For a discrete law this means stopping below
/// `a_j` while the maximum lies in `[ψ_j, ψ_{j+1})`.
pub fn simulate_azema_yor(law: &DiscreteLaw, cfg: &SimConfig) -> Result<Vec<Sample>> {
    cfg.validate()?;
    let mean = law.mean();
    if mean.abs() > 1e-10 {
        return Err(Error::NotCentered { mean });
    }
    let atoms: Vec<f64> = law.positions().collect();
    let psi = atoms.iter().map(|&a| law.barycenter(a)).collect::<Result<Vec<f64>>>()?;
    let rule = AyRule { atoms, psi };
    Ok((0..cfg.n_paths as u64)
        .into_par_iter()
        .map(|i| ay_path(&rule, cfg, i))
        .collect())
}
