//! Construction of the barrier pair by alternating root finding and
//! propagation of the unstopped density.
//!
//! At step `k` the active levels are the current positive atom `x̄` and the
//! current negative atom `ȳ`, with residual probabilities `p̄` and `q̄`. The
//! step length is the first time either side has absorbed its residual; the
//! side that finishes moves on to its next atom, the other side has its
//! residual reduced by what it absorbed meanwhile. A side without atoms left
//! sits at `±∞`.

mod barrier;
mod density;
mod root;
mod structure;

pub use barrier::{Barrier, Breakpoint, CSV_HEADER};
pub use density::SubDensity;
pub use root::{find_time_increment, Increment, RootOptions};
pub use structure::check_structure;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::KernelConfig;
use crate::law::{DiscreteLaw, SupportCase};
use density::{hit_lower, hit_upper, propagate, Strip};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub kernel: KernelConfig,
    /// Relative tolerance on each time increment.
    pub root_tol: f64,
    /// Probability slack for declaring a root infinite.
    pub root_slack: f64,
    /// A panel is bisected while its top Legendre coefficients exceed this
    /// fraction of the density maximum.
    pub refine_tol: f64,
    pub max_panels: usize,
    /// Smallest panel width as a fraction of the initial width.
    pub min_width_ratio: f64,
    /// Initial panel width next to a feature point, in units of `√dt`.
    pub base_width: f64,
    /// On an inactive side the density is cut at this many `√t`.
    pub tail_sigmas: f64,
    /// Kernels are integrated over this many standard deviations.
    pub window_sigmas: f64,
    /// Sub-panel widths (in `√t` or `√dt`) used when a kernel is narrower than
    /// the stored panels.
    pub hit_scale: f64,
    pub transition_scale: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            kernel: KernelConfig::default(),
            root_tol: 1e-10,
            root_slack: 1e-7,
            refine_tol: 1e-11,
            max_panels: 2000,
            min_width_ratio: 1.0 / 32.0,
            base_width: 0.5,
            tail_sigmas: 8.0,
            window_sigmas: 9.0,
            hit_scale: 0.5,
            transition_scale: 0.5,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        self.kernel.validate()?;
        let positive = [
            ("root_tol", self.root_tol),
            ("root_slack", self.root_slack),
            ("refine_tol", self.refine_tol),
            ("min_width_ratio", self.min_width_ratio),
            ("base_width", self.base_width),
            ("tail_sigmas", self.tail_sigmas),
            ("window_sigmas", self.window_sigmas),
            ("hit_scale", self.hit_scale),
            ("transition_scale", self.transition_scale),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidConfig(format!("{name} must be positive, got {v}")));
            }
        }
        if self.max_panels < 2 {
            return Err(Error::InvalidConfig("max_panels must be at least 2".into()));
        }
        Ok(())
    }

    fn root_options(&self, start: f64) -> RootOptions {
        RootOptions {
            tol: self.root_tol,
            slack: self.root_slack,
            start,
        }
    }
}

/// Which side finished its atom at the end of a step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Upper,
    Lower,
    Both,
    /// Last interval, running to `t = ∞`.
    Final,
}

impl Side {
    fn mirror(self) -> Side {
        match self {
            Side::Upper => Side::Lower,
            Side::Lower => Side::Upper,
            s => s,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepDiag {
    pub k: usize,
    pub side: Side,
    #[serde(with = "crate::float_repr")]
    pub upper: f64,
    #[serde(with = "crate::float_repr")]
    pub lower: f64,
    #[serde(with = "crate::float_repr")]
    pub dt: f64,
    #[serde(with = "crate::float_repr")]
    pub t_end: f64,
    /// Mass absorbed at the upper and lower level during the step.
    pub upper_hit: f64,
    pub lower_hit: f64,
    /// `|absorbed − target|` for the side(s) that finished.
    pub residual: f64,
    /// Unstopped mass at the end of the step.
    pub mass: f64,
    /// `mass − (1 − total absorbed)`.
    pub drift: f64,
    pub panels: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub support: SupportCase,
    pub barrier: Barrier,
    pub steps: Vec<StepDiag>,
    #[serde(with = "crate::float_repr::option")]
    pub upper_exhausted_at: Option<f64>,
    #[serde(with = "crate::float_repr::option")]
    pub lower_exhausted_at: Option<f64>,
    pub max_residual: f64,
    pub final_drift: f64,
    /// Probability of atoms that never became active because an earlier root
    /// was declared infinite within `root_slack`.
    pub unembedded_mass: f64,
}

impl SolveReport {
    fn reflect(self) -> SolveReport {
        SolveReport {
            support: match self.support {
                SupportCase::Positive => SupportCase::Negative,
                SupportCase::Negative => SupportCase::Positive,
                s => s,
            },
            barrier: self.barrier.reflect(),
            steps: self
                .steps
                .into_iter()
                .map(|s| StepDiag {
                    side: s.side.mirror(),
                    upper: -s.lower,
                    lower: -s.upper,
                    upper_hit: s.lower_hit,
                    lower_hit: s.upper_hit,
                    ..s
                })
                .collect(),
            upper_exhausted_at: self.lower_exhausted_at,
            lower_exhausted_at: self.upper_exhausted_at,
            ..self
        }
    }
}

/// Solves for any support case.
pub fn solve(law: &DiscreteLaw, cfg: &SolverConfig) -> Result<SolveReport> {
    match law.classify() {
        SupportCase::Positive => solve_one_sided(law, cfg),
        SupportCase::Negative => Ok(solve_one_sided(&law.reflect(), cfg)?.reflect()),
        SupportCase::TwoSided => solve_two_sided(law, cfg),
    }
}

/// Upper barrier only; the law must live on `(0, ∞)`.
pub fn solve_one_sided(law: &DiscreteLaw, cfg: &SolverConfig) -> Result<SolveReport> {
    if law.classify() != SupportCase::Positive {
        return Err(Error::WrongSupport(format!(
            "one-sided solver needs positive atoms, got {:?}",
            law.classify()
        )));
    }
    run(law.positive_atoms(), Vec::new(), SupportCase::Positive, cfg)
}

pub fn solve_two_sided(law: &DiscreteLaw, cfg: &SolverConfig) -> Result<SolveReport> {
    if law.classify() != SupportCase::TwoSided {
        return Err(Error::WrongSupport(format!(
            "two-sided solver needs atoms on both sides, got {:?}",
            law.classify()
        )));
    }
    run(law.positive_atoms(), law.negative_atoms(), SupportCase::TwoSided, cfg)
}

/// `∫ g(t, level − y) f(y) dy`: probability that the unstopped mass `f`
/// reaches `level` within `t`.
pub fn convolve_hit_cdf_1s(f: &SubDensity, level: f64, t: f64, cfg: &SolverConfig) -> Result<f64> {
    let top = f.grid().into_iter().fold(f64::NEG_INFINITY, f64::max);
    if !(level > top) || level <= 0.0 {
        return Err(Error::DomainError(format!(
            "level {level} must lie above the density grid (top node {top})"
        )));
    }
    if t < 0.0 || t.is_nan() {
        return Err(Error::DomainError(format!("time must be non-negative, got {t}")));
    }
    hit_upper(f, Strip { upper: level, lower: f64::NEG_INFINITY }, t, cfg)
}

/// `f_k(x) = ∫ f(dt, x − y, level − y) f(y) dy` for `x < level`.
pub fn propagate_subdensity_1s(f: &SubDensity, level: f64, dt: f64, cfg: &SolverConfig) -> Result<SubDensity> {
    let top = f.grid().into_iter().fold(f64::NEG_INFINITY, f64::max);
    if !(level > top) || level <= 0.0 {
        return Err(Error::DomainError(format!(
            "level {level} must lie above the density grid (top node {top})"
        )));
    }
    propagate(f, Strip { upper: level, lower: f64::NEG_INFINITY }, dt, cfg)
}

enum Root {
    Finite(Increment),
    Infinite(f64),
}

impl Root {
    fn dt(&self) -> f64 {
        match self {
            Root::Finite(i) => i.dt,
            Root::Infinite(_) => f64::INFINITY,
        }
    }
}

/// Absorbing `target` on one side: `∞` when the side can at most just reach
/// it, an error when even the whole unstopped mass would not suffice.
fn side_root<G>(g: G, target: f64, limit: f64, mass: f64, start: f64, cfg: &SolverConfig) -> Result<Root>
where
    G: FnMut(f64) -> Result<f64>,
{
    if target > mass + cfg.root_slack {
        return Err(Error::TargetExceedsMass {
            target,
            available: mass,
        });
    }
    if target >= limit - cfg.root_slack {
        return Ok(Root::Infinite((target - limit).abs()));
    }
    Ok(Root::Finite(find_time_increment(g, target, limit, &cfg.root_options(start))?))
}

/// Residual probability below which an atom counts as fully absorbed.
const CONSUMED: f64 = 1e-13;

fn run(pos: Vec<(f64, f64)>, neg: Vec<(f64, f64)>, support: SupportCase, cfg: &SolverConfig) -> Result<SolveReport> {
    cfg.validate()?;
    let mut f = SubDensity::point_mass();
    let (mut ip, mut iq) = (0usize, 0usize);
    let mut pbar = pos.first().map_or(0.0, |a| a.1);
    let mut qbar = neg.first().map_or(0.0, |a| a.1);
    let mut t = 0.0;
    let mut last_dt = 1.0;
    let mut absorbed = 0.0;
    let mut breakpoints = Vec::new();
    let mut steps = Vec::new();
    let (mut upper_exhausted_at, mut lower_exhausted_at) = (None, None);
    let mut max_residual: f64 = 0.0;

    for k in 1.. {
        let upper = pos.get(ip).map_or(f64::INFINITY, |a| a.0);
        let lower = neg.get(iq).map_or(f64::NEG_INFINITY, |a| a.0);
        if upper.is_infinite() && lower.is_infinite() {
            return Err(Error::BothSidesInfinite { step: k });
        }
        let strip = Strip { upper, lower };
        let mass = f.mass();
        let (lo, hi) = f.support();
        let start = |gap: f64| if gap > 0.0 { 0.25 * gap * gap } else { last_dt };

        let up = if upper.is_finite() {
            let limit = hit_upper(&f, strip, f64::INFINITY, cfg)?;
            side_root(|s| hit_upper(&f, strip, s, cfg), pbar, limit, mass, start(upper - hi), cfg)?
        } else {
            Root::Infinite(0.0)
        };
        let down = if lower.is_finite() {
            let limit = hit_lower(&f, strip, f64::INFINITY, cfg)?;
            side_root(|s| hit_lower(&f, strip, s, cfg), qbar, limit, mass, start(lo - lower), cfg)?
        } else {
            Root::Infinite(0.0)
        };

        let (i, j) = (up.dt(), down.dt());
        let dt = i.min(j);
        if dt.is_infinite() {
            let residual = match (&up, &down) {
                (Root::Infinite(a), Root::Infinite(b)) => a.max(*b),
                _ => 0.0,
            };
            max_residual = max_residual.max(residual);
            let g = hit_upper(&f, strip, f64::INFINITY, cfg)?;
            let h = hit_lower(&f, strip, f64::INFINITY, cfg)?;
            absorbed += g + h;
            breakpoints.push(Breakpoint { t_end: f64::INFINITY, upper, lower });
            steps.push(StepDiag {
                k,
                side: Side::Final,
                upper,
                lower,
                dt,
                t_end: f64::INFINITY,
                upper_hit: g,
                lower_hit: h,
                residual,
                mass: 0.0,
                drift: absorbed - 1.0,
                panels: 0,
            });
            let later: f64 = pos.iter().skip(ip + 1).chain(neg.iter().skip(iq + 1)).map(|a| a.1).sum();
            let barrier = Barrier::new(breakpoints)?;
            return Ok(SolveReport {
                support,
                barrier,
                steps,
                upper_exhausted_at,
                lower_exhausted_at,
                max_residual,
                final_drift: absorbed - 1.0,
                unembedded_mass: later,
            });
        }

        let tie = i.is_finite() && j.is_finite() && (i - j).abs() <= (cfg.root_tol * i).max(1e-12);
        let mut advance_upper = i <= j || tie;
        let mut advance_lower = j <= i || tie;
        let g = hit_upper(&f, strip, dt, cfg)?;
        let h = hit_lower(&f, strip, dt, cfg)?;
        let mut residual: f64 = 0.0;
        if advance_upper {
            residual = residual.max((g - pbar).abs());
        }
        if advance_lower {
            residual = residual.max((h - qbar).abs());
        }
        max_residual = max_residual.max(residual);

        let next = propagate(&f, strip, dt, cfg)?;
        absorbed += g + h;
        t += dt;
        last_dt = dt;
        breakpoints.push(Breakpoint { t_end: t, upper, lower });

        if !advance_upper && upper.is_finite() {
            pbar -= g;
            if pbar <= CONSUMED {
                advance_upper = true;
            }
        }
        if !advance_lower && lower.is_finite() {
            qbar -= h;
            if qbar <= CONSUMED {
                advance_lower = true;
            }
        }
        if advance_upper && upper.is_finite() {
            ip += 1;
            pbar = pos.get(ip).map_or(0.0, |a| a.1);
            if ip == pos.len() {
                upper_exhausted_at = Some(t);
            }
        }
        if advance_lower && lower.is_finite() {
            iq += 1;
            qbar = neg.get(iq).map_or(0.0, |a| a.1);
            if iq == neg.len() {
                lower_exhausted_at = Some(t);
            }
        }
        let side = match (advance_upper, advance_lower) {
            (true, true) => Side::Both,
            (true, false) => Side::Upper,
            _ => Side::Lower,
        };
        steps.push(StepDiag {
            k,
            side,
            upper,
            lower,
            dt,
            t_end: t,
            upper_hit: g,
            lower_hit: h,
            residual,
            mass: next.mass(),
            drift: next.mass() - (1.0 - absorbed),
            panels: next.panel_count(),
        });
        f = next;
    }
    unreachable!("the step loop only exits by returning")
}
