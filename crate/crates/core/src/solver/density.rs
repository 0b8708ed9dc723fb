//! Sub-probability densities of the unstopped particle, stored as piecewise
//! polynomials on Gauss–Legendre panels.

use crate::error::{Error, Result};
use crate::kernels::{hit_prob, killed_density, strip_density, strip_hit_lower, strip_hit_upper};
use crate::quadrature::{ORDER, RULE};

use super::SolverConfig;

#[derive(Debug, Clone)]
pub(crate) struct Panel {
    pub a: f64,
    pub b: f64,
    pub values: [f64; ORDER],
}

impl Panel {
    fn nodes(&self) -> [f64; ORDER] {
        RULE.mapped(self.a, self.b).0
    }
}

/// Density of `B_t` on the event that no level has been reached yet.
///
/// The initial state is the point mass at the origin; every later state is a
/// set of disjoint panels, each carrying the density at its Gauss nodes.
#[derive(Debug, Clone)]
pub struct SubDensity {
    pub(crate) panels: Vec<Panel>,
    pub(crate) atom: Option<(f64, f64)>,
    time: f64,
    mass: f64,
}

impl SubDensity {
    /// `δ_0` at time zero.
    pub fn point_mass() -> SubDensity {
        SubDensity {
            panels: Vec::new(),
            atom: Some((0.0, 1.0)),
            time: 0.0,
            mass: 1.0,
        }
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// Elapsed time since the start of the path.
    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn is_point_mass(&self) -> bool {
        self.atom.is_some()
    }

    /// Quadrature nodes (or the atom position) in increasing order.
    pub fn grid(&self) -> Vec<f64> {
        if let Some((x, _)) = self.atom {
            return vec![x];
        }
        self.panels.iter().flat_map(|p| p.nodes()).collect()
    }

    /// Density values matching [`SubDensity::grid`]; for the point mass, its weight.
    pub fn values(&self) -> Vec<f64> {
        if let Some((_, p)) = self.atom {
            return vec![p];
        }
        self.panels.iter().flat_map(|p| p.values).collect()
    }

    /// Quadrature weights matching [`SubDensity::grid`].
    pub fn weights(&self) -> Vec<f64> {
        if self.atom.is_some() {
            return vec![1.0];
        }
        self.panels.iter().flat_map(|p| RULE.mapped(p.a, p.b).1).collect()
    }

    /// Interval covered by the panels.
    pub fn support(&self) -> (f64, f64) {
        if let Some((x, _)) = self.atom {
            return (x, x);
        }
        match (self.panels.first(), self.panels.last()) {
            (Some(f), Some(l)) => (f.a, l.b),
            _ => (0.0, 0.0),
        }
    }

    pub fn panel_count(&self) -> usize {
        self.panels.len()
    }

    /// Density at `x`, interpolated within its panel. Zero off the support.
    pub fn eval(&self, x: f64) -> f64 {
        if self.atom.is_some() {
            return 0.0;
        }
        let i = self.panels.partition_point(|p| p.b < x);
        match self.panels.get(i) {
            Some(p) if p.a <= x => RULE.interpolate(p.a, p.b, &p.values, x).max(0.0),
            _ => 0.0,
        }
    }

    /// `∫ k(y) f(y) dy` over `[lo, hi]`. Panels wider than `scale` are split
    /// and the density interpolated, so that `k` is resolved on its own
    /// length scale.
    pub(crate) fn integrate<K>(&self, lo: f64, hi: f64, scale: f64, mut k: K) -> Result<f64>
    where
        K: FnMut(f64) -> Result<f64>,
    {
        if let Some((x, p)) = self.atom {
            return Ok(p * k(x)?);
        }
        let start = self.panels.partition_point(|p| p.b <= lo);
        let mut sum = 0.0;
        for panel in &self.panels[start..] {
            if panel.a >= hi {
                break;
            }
            let a = panel.a.max(lo);
            let b = panel.b.min(hi);
            let width = b - a;
            if a == panel.a && b == panel.b && width <= scale {
                let (xs, ws) = RULE.mapped(a, b);
                for i in 0..ORDER {
                    if panel.values[i] != 0.0 {
                        sum += ws[i] * panel.values[i] * k(xs[i])?;
                    }
                }
                continue;
            }
            let pieces = (width / scale).ceil().clamp(1.0, 1e6) as usize;
            let h = width / pieces as f64;
            for j in 0..pieces {
                let sa = a + j as f64 * h;
                let sb = if j + 1 == pieces { b } else { sa + h };
                let (xs, ws) = RULE.mapped(sa, sb);
                for i in 0..ORDER {
                    let v = RULE.interpolate(panel.a, panel.b, &panel.values, xs[i]);
                    if v > 0.0 {
                        sum += ws[i] * v * k(xs[i])?;
                    }
                }
            }
        }
        Ok(sum)
    }
}

/// The pair of active levels. An infinite level is inactive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Strip {
    pub upper: f64,
    pub lower: f64,
}

impl Strip {
    fn check(&self) -> Result<()> {
        if self.upper.is_infinite() && self.lower.is_infinite() {
            return Err(Error::Numerical("strip with no active level".into()));
        }
        Ok(())
    }

    /// Probability, from `y`, of leaving through the upper level by time `t`.
    fn upper_kernel(&self, t: f64, y: f64, cfg: &SolverConfig) -> Result<f64> {
        if self.upper.is_infinite() || y <= self.lower {
            return Ok(0.0);
        }
        if y >= self.upper {
            return Ok(1.0);
        }
        if self.lower.is_infinite() {
            Ok(hit_prob(t, self.upper - y))
        } else {
            strip_hit_upper(t, self.upper - y, self.lower - y, &cfg.kernel)
        }
    }

    fn lower_kernel(&self, t: f64, y: f64, cfg: &SolverConfig) -> Result<f64> {
        if self.lower.is_infinite() || y >= self.upper {
            return Ok(0.0);
        }
        if y <= self.lower {
            return Ok(1.0);
        }
        if self.upper.is_infinite() {
            Ok(hit_prob(t, y - self.lower))
        } else {
            strip_hit_lower(t, self.upper - y, self.lower - y, &cfg.kernel)
        }
    }

    /// Transition density from `y` to `x` over `dt` without leaving the strip.
    fn transition(&self, dt: f64, x: f64, y: f64, cfg: &SolverConfig) -> Result<f64> {
        if !(x < self.upper && x > self.lower) {
            return Ok(0.0);
        }
        match (self.upper.is_finite(), self.lower.is_finite()) {
            (true, true) => strip_density(dt, x - y, self.upper - y, self.lower - y, &cfg.kernel),
            (true, false) => Ok(killed_density(dt, x - y, self.upper - y)),
            (false, true) => Ok(killed_density(dt, y - x, y - self.lower)),
            (false, false) => Err(Error::Numerical("strip with no active level".into())),
        }
    }
}

/// Mass of `f` that leaves through the upper level within `t` (`t = ∞` allowed).
pub(crate) fn hit_upper(f: &SubDensity, strip: Strip, t: f64, cfg: &SolverConfig) -> Result<f64> {
    strip.check()?;
    if strip.upper.is_infinite() || t <= 0.0 {
        return Ok(0.0);
    }
    if t.is_infinite() {
        if strip.lower.is_infinite() {
            return Ok(f.mass());
        }
        let w = strip.upper - strip.lower;
        return f.integrate(f64::NEG_INFINITY, f64::INFINITY, f64::INFINITY, |y| {
            Ok(((y - strip.lower) / w).clamp(0.0, 1.0))
        });
    }
    let st = t.sqrt();
    let lo = strip.upper - cfg.window_sigmas * st;
    f.integrate(lo, f64::INFINITY, cfg.hit_scale * st, |y| strip.upper_kernel(t, y, cfg))
}

/// Mass of `f` that leaves through the lower level within `t`.
pub(crate) fn hit_lower(f: &SubDensity, strip: Strip, t: f64, cfg: &SolverConfig) -> Result<f64> {
    strip.check()?;
    if strip.lower.is_infinite() || t <= 0.0 {
        return Ok(0.0);
    }
    if t.is_infinite() {
        if strip.upper.is_infinite() {
            return Ok(f.mass());
        }
        let w = strip.upper - strip.lower;
        return f.integrate(f64::NEG_INFINITY, f64::INFINITY, f64::INFINITY, |y| {
            Ok(((strip.upper - y) / w).clamp(0.0, 1.0))
        });
    }
    let st = t.sqrt();
    let hi = strip.lower + cfg.window_sigmas * st;
    f.integrate(f64::NEG_INFINITY, hi, cfg.hit_scale * st, |y| strip.lower_kernel(t, y, cfg))
}

/// Density after a further `dt` inside `strip`, supported on the open strip
/// (truncated at `tail_sigmas·√t` on an inactive side).
pub(crate) fn propagate(f: &SubDensity, strip: Strip, dt: f64, cfg: &SolverConfig) -> Result<SubDensity> {
    strip.check()?;
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::Numerical(format!("propagation over dt={dt}")));
    }
    let time = f.time() + dt;
    let sd = dt.sqrt();
    let spread = cfg.window_sigmas * sd;
    let (src_lo, src_hi) = f.support();
    let far = cfg.tail_sigmas * time.sqrt();
    let lo = if strip.lower.is_finite() {
        strip.lower
    } else {
        (src_lo - spread).max(-far).min(src_lo)
    };
    let hi = if strip.upper.is_finite() {
        strip.upper
    } else {
        (src_hi + spread).min(far).max(src_hi)
    };

    let mut features = vec![lo, hi];
    for x in [src_lo, src_hi] {
        if x > lo && x < hi {
            features.push(x);
        }
    }
    let base = cfg.base_width * sd;
    let value_at = |x: f64| -> Result<f64> {
        f.integrate(x - spread, x + spread, cfg.transition_scale * sd, |y| {
            strip.transition(dt, x, y, cfg)
        })
    };
    let panels = build_panels(lo, hi, &features, base, cfg, value_at)?;
    let mass = panels
        .iter()
        .map(|p| {
            let ws = RULE.mapped(p.a, p.b).1;
            ws.iter().zip(&p.values).map(|(w, v)| w * v).sum::<f64>()
        })
        .sum();
    Ok(SubDensity {
        panels,
        atom: None,
        time,
        mass,
    })
}

/// Edges on `[lo, hi]` that start at width `base` next to every feature point
/// and double away from it.
fn graded_edges(lo: f64, hi: f64, features: &[f64], base: f64) -> Vec<f64> {
    let mut pts: Vec<f64> = features.iter().copied().filter(|x| *x >= lo && *x <= hi).collect();
    pts.push(lo);
    pts.push(hi);
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * (1.0 + b.abs()));
    let mut edges = vec![pts[0]];
    for pair in pts.windows(2) {
        let (p, q) = (pair[0], pair[1]);
        let mid = 0.5 * (p + q);
        let mut left = Vec::new();
        let mut right = Vec::new();
        let mut w = base;
        let mut e = p;
        while e + w < mid {
            e += w;
            left.push(e);
            w *= 2.0;
        }
        let mut w = base;
        let mut e = q;
        while e - w > mid {
            e -= w;
            right.push(e);
            w *= 2.0;
        }
        edges.extend(left);
        if !edges.last().is_some_and(|&l| (l - mid).abs() < 0.25 * base) && mid - p > 0.25 * base {
            edges.push(mid);
        }
        edges.extend(right.into_iter().rev());
        edges.push(q);
    }
    edges.dedup();
    edges
}

fn fill(a: f64, b: f64, value_at: &impl Fn(f64) -> Result<f64>) -> Result<Panel> {
    let (xs, _) = RULE.mapped(a, b);
    let mut values = [0.0; ORDER];
    for i in 0..ORDER {
        values[i] = value_at(xs[i])?.max(0.0);
    }
    Ok(Panel { a, b, values })
}

fn build_panels(
    lo: f64,
    hi: f64,
    features: &[f64],
    base: f64,
    cfg: &SolverConfig,
    value_at: impl Fn(f64) -> Result<f64>,
) -> Result<Vec<Panel>> {
    let edges = graded_edges(lo, hi, features, base);
    let mut panels = Vec::with_capacity(edges.len() * 2);
    for e in edges.windows(2) {
        panels.push(fill(e[0], e[1], &value_at)?);
    }
    let min_width = base * cfg.min_width_ratio;
    loop {
        let fmax = panels
            .iter()
            .flat_map(|p| p.values.iter())
            .fold(0.0f64, |m, &v| m.max(v));
        if fmax == 0.0 {
            break;
        }
        let threshold = cfg.refine_tol * fmax;
        let mut next = Vec::with_capacity(panels.len() + 8);
        let mut split = false;
        for p in panels {
            let room = next.len() < cfg.max_panels;
            if room && p.b - p.a > 2.0 * min_width && RULE.tail_magnitude(&p.values) > threshold {
                let m = 0.5 * (p.a + p.b);
                next.push(fill(p.a, m, &value_at)?);
                next.push(fill(m, p.b, &value_at)?);
                split = true;
            } else {
                next.push(p);
            }
        }
        panels = next;
        if !split || panels.len() >= cfg.max_panels {
            break;
        }
    }
    // Trim panels that carry nothing at all on the outside.
    while panels.len() > 1 && panels[0].values.iter().all(|&v| v == 0.0) {
        panels.remove(0);
    }
    while panels.len() > 1 && panels[panels.len() - 1].values.iter().all(|&v| v == 0.0) {
        panels.pop();
    }
    Ok(panels)
}
