//! Target laws: validation, quantization onto an equidistant grid, and the
//! summaries the solver and the simulator need.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{big_phi, normal_sf};

const MASS_TOL: f64 = 1e-12;
/// Atoms lighter than this are folded into a neighbour after quantization.
pub const MERGE_FLOOR: f64 = 1e-14;
/// Mass left outside the default truncation range.
pub const DEFAULT_TAIL_MASS: f64 = 1e-6;

/// A finite law on ℝ∖{0}: positions strictly increasing, probabilities
/// positive and summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(f64, f64)>", into = "Vec<(f64, f64)>")]
pub struct DiscreteLaw {
    atoms: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SupportCase {
    Positive,
    Negative,
    TwoSided,
}

fn check_atoms(atoms: &[(f64, f64)]) -> Result<()> {
    if atoms.is_empty() {
        return Err(Error::EmptyLaw);
    }
    for (i, &(x, p)) in atoms.iter().enumerate() {
        if !x.is_finite() {
            return Err(Error::InvalidSpec(format!("atom {i} has non-finite position {x}")));
        }
        if x == 0.0 && p > 0.0 {
            return Err(Error::AtomAtZero { mass: p });
        }
        if !(p > 0.0) || !p.is_finite() {
            return Err(Error::NonPositiveProb { index: i, prob: p });
        }
        if i > 0 && !(atoms[i - 1].0 < x) {
            return Err(Error::UnsortedAtoms { index: i });
        }
    }
    let total: f64 = atoms.iter().map(|a| a.1).sum();
    if (total - 1.0).abs() > MASS_TOL {
        return Err(Error::MassNotOne { total });
    }
    Ok(())
}

impl TryFrom<Vec<(f64, f64)>> for DiscreteLaw {
    type Error = Error;
    fn try_from(atoms: Vec<(f64, f64)>) -> Result<Self> {
        DiscreteLaw::new(atoms)
    }
}

impl From<DiscreteLaw> for Vec<(f64, f64)> {
    fn from(law: DiscreteLaw) -> Self {
        law.atoms
    }
}

impl DiscreteLaw {
    /// Builds a law from `(position, probability)` pairs, checking every invariant.
    pub fn new(atoms: Vec<(f64, f64)>) -> Result<Self> {
        check_atoms(&atoms)?;
        Ok(DiscreteLaw { atoms })
    }

    /// Sorts the pairs, merges repeated positions and drops zero weights
    /// before validating. Two lists describing the same law give equal results.
    pub fn canonical(mut atoms: Vec<(f64, f64)>) -> Result<Self> {
        if atoms.iter().any(|a| a.0.is_nan()) {
            return Err(Error::InvalidSpec("NaN atom position".into()));
        }
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
        for (x, p) in atoms {
            if p == 0.0 {
                continue;
            }
            match merged.last_mut() {
                Some(last) if last.0 == x => last.1 += p,
                _ => merged.push((x, p)),
            }
        }
        DiscreteLaw::new(merged)
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn positions(&self) -> impl Iterator<Item = f64> + '_ {
        self.atoms.iter().map(|a| a.0)
    }

    /// Positive atoms in increasing order.
    pub fn positive_atoms(&self) -> Vec<(f64, f64)> {
        self.atoms.iter().copied().filter(|a| a.0 > 0.0).collect()
    }

    /// Negative atoms ordered away from zero (decreasing positions).
    pub fn negative_atoms(&self) -> Vec<(f64, f64)> {
        self.atoms.iter().rev().copied().filter(|a| a.0 < 0.0).collect()
    }

    pub fn classify(&self) -> SupportCase {
        let pos = self.atoms.iter().any(|a| a.0 > 0.0);
        let neg = self.atoms.iter().any(|a| a.0 < 0.0);
        match (pos, neg) {
            (true, false) => SupportCase::Positive,
            (false, true) => SupportCase::Negative,
            _ => SupportCase::TwoSided,
        }
    }

    /// `(E X, E X²)`.
    pub fn moments(&self) -> (f64, f64) {
        self.atoms.iter().fold((0.0, 0.0), |(m1, m2), &(x, p)| {
            (m1 + p * x, m2 + p * x * x)
        })
    }

    pub fn mean(&self) -> f64 {
        self.moments().0
    }

    /// `E[X | X ≥ x]`. Requires a centered law.
    pub fn barycenter(&self, x: f64) -> Result<f64> {
        let mean = self.mean();
        if mean.abs() > 1e-10 {
            return Err(Error::NotCentered { mean });
        }
        if x <= self.atoms[0].0 {
            return Ok(mean);
        }
        let (mut num, mut den) = (0.0, 0.0);
        for &(a, p) in self.atoms.iter().rev() {
            if a < x {
                break;
            }
            num += a * p;
            den += p;
        }
        if den == 0.0 {
            // Beyond the support the conditional expectation is undefined; the
            // embedding never looks there, so continue it as the identity.
            return Ok(x);
        }
        Ok(num / den)
    }

    /// Right-continuous distribution function.
    pub fn cdf(&self, x: f64) -> f64 {
        let mut s = 0.0;
        for &(a, p) in &self.atoms {
            if a > x {
                break;
            }
            s += p;
        }
        s.min(1.0)
    }

    /// The law of `−X`.
    pub fn reflect(&self) -> DiscreteLaw {
        DiscreteLaw {
            atoms: self.atoms.iter().rev().map(|&(x, p)| (-x, p)).collect(),
        }
    }
}

/// Grid parameters for continuous laws. Either `n` (number of cells over the
/// range) or `step` must be given; `range` defaults to a window that leaves
/// [`DEFAULT_TAIL_MASS`] outside.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interpolation {
    #[default]
    Linear,
    Step,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TargetLawSpec {
    Atoms {
        atoms: Vec<(f64, f64)>,
    },
    Exponential {
        rate: f64,
        #[serde(flatten)]
        grid: Grid,
    },
    Normal {
        mean: f64,
        variance: f64,
        #[serde(flatten)]
        grid: Grid,
    },
    /// Distribution function given at points `(x, F(x))`, interpolated
    /// linearly or as a right-continuous step function.
    CdfTable {
        points: Vec<(f64, f64)>,
        #[serde(default)]
        interpolation: Interpolation,
        #[serde(flatten)]
        grid: Grid,
    },
}

/// Continuous (or tabulated) distribution used during quantization.
enum Source<'a> {
    Exponential(f64),
    Normal(f64, f64),
    Table(&'a [(f64, f64)], Interpolation),
}

impl Source<'_> {
    fn cdf(&self, x: f64) -> f64 {
        match *self {
            Source::Exponential(rate) => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-rate * x).exp_m1()
                }
            }
            Source::Normal(m, s) => big_phi((x - m) / s),
            Source::Table(pts, interp) => table_cdf(pts, interp, x, false),
        }
    }

    fn sf(&self, x: f64) -> f64 {
        match *self {
            Source::Exponential(rate) => {
                if x <= 0.0 {
                    1.0
                } else {
                    (-rate * x).exp()
                }
            }
            Source::Normal(m, s) => normal_sf((x - m) / s),
            Source::Table(..) => 1.0 - self.cdf(x),
        }
    }

    /// `P(X < x)`.
    fn cdf_left(&self, x: f64) -> f64 {
        match *self {
            Source::Table(pts, interp) => table_cdf(pts, interp, x, true),
            _ => self.cdf(x),
        }
    }

    fn default_range(&self) -> [f64; 2] {
        match *self {
            Source::Exponential(rate) => [0.0, (1.0 / DEFAULT_TAIL_MASS).ln() / rate],
            Source::Normal(m, s) => {
                // Φ⁻¹(1 − DEFAULT_TAIL_MASS / 2)
                let z = 4.891_638_475_699_412;
                [m - z * s, m + z * s]
            }
            Source::Table(pts, _) => [pts[0].0, pts[pts.len() - 1].0],
        }
    }
}

fn table_cdf(pts: &[(f64, f64)], interp: Interpolation, x: f64, left: bool) -> f64 {
    let first = pts[0];
    let last = pts[pts.len() - 1];
    if x < first.0 || (left && x == first.0) {
        return 0.0;
    }
    if x > last.0 || (!left && x == last.0) {
        return last.1;
    }
    // index of the first point strictly above x (or at/above for left limits)
    let i = if left {
        pts.partition_point(|p| p.0 < x)
    } else {
        pts.partition_point(|p| p.0 <= x)
    };
    match interp {
        Interpolation::Step => pts[i - 1].1,
        Interpolation::Linear => {
            let (x0, f0) = pts[i - 1];
            let (x1, f1) = pts[i];
            f0 + (f1 - f0) * (x - x0) / (x1 - x0)
        }
    }
}

fn check_grid(grid: &Grid) -> Result<()> {
    match (grid.n, grid.step) {
        (None, None) => {
            return Err(Error::InvalidSpec("grid needs either `n` or `step`".into()));
        }
        (Some(0), _) => return Err(Error::InvalidSpec("n must be positive".into())),
        (_, Some(s)) if !(s > 0.0) || !s.is_finite() => {
            return Err(Error::InvalidSpec(format!("step must be positive, got {s}")));
        }
        _ => {}
    }
    if let Some([lo, hi]) = grid.range {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidSpec(format!("invalid range [{lo}, {hi}]")));
        }
    }
    Ok(())
}

/// Checks every invariant of the specification and returns it unchanged.
pub fn validate(spec: &TargetLawSpec) -> Result<TargetLawSpec> {
    match spec {
        TargetLawSpec::Atoms { atoms } => check_atoms(atoms)?,
        TargetLawSpec::Exponential { rate, grid } => {
            if !(*rate > 0.0) || !rate.is_finite() {
                return Err(Error::InvalidSpec(format!("rate must be positive, got {rate}")));
            }
            check_grid(grid)?;
        }
        TargetLawSpec::Normal { mean, variance, grid } => {
            if !mean.is_finite() {
                return Err(Error::InvalidSpec(format!("mean must be finite, got {mean}")));
            }
            if !(*variance > 0.0) || !variance.is_finite() {
                return Err(Error::InvalidSpec(format!(
                    "variance must be positive, got {variance}"
                )));
            }
            check_grid(grid)?;
        }
        TargetLawSpec::CdfTable { points, interpolation, grid } => {
            check_grid(grid)?;
            if points.len() < 2 {
                return Err(Error::InvalidSpec("cdf table needs at least two points".into()));
            }
            for (i, &(x, f)) in points.iter().enumerate() {
                if !x.is_finite() || !(0.0..=1.0).contains(&f) {
                    return Err(Error::InvalidSpec(format!("bad cdf table point {i}")));
                }
                if i > 0 {
                    if !(points[i - 1].0 < x) {
                        return Err(Error::UnsortedAtoms { index: i });
                    }
                    if f < points[i - 1].1 {
                        return Err(Error::InvalidSpec(format!(
                            "cdf table decreases at point {i}"
                        )));
                    }
                }
            }
            if points[0].1 != 0.0 && *interpolation == Interpolation::Linear {
                return Err(Error::InvalidSpec("cdf table must start at 0".into()));
            }
            let total = points[points.len() - 1].1;
            if (total - 1.0).abs() > MASS_TOL {
                return Err(Error::MassNotOne { total });
            }
            let src = Source::Table(points, *interpolation);
            let zero = src.cdf(0.0) - src.cdf_left(0.0);
            if zero > 0.0 {
                return Err(Error::AtomAtZero { mass: zero });
            }
        }
    }
    Ok(spec.clone())
}

/// Discretizes a specification into a [`DiscreteLaw`]. The variable is first
/// clamped to the range `[γ, β]`, then positive mass is moved up to the right
/// end of its cell `(x_{k−1}, x_k]` and negative mass down to the left end of
/// `[y_j, y_{j−1})`, with `x_k = min(k·s, β)` and `y_j = max(−j·s, γ)`.
pub fn quantize(spec: &TargetLawSpec) -> Result<DiscreteLaw> {
    validate(spec)?;
    let (src, grid) = match spec {
        TargetLawSpec::Atoms { atoms } => return DiscreteLaw::new(atoms.clone()),
        TargetLawSpec::Exponential { rate, grid } => (Source::Exponential(*rate), grid),
        TargetLawSpec::Normal { mean, variance, grid } => {
            (Source::Normal(*mean, variance.sqrt()), grid)
        }
        TargetLawSpec::CdfTable { points, interpolation, grid } => {
            (Source::Table(points, *interpolation), grid)
        }
    };
    let [lo, hi] = grid.range.unwrap_or_else(|| src.default_range());
    let step = match grid.step {
        Some(s) => s,
        None => (hi.max(0.0) - lo.min(0.0)) / grid.n.unwrap_or(1) as f64,
    };

    // Distribution of the clamped variable: F_N(x) and P(X_N < x), with the
    // upper tail written through the survival function to avoid cancellation.
    let upper = |x: f64| -> f64 {
        // P(X_N > x)
        if x < lo {
            1.0
        } else if x >= hi {
            0.0
        } else {
            src.sf(x)
        }
    };
    let lower_left = |x: f64| -> f64 {
        // P(X_N < x)
        if x <= lo {
            0.0
        } else if x > hi {
            1.0
        } else {
            src.cdf_left(x)
        }
    };
    let lower = |x: f64| -> f64 {
        // P(X_N ≤ x)
        if x < lo {
            0.0
        } else if x >= hi {
            1.0
        } else {
            src.cdf(x)
        }
    };

    let zero_mass = lower(0.0) - lower_left(0.0);
    if zero_mass > MASS_TOL {
        return Err(Error::AtomAtZero { mass: zero_mass });
    }

    let mut atoms: Vec<(f64, f64)> = Vec::new();
    // Negative cells [y_j, y_{j−1}), from the outermost inwards.
    if lo < 0.0 {
        let cells = (-lo / step).ceil() as usize;
        for j in (1..=cells).rev() {
            let y = (-(j as f64) * step).max(lo);
            let y_prev = -((j - 1) as f64) * step;
            let p = (lower_left(y_prev) - lower_left(y)).max(0.0);
            atoms.push((y, p));
        }
    }
    if hi > 0.0 {
        let cells = (hi / step).ceil() as usize;
        for k in 1..=cells {
            let x = (k as f64 * step).min(hi);
            let x_prev = (k - 1) as f64 * step;
            let p = if lower(x_prev) >= 0.5 {
                upper(x_prev) - upper(x)
            } else {
                lower(x) - lower(x_prev)
            };
            atoms.push((x, p.max(0.0)));
        }
    }
    atoms.retain(|a| a.1 > 0.0);
    merge_light_atoms(&mut atoms);
    if atoms.is_empty() {
        return Err(Error::EmptyLaw);
    }
    let total: f64 = atoms.iter().map(|a| a.1).sum();
    for a in &mut atoms {
        a.1 /= total;
    }
    DiscreteLaw::new(atoms)
}

/// Folds atoms below [`MERGE_FLOOR`] into the neighbour further from zero, or
/// the inner neighbour for the outermost atom on a side.
fn merge_light_atoms(atoms: &mut Vec<(f64, f64)>) {
    loop {
        let Some(i) = atoms.iter().position(|a| a.1 < MERGE_FLOOR) else {
            return;
        };
        if atoms.len() == 1 {
            return;
        }
        let x = atoms[i].0;
        let outward = if x > 0.0 {
            (i + 1 < atoms.len()).then_some(i + 1)
        } else {
            i.checked_sub(1)
        };
        let inward = if x > 0.0 {
            i.checked_sub(1).filter(|&j| atoms[j].0 > 0.0)
        } else {
            (i + 1 < atoms.len() && atoms[i + 1].0 < 0.0).then_some(i + 1)
        };
        let target = outward.or(inward).unwrap_or(if i == 0 { 1 } else { i - 1 });
        let p = atoms[i].1;
        atoms[target].1 += p;
        atoms.remove(i);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn law(a: &[(f64, f64)]) -> DiscreteLaw {
        DiscreteLaw::new(a.to_vec()).unwrap()
    }

    #[test]
    fn validation_errors() {
        let ok = TargetLawSpec::Atoms { atoms: vec![(1.0, 1.0)] };
        assert!(validate(&ok).is_ok());
        let zero = TargetLawSpec::Atoms { atoms: vec![(0.0, 0.5), (1.0, 0.5)] };
        assert!(matches!(validate(&zero), Err(Error::AtomAtZero { .. })));
        let short = TargetLawSpec::Atoms { atoms: vec![(-1.0, 0.6), (1.0, 0.3)] };
        assert!(matches!(validate(&short), Err(Error::MassNotOne { .. })));
        let neg = TargetLawSpec::Atoms { atoms: vec![(-1.0, 1.1), (1.0, -0.1)] };
        assert!(matches!(validate(&neg), Err(Error::NonPositiveProb { index: 1, .. })));
        let unsorted = TargetLawSpec::Atoms { atoms: vec![(1.0, 0.5), (-1.0, 0.5)] };
        assert!(matches!(validate(&unsorted), Err(Error::UnsortedAtoms { index: 1 })));
        let rate = TargetLawSpec::Exponential { rate: 0.0, grid: Grid { n: Some(4), ..Grid::default() } };
        assert!(matches!(validate(&rate), Err(Error::InvalidSpec(_))));
        let var = TargetLawSpec::Normal { mean: 0.0, variance: -1.0, grid: Grid { n: Some(4), ..Grid::default() } };
        assert!(matches!(validate(&var), Err(Error::InvalidSpec(_))));
        let nogrid = TargetLawSpec::Exponential { rate: 1.0, grid: Grid::default() };
        assert!(matches!(validate(&nogrid), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn classify_cases() {
        assert_eq!(law(&[(1.0, 0.5), (2.0, 0.5)]).classify(), SupportCase::Positive);
        assert_eq!(law(&[(-1.0, 1.0)]).classify(), SupportCase::Negative);
        assert_eq!(law(&[(-1.0, 0.5), (1.0, 0.5)]).classify(), SupportCase::TwoSided);
    }

    #[test]
    fn moments_and_barycenter() {
        assert_eq!(law(&[(-1.0, 0.5), (1.0, 0.5)]).moments(), (0.0, 1.0));
        let (m, s) = law(&[(-1.0, 2.0 / 3.0), (1.0, 1.0 / 3.0)]).moments();
        assert!((m + 1.0 / 3.0).abs() < 1e-15 && (s - 1.0).abs() < 1e-15);

        let sym = law(&[(-1.0, 0.5), (1.0, 0.5)]);
        assert_eq!(sym.barycenter(0.0).unwrap(), 1.0);
        assert_eq!(sym.barycenter(-1.0).unwrap(), 0.0);
        let skew = law(&[(-1.5, 0.4), (1.0, 0.6)]);
        assert!((skew.barycenter(0.5).unwrap() - 1.0).abs() < 1e-15);
        let off = law(&[(1.0, 0.5), (2.0, 0.5)]);
        assert!(matches!(off.barycenter(0.0), Err(Error::NotCentered { .. })));
    }

    #[test]
    fn exponential_quantization() {
        let spec = TargetLawSpec::Exponential {
            rate: 1.0,
            grid: Grid { step: Some(0.5), range: Some([0.0, 10.0]), n: None },
        };
        let q = quantize(&spec).unwrap();
        assert_eq!(q.len(), 20);
        let (x, p) = q.atoms()[0];
        assert_eq!(x, 0.5);
        assert!((p - 0.393_469_340_287_366_6).abs() < 1e-15);
        let total: f64 = q.atoms().iter().map(|a| a.1).sum();
        assert!((total - 1.0).abs() < 1e-12);
        // last atom carries the lumped tail
        let (x, p) = q.atoms()[19];
        assert_eq!(x, 10.0);
        assert!((p - ((-9.5f64).exp())).abs() < 1e-15);
    }

    #[test]
    fn normal_quantization_uses_phi_differences() {
        let spec = TargetLawSpec::Normal {
            mean: 1.0,
            variance: 1.0,
            grid: Grid { step: Some(0.5), range: Some([-5.0, 6.0]), n: None },
        };
        let q = quantize(&spec).unwrap();
        let total: f64 = q.atoms().iter().map(|a| a.1).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert_eq!(q.classify(), SupportCase::TwoSided);
        for &(x, p) in q.atoms() {
            assert!((x / 0.5 - (x / 0.5).round()).abs() < 1e-12, "x={x} not a cell end");
            let expect = if x == -5.0 {
                big_phi(-4.5 - 1.0)
            } else if x == 6.0 {
                normal_sf(5.5 - 1.0)
            } else if x > 0.0 {
                big_phi(x - 1.0) - big_phi(x - 0.5 - 1.0)
            } else {
                big_phi(x + 0.5 - 1.0) - big_phi(x - 1.0)
            };
            assert!((p - expect).abs() < 1e-14, "x={x} p={p} expect={expect}");
        }
    }

    #[test]
    fn atoms_pass_through_quantization() {
        let atoms = vec![(-2.0, 0.25), (0.5, 0.25), (1.0, 0.5)];
        let q = quantize(&TargetLawSpec::Atoms { atoms: atoms.clone() }).unwrap();
        assert_eq!(q.atoms(), atoms.as_slice());
    }

    #[test]
    fn truncation_to_origin_is_rejected() {
        let spec = TargetLawSpec::Normal {
            mean: 0.0,
            variance: 1.0,
            grid: Grid { step: Some(0.5), range: Some([-4.0, 0.0]), n: None },
        };
        assert!(matches!(quantize(&spec), Err(Error::AtomAtZero { .. })));
    }

    #[test]
    fn grid_count_sets_step() {
        let spec = TargetLawSpec::Exponential {
            rate: 1.0,
            grid: Grid { n: Some(100), range: Some([0.0, 12.0]), step: None },
        };
        let q = quantize(&spec).unwrap();
        assert_eq!(q.len(), 100);
        assert!((q.atoms()[0].0 - 0.12).abs() < 1e-15);
        assert_eq!(q.atoms()[99].0, 12.0);
    }

    #[test]
    fn cdf_table_step_and_linear() {
        let pts = vec![(-1.0, 0.0), (1.0, 1.0)];
        let spec = TargetLawSpec::CdfTable {
            points: pts.clone(),
            interpolation: Interpolation::Linear,
            grid: Grid { step: Some(0.5), ..Grid::default() },
        };
        let q = quantize(&spec).unwrap();
        assert_eq!(q.atoms(), &[(-1.0, 0.25), (-0.5, 0.25), (0.5, 0.25), (1.0, 0.25)]);

        let steps = TargetLawSpec::CdfTable {
            points: vec![(-2.0, 0.3), (1.5, 1.0)],
            interpolation: Interpolation::Step,
            grid: Grid { step: Some(1.0), ..Grid::default() },
        };
        let q = quantize(&steps).unwrap();
        assert_eq!(q.atoms(), &[(-2.0, 0.3), (1.5, 0.7)]);

        let at_zero = TargetLawSpec::CdfTable {
            points: vec![(-1.0, 0.2), (0.0, 0.5), (1.0, 1.0)],
            interpolation: Interpolation::Step,
            grid: Grid { step: Some(1.0), ..Grid::default() },
        };
        assert!(matches!(validate(&at_zero), Err(Error::AtomAtZero { .. })));
    }

    #[test]
    fn light_atoms_merge_outward() {
        let mut atoms = vec![(-1.0, 0.5), (0.5, 1e-16), (1.0, 0.5 - 1e-16)];
        merge_light_atoms(&mut atoms);
        assert_eq!(atoms.len(), 2);
        assert_eq!(atoms[1].0, 1.0);
        let mut atoms = vec![(-1.0, 0.5), (0.5, 0.5 - 1e-16), (1.0, 1e-16)];
        merge_light_atoms(&mut atoms);
        assert_eq!(atoms, vec![(-1.0, 0.5), (0.5, 0.5)]);
    }

    #[test]
    fn canonical_form_ignores_order() {
        let a = DiscreteLaw::canonical(vec![(2.0, 0.25), (-1.0, 0.5), (2.0, 0.25)]).unwrap();
        let b = DiscreteLaw::canonical(vec![(-1.0, 0.5), (2.0, 0.5)]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn spec_json_shapes() {
        let s: TargetLawSpec =
            serde_json::from_str(r#"{"kind": "exponential", "rate": 1.0, "n": 100, "range": [0, 12]}"#).unwrap();
        assert_eq!(
            s,
            TargetLawSpec::Exponential {
                rate: 1.0,
                grid: Grid { n: Some(100), step: None, range: Some([0.0, 12.0]) }
            }
        );
        let s: TargetLawSpec =
            serde_json::from_str(r#"{"kind": "atoms", "atoms": [[-1, 0.5], [1, 0.5]]}"#).unwrap();
        assert!(matches!(s, TargetLawSpec::Atoms { .. }));
        let bad: std::result::Result<DiscreteLaw, _> = serde_json::from_str("[[0, 1.0]]");
        assert!(bad.is_err());
    }
}
