//! Lévy and Kolmogorov distances between nondecreasing step functions.

use crate::law::DiscreteLaw;
use crate::solver::Barrier;

/// A right-continuous nondecreasing step function: `start` before the first
/// jump, then `jumps[i].1` on `[jumps[i].0, jumps[i+1].0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFn {
    pub start: f64,
    pub jumps: Vec<(f64, f64)>,
}

impl StepFn {
    pub fn new(start: f64, mut jumps: Vec<(f64, f64)>) -> StepFn {
        jumps.sort_by(|a, b| a.0.total_cmp(&b.0));
        StepFn { start, jumps }
    }

    /// Distribution function of a discrete law.
    pub fn from_law(law: &DiscreteLaw) -> StepFn {
        let mut acc = 0.0;
        let jumps = law
            .atoms()
            .iter()
            .map(|&(x, p)| {
                acc += p;
                (x, acc.min(1.0))
            })
            .collect();
        StepFn { start: 0.0, jumps }
    }

    /// Empirical distribution function of `values`.
    pub fn empirical(values: &[f64]) -> StepFn {
        let mut v: Vec<f64> = values.to_vec();
        v.sort_by(f64::total_cmp);
        let n = v.len() as f64;
        let mut jumps: Vec<(f64, f64)> = Vec::new();
        for (i, x) in v.iter().enumerate() {
            let f = (i + 1) as f64 / n;
            match jumps.last_mut() {
                Some(last) if last.0 == *x => last.1 = f,
                _ => jumps.push((*x, f)),
            }
        }
        StepFn { start: 0.0, jumps }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let i = self.jumps.partition_point(|j| j.0 <= x);
        if i == 0 {
            self.start
        } else {
            self.jumps[i - 1].1
        }
    }

    /// `self.eval(t − shift)`, computed as `x_j + shift ≤ t` so that a
    /// candidate point built as `x_j + shift` lands exactly on the jump.
    fn eval_shifted(&self, t: f64, shift: f64) -> f64 {
        let i = self.jumps.partition_point(|j| j.0 + shift <= t);
        if i == 0 {
            self.start
        } else {
            self.jumps[i - 1].1
        }
    }

    fn points(&self) -> impl Iterator<Item = f64> + '_ {
        self.jumps.iter().map(|j| j.0)
    }
}

/// `inf{ε > 0 : F(t − ε) − ε ≤ G(t) ≤ F(t + ε) + ε for all t}`.
///
/// Between consecutive jump points of `G(·)`, `F(· − ε)` and `F(· + ε)` all
/// three functions are constant, so feasibility only needs checking at those
/// points and before the first of them.
pub fn levy_distance(f: &StepFn, g: &StepFn) -> f64 {
    let feasible = |eps: f64| -> bool {
        if f.start - eps > g.start || g.start > f.start + eps {
            return false;
        }
        let candidates = g
            .points()
            .chain(f.points().map(|x| x + eps))
            .chain(f.points().map(|x| x - eps));
        for t in candidates {
            let gt = g.eval(t);
            if f.eval_shifted(t, eps) - eps > gt || gt > f.eval_shifted(t, -eps) + eps {
                return false;
            }
        }
        true
    };
    if feasible(0.0) {
        return 0.0;
    }
    let mut hi = 1.0;
    let mut doublings = 0;
    while !feasible(hi) {
        hi *= 2.0;
        doublings += 1;
        if doublings > 1100 {
            return f64::INFINITY;
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        if hi - lo <= 1e-12 * hi.max(1.0) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// `sup_t |F(t) − G(t)|`.
pub fn ks_distance(f: &StepFn, g: &StepFn) -> f64 {
    let mut d = (f.start - g.start).abs();
    for t in f.points().chain(g.points()) {
        d = d.max((f.eval(t) - g.eval(t)).abs());
    }
    d
}

/// `max_i |F(x_i) − G(x_i)|` over the given nodes, for comparing an
/// empirical law with a continuous distribution function at grid points.
pub fn ks_on_nodes(f: &StepFn, g: impl Fn(f64) -> f64, nodes: &[f64]) -> f64 {
    nodes.iter().map(|&x| (f.eval(x) - g(x)).abs()).fold(0.0, f64::max)
}

/// A barrier side as a nondecreasing function of time, extended to `t ≤ 0`
/// by `0` for `t < −1` and by its initial level on `[−1, 0]`.
fn side_fn(barrier: &Barrier, upper: bool) -> Option<StepFn> {
    let level = |i: usize| {
        let b = &barrier.breakpoints()[i];
        if upper {
            b.upper
        } else {
            -b.lower
        }
    };
    let n = barrier.len();
    if (0..n).any(|i| level(i).is_infinite()) {
        return None;
    }
    let mut jumps = vec![(-1.0, level(0))];
    for i in 1..n {
        jumps.push((barrier.start_of(i), level(i)));
    }
    Some(StepFn { start: 0.0, jumps })
}

/// Lévy distance between two barriers, taken as the larger of the distances
/// between their upper functions `b` and between their mirrored lower
/// functions `−c`. A side that is infinite throughout in both barriers is
/// skipped; a side infinite somewhere in only one makes the distance infinite.
pub fn barrier_levy_distance(a: &Barrier, b: &Barrier) -> f64 {
    let mut d: f64 = 0.0;
    for upper in [true, false] {
        let all_inf = |x: &Barrier| {
            x.breakpoints()
                .iter()
                .all(|bp| if upper { bp.upper.is_infinite() } else { bp.lower.is_infinite() })
        };
        if all_inf(a) && all_inf(b) {
            continue;
        }
        match (side_fn(a, upper), side_fn(b, upper)) {
            (Some(fa), Some(fb)) => d = d.max(levy_distance(&fa, &fb)),
            _ => return f64::INFINITY,
        }
    }
    d
}
