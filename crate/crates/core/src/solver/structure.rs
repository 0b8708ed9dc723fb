use super::Barrier;
use crate::law::DiscreteLaw;

/// Checks that the barrier is flat exactly on the atoms of `law`: the finite
/// upper levels run through the positive atoms in increasing order, the
/// finite lower levels through the negative atoms in decreasing order, each
/// held on an interval of positive length. Since consecutive levels are
/// consecutive atoms, every jump crosses a stretch without mass.
///
/// Returns the list of violations (empty when the structure holds).
pub fn check_structure(law: &DiscreteLaw, barrier: &Barrier) -> Vec<String> {
    let mut problems = Vec::new();
    let pos: Vec<f64> = law.positive_atoms().iter().map(|a| a.0).collect();
    let neg: Vec<f64> = law.negative_atoms().iter().map(|a| a.0).collect();
    check_side("upper", &pos, barrier, |b| b.upper, &mut problems);
    check_side("lower", &neg, barrier, |b| b.lower, &mut problems);
    problems
}

fn check_side(
    name: &str,
    atoms: &[f64],
    barrier: &Barrier,
    level: impl Fn(&super::Breakpoint) -> f64,
    problems: &mut Vec<String>,
) {
    // (level, total length held)
    let mut runs: Vec<(f64, f64)> = Vec::new();
    for (k, bp) in barrier.breakpoints().iter().enumerate() {
        let len = bp.t_end - barrier.start_of(k);
        let v = level(bp);
        match runs.last_mut() {
            Some(last) if last.0 == v => last.1 += len,
            _ => runs.push((v, len)),
        }
    }
    let finite: Vec<(f64, f64)> = runs.iter().copied().filter(|r| r.0.is_finite()).collect();
    if let Some(pos) = runs.iter().position(|r| r.0.is_infinite()) {
        if runs[pos..].iter().any(|r| r.0.is_finite()) {
            problems.push(format!("{name} level returns from infinity"));
        }
        if pos > 0 && pos < runs.len() && atoms.is_empty() {
            problems.push(format!("{name} level finite although the side has no atoms"));
        }
    }
    let levels: Vec<f64> = finite.iter().map(|r| r.0).collect();
    if levels != atoms {
        problems.push(format!("{name} levels {levels:?} differ from the atoms {atoms:?}"));
    }
    for (v, len) in finite {
        if !(len > 0.0) {
            problems.push(format!("{name} level {v} is held for length {len}"));
        }
    }
}
