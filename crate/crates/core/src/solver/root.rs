use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Settings for [`find_time_increment`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RootOptions {
    /// Relative width of the final bracket.
    pub tol: f64,
    /// Absolute slack on probabilities when deciding the root is at infinity.
    pub slack: f64,
    /// First trial time of the bracket search.
    pub start: f64,
}

impl Default for RootOptions {
    fn default() -> Self {
        RootOptions {
            tol: 1e-10,
            slack: 1e-7,
            start: 1.0,
        }
    }
}

/// A time increment together with `|g(dt) − target|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Increment {
    pub dt: f64,
    pub residual: f64,
}

impl Increment {
    pub fn infinite(residual: f64) -> Increment {
        Increment {
            dt: f64::INFINITY,
            residual,
        }
    }

    pub fn is_infinite(&self) -> bool {
        self.dt.is_infinite()
    }
}

const MAX_EXPANSIONS: usize = 2100;
const MAX_BISECTIONS: usize = 400;

/// Smallest `t` with `g(t) = target` for a nondecreasing `g` with `g(0) = 0`
/// and `g(∞) = limit`.
///
/// Returns `0` for a non-positive target and `∞` when the target equals the
/// limit up to `opts.slack`.
pub fn find_time_increment<G>(mut g: G, target: f64, limit: f64, opts: &RootOptions) -> Result<Increment>
where
    G: FnMut(f64) -> Result<f64>,
{
    if target <= 0.0 {
        return Ok(Increment {
            dt: 0.0,
            residual: target.abs(),
        });
    }
    if (target - limit).abs() <= opts.slack {
        return Ok(Increment::infinite((target - limit).abs()));
    }
    if target > limit {
        return Err(Error::TargetExceedsMass {
            target,
            available: limit,
        });
    }

    let start = if opts.start > 0.0 && opts.start.is_finite() {
        opts.start
    } else {
        1.0
    };
    let (mut lo, mut hi);
    let v = g(start)?;
    if v >= target {
        hi = start;
        lo = start;
        let mut found = false;
        for _ in 0..MAX_EXPANSIONS {
            lo *= 0.5;
            if lo < f64::MIN_POSITIVE {
                break;
            }
            if g(lo)? < target {
                found = true;
                break;
            }
            hi = lo;
        }
        if !found {
            return Err(Error::RootNotBracketed { target });
        }
    } else {
        lo = start;
        hi = start;
        let mut found = false;
        for _ in 0..MAX_EXPANSIONS {
            hi *= 2.0;
            if !hi.is_finite() {
                break;
            }
            if g(hi)? >= target {
                found = true;
                break;
            }
            lo = hi;
        }
        if !found {
            return Err(Error::RootNotBracketed { target });
        }
    }

    for _ in 0..MAX_BISECTIONS {
        if hi - lo <= opts.tol * hi {
            break;
        }
        // Geometric midpoints while the bracket spans orders of magnitude.
        let mid = if hi > 4.0 * lo { (lo * hi).sqrt() } else { 0.5 * (lo + hi) };
        if g(mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let dt = 0.5 * (lo + hi);
    let residual = (g(dt)? - target).abs();
    Ok(Increment { dt, residual })
}
