use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::float_repr::{format_f64, parse_f64};

/// On `(previous t_end, t_end]` the upper level is `upper` and the lower one `lower`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Breakpoint {
    #[serde(with = "crate::float_repr")]
    pub t_end: f64,
    #[serde(with = "crate::float_repr")]
    pub upper: f64,
    #[serde(with = "crate::float_repr")]
    pub lower: f64,
}

/// Left-continuous step functions `b ≥ 0 ≥ c`; the process stops the first
/// time `B_t ≥ b(t)` or `B_t ≤ c(t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BarrierRepr", into = "BarrierRepr")]
pub struct Barrier {
    breakpoints: Vec<Breakpoint>,
}

#[derive(Serialize, Deserialize)]
struct BarrierRepr {
    breakpoints: Vec<Breakpoint>,
}

impl TryFrom<BarrierRepr> for Barrier {
    type Error = Error;
    fn try_from(r: BarrierRepr) -> Result<Barrier> {
        Barrier::new(r.breakpoints)
    }
}

impl From<Barrier> for BarrierRepr {
    fn from(b: Barrier) -> BarrierRepr {
        BarrierRepr {
            breakpoints: b.breakpoints,
        }
    }
}

pub const CSV_HEADER: &str = "t_end,upper,lower";

impl Barrier {
    pub fn new(breakpoints: Vec<Breakpoint>) -> Result<Barrier> {
        let bad = |msg: String| Err(Error::InvalidBarrier(msg));
        let Some(last) = breakpoints.last() else {
            return bad("no breakpoints".into());
        };
        if last.t_end != f64::INFINITY {
            return bad(format!("last breakpoint ends at {} instead of inf", last.t_end));
        }
        for (i, bp) in breakpoints.iter().enumerate() {
            if bp.t_end.is_nan() || bp.upper.is_nan() || bp.lower.is_nan() {
                return bad(format!("NaN in breakpoint {i}"));
            }
            if !(bp.t_end > 0.0) {
                return bad(format!("breakpoint {i} ends at non-positive time {}", bp.t_end));
            }
            if !(bp.upper > 0.0) {
                return bad(format!("upper level {} at breakpoint {i} is not positive", bp.upper));
            }
            if !(bp.lower < 0.0) {
                return bad(format!("lower level {} at breakpoint {i} is not negative", bp.lower));
            }
            if bp.upper.is_infinite() && bp.lower.is_infinite() {
                return bad(format!("both levels infinite at breakpoint {i}"));
            }
            if i > 0 {
                let prev = &breakpoints[i - 1];
                if !(prev.t_end < bp.t_end) {
                    return bad(format!("times not increasing at breakpoint {i}"));
                }
                if bp.upper < prev.upper {
                    return bad(format!("upper level decreases at breakpoint {i}"));
                }
                if bp.lower > prev.lower {
                    return bad(format!("lower level increases at breakpoint {i}"));
                }
            }
        }
        Ok(Barrier { breakpoints })
    }

    /// Constant levels for all time.
    pub fn constant(upper: f64, lower: f64) -> Result<Barrier> {
        Barrier::new(vec![Breakpoint {
            t_end: f64::INFINITY,
            upper,
            lower,
        }])
    }

    pub fn breakpoints(&self) -> &[Breakpoint] {
        &self.breakpoints
    }

    pub fn len(&self) -> usize {
        self.breakpoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.breakpoints.is_empty()
    }

    /// Index of the interval containing `t` (`t ≤ 0` maps to the first one).
    pub fn interval_at(&self, t: f64) -> usize {
        self.breakpoints.partition_point(|b| b.t_end < t)
    }

    /// `(b(t), c(t))`.
    pub fn levels_at(&self, t: f64) -> (f64, f64) {
        let bp = &self.breakpoints[self.interval_at(t).min(self.breakpoints.len() - 1)];
        (bp.upper, bp.lower)
    }

    /// Start time of interval `k`.
    pub fn start_of(&self, k: usize) -> f64 {
        if k == 0 {
            0.0
        } else {
            self.breakpoints[k - 1].t_end
        }
    }

    /// The barrier embedding the law of `−X` when `self` embeds `X`.
    pub fn reflect(&self) -> Barrier {
        Barrier {
            breakpoints: self
                .breakpoints
                .iter()
                .map(|b| Breakpoint {
                    t_end: b.t_end,
                    upper: -b.lower,
                    lower: -b.upper,
                })
                .collect(),
        }
    }

    /// Time at which the upper level becomes `+∞`, if it ever does.
    pub fn upper_infinite_from(&self) -> Option<f64> {
        let k = self.breakpoints.iter().position(|b| b.upper.is_infinite())?;
        Some(self.start_of(k))
    }

    pub fn lower_infinite_from(&self) -> Option<f64> {
        let k = self.breakpoints.iter().position(|b| b.lower.is_infinite())?;
        Some(self.start_of(k))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for b in &self.breakpoints {
            let _ = writeln!(
                out,
                "{},{},{}",
                format_f64(b.t_end),
                format_f64(b.upper),
                format_f64(b.lower)
            );
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Barrier> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        match lines.next() {
            Some(h) if h.trim() == CSV_HEADER => {}
            other => {
                return Err(Error::InvalidBarrier(format!(
                    "expected header {CSV_HEADER:?}, found {other:?}"
                )))
            }
        }
        let mut bps = Vec::new();
        for (i, line) in lines.enumerate() {
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != 3 {
                return Err(Error::InvalidBarrier(format!("row {i} has {} columns", cells.len())));
            }
            let num = |s: &str| {
                parse_f64(s).ok_or_else(|| Error::InvalidBarrier(format!("row {i}: bad number {s:?}")))
            };
            bps.push(Breakpoint {
                t_end: num(cells[0])?,
                upper: num(cells[1])?,
                lower: num(cells[2])?,
            });
        }
        Barrier::new(bps)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Barrier {
        Barrier::new(vec![
            Breakpoint { t_end: 1.5, upper: 1.0, lower: -1.0 },
            Breakpoint { t_end: 2.25, upper: 2.0, lower: -1.0 },
            Breakpoint { t_end: f64::INFINITY, upper: f64::INFINITY, lower: -1.0 },
        ])
        .unwrap()
    }

    #[test]
    fn left_continuous_lookup() {
        let b = sample();
        assert_eq!(b.levels_at(0.0), (1.0, -1.0));
        assert_eq!(b.levels_at(1.5), (1.0, -1.0));
        assert_eq!(b.levels_at(1.5000001), (2.0, -1.0));
        assert_eq!(b.levels_at(1e9), (f64::INFINITY, -1.0));
        assert_eq!(b.upper_infinite_from(), Some(2.25));
        assert_eq!(b.lower_infinite_from(), None);
    }

    #[test]
    fn csv_and_json_round_trip() {
        let b = sample();
        let csv = b.to_csv();
        assert!(csv.contains("inf,inf,-1.0"));
        assert_eq!(Barrier::from_csv(&csv).unwrap(), b);
        let json = serde_json::to_string(&b).unwrap();
        assert!(json.contains("\"inf\""));
        assert_eq!(serde_json::from_str::<Barrier>(&json).unwrap(), b);
        let r = b.reflect();
        assert_eq!(r.levels_at(2.0), (1.0, -2.0));
        assert_eq!(r.reflect(), b);
    }

    #[test]
    fn invariants_enforced() {
        let bp = |t, u, l| Breakpoint { t_end: t, upper: u, lower: l };
        assert!(Barrier::new(vec![]).is_err());
        assert!(Barrier::new(vec![bp(1.0, 1.0, -1.0)]).is_err());
        assert!(Barrier::new(vec![bp(f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY)]).is_err());
        assert!(Barrier::new(vec![bp(2.0, 2.0, -1.0), bp(f64::INFINITY, 1.0, -1.0)]).is_err());
        assert!(Barrier::new(vec![bp(2.0, 1.0, -2.0), bp(f64::INFINITY, 1.0, -1.0)]).is_err());
        assert!(Barrier::new(vec![bp(2.0, 1.0, -1.0), bp(2.0, 2.0, -1.0), bp(f64::INFINITY, 2.0, -1.0)]).is_err());
        assert!(Barrier::from_csv("t,u,l\n").is_err());
    }
}
