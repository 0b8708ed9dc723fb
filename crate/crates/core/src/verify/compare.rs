use serde::{Deserialize, Serialize};

use super::mean_se;

/// Allowed excess of `Ê(τ ∧ T)` over `Ê(σ ∧ T)`, in pooled standard errors.
pub const SLACK_SE: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    /// Truncation level; `inf` for the untruncated square-root functional.
    #[serde(rename = "T", with = "crate::float_repr")]
    pub t: f64,
    pub tau: f64,
    pub sigma: f64,
    pub pooled_se: f64,
    pub passed: bool,
}

impl ComparisonRow {
    fn new(t: f64, tau: (f64, f64), sigma: (f64, f64)) -> ComparisonRow {
        let pooled_se = (tau.1 * tau.1 + sigma.1 * sigma.1).sqrt();
        ComparisonRow {
            t,
            tau: tau.0,
            sigma: sigma.0,
            pooled_se,
            passed: tau.0 <= sigma.0 + SLACK_SE * pooled_se,
        }
    }

    /// `(τ − σ)/SE`; the row passes while this stays at or below [`SLACK_SE`].
    pub fn margin_in_se(&self) -> f64 {
        if self.pooled_se > 0.0 {
            (self.tau - self.sigma) / self.pooled_se
        } else if self.tau <= self.sigma {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub rows: Vec<ComparisonRow>,
    /// The same check for `E √τ ≤ E √σ`.
    pub sqrt_functional: ComparisonRow,
    pub passed: bool,
}

impl Comparison {
    pub fn worst_margin_in_se(&self) -> f64 {
        self.rows
            .iter()
            .chain(std::iter::once(&self.sqrt_functional))
            .map(ComparisonRow::margin_in_se)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Checks `Ê(τ ∧ T) ≤ Ê(σ ∧ T) + 2·SE` for every `T`, and the concave
/// functional `E √τ ≤ E √σ` with the same slack.
pub fn compare_truncated_expectations(tau: &[f64], sigma: &[f64], t_grid: &[f64]) -> Comparison {
    let rows: Vec<ComparisonRow> = t_grid
        .iter()
        .map(|&t| {
            ComparisonRow::new(
                t,
                mean_se(tau.iter().map(move |&x| x.min(t))),
                mean_se(sigma.iter().map(move |&x| x.min(t))),
            )
        })
        .collect();
    let sqrt_functional = ComparisonRow::new(
        f64::INFINITY,
        mean_se(tau.iter().map(|x| x.sqrt())),
        mean_se(sigma.iter().map(|x| x.sqrt())),
    );
    let passed = rows.iter().all(|r| r.passed) && sqrt_functional.passed;
    Comparison {
        rows,
        sqrt_functional,
        passed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_samples_pass_with_equality() {
        let s: Vec<f64> = (1..200).map(|i| (i as f64 * 0.37).fract() * 5.0).collect();
        let c = compare_truncated_expectations(&s, &s, &[0.5, 1.0, 2.0]);
        assert!(c.passed);
        for r in &c.rows {
            assert_eq!(r.tau, r.sigma);
        }
        assert_eq!(c.worst_margin_in_se(), 0.0);
    }

    #[test]
    fn larger_times_fail() {
        let small: Vec<f64> = (0..500).map(|i| 0.1 + (i % 7) as f64 * 0.01).collect();
        let big: Vec<f64> = small.iter().map(|x| x + 1.0).collect();
        assert!(!compare_truncated_expectations(&big, &small, &[0.5, 1.0]).passed);
        assert!(compare_truncated_expectations(&small, &big, &[0.5, 1.0]).passed);
    }
}
