//! Fixed-order Gauss–Legendre panels.
//!
//! Every panel carries `ORDER` nodes. Besides the quadrature rule this module
//! provides barycentric interpolation on the same nodes and the two highest
//! Legendre coefficients of the interpolant, which the sub-density builder
//! uses as its refinement indicator.

use std::sync::LazyLock;

pub const ORDER: usize = 16;

pub struct Rule {
    /// Nodes on [-1, 1], increasing.
    pub nodes: [f64; ORDER],
    pub weights: [f64; ORDER],
    bary: [f64; ORDER],
    /// `legendre[n][i]` = P_n(nodes[i]) scaled by (2n+1)/2 * weights[i], for the top two degrees.
    tail: [[f64; ORDER]; 2],
}

pub static RULE: LazyLock<Rule> = LazyLock::new(Rule::new);

fn legendre(n: usize, x: f64) -> (f64, f64) {
    // returns (P_n(x), P_n'(x))
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

impl Rule {
    fn new() -> Self {
        let n = ORDER;
        let mut nodes = [0.0; ORDER];
        let mut weights = [0.0; ORDER];
        for i in 0..n {
            // Chebyshev-like initial guess, then Newton.
            let mut x = -(std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, dp) = legendre(n, x);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, dp) = legendre(n, x);
            nodes[i] = x;
            weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        let mut bary = [0.0; ORDER];
        for i in 0..n {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            bary[i] = sign * ((1.0 - nodes[i] * nodes[i]) * weights[i]).sqrt();
        }
        let mut tail = [[0.0; ORDER]; 2];
        for (row, deg) in [n - 2, n - 1].into_iter().enumerate() {
            let scale = (2.0 * deg as f64 + 1.0) / 2.0;
            for i in 0..n {
                tail[row][i] = scale * weights[i] * legendre(deg, nodes[i]).0;
            }
        }
        Rule {
            nodes,
            weights,
            bary,
            tail,
        }
    }

    /// Nodes and weights mapped to [a, b].
    pub fn mapped(&self, a: f64, b: f64) -> ([f64; ORDER], [f64; ORDER]) {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut xs = [0.0; ORDER];
        let mut ws = [0.0; ORDER];
        for i in 0..ORDER {
            xs[i] = mid + half * self.nodes[i];
            ws[i] = half * self.weights[i];
        }
        (xs, ws)
    }

    /// Interpolates panel values (given at the mapped nodes of [a, b]) at `x`.
    pub fn interpolate(&self, a: f64, b: f64, values: &[f64], x: f64) -> f64 {
        let s = (2.0 * x - a - b) / (b - a);
        let mut num = 0.0;
        let mut den = 0.0;
        for ((&node, &w), &v) in self.nodes.iter().zip(&self.bary).zip(values) {
            let d = s - node;
            if d == 0.0 {
                return v;
            }
            let c = w / d;
            num += c * v;
            den += c;
        }
        num / den
    }

    /// Sum of the magnitudes of the two highest Legendre coefficients.
    pub fn tail_magnitude(&self, values: &[f64]) -> f64 {
        self.tail
            .iter()
            .map(|row| row.iter().zip(values).map(|(c, v)| c * v).sum::<f64>().abs())
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials_exactly() {
        let (xs, ws) = RULE.mapped(-0.5, 2.0);
        let got: f64 = xs.iter().zip(&ws).map(|(x, w)| w * x.powi(31)).sum();
        let exact = (2.0f64.powi(32) - 0.5f64.powi(32)) / 32.0;
        assert!((got - exact).abs() < 1e-12 * exact);
        let total: f64 = RULE.weights.iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
    }

    #[test]
    fn interpolation_reproduces_smooth_function() {
        let (a, b) = (1.0, 1.7);
        let (xs, _) = RULE.mapped(a, b);
        let vals: Vec<f64> = xs.iter().map(|x| (3.0 * x).sin()).collect();
        for k in 0..20 {
            let x = a + (b - a) * k as f64 / 19.0;
            let err = (RULE.interpolate(a, b, &vals, x) - (3.0 * x).sin()).abs();
            assert!(err < 1e-13, "x={x} err={err}");
        }
    }

    #[test]
    fn tail_detects_kinks() {
        let (xs, _) = RULE.mapped(-1.0, 1.0);
        let smooth: Vec<f64> = xs.iter().map(|x| (-x * x).exp()).collect();
        let kink: Vec<f64> = xs.iter().map(|x: &f64| x.abs()).collect();
        assert!(RULE.tail_magnitude(&smooth) < 1e-7);
        assert!(RULE.tail_magnitude(&kink) > 1e-3);
    }
}
