//! Gauss–Legendre quadrature on finite intervals.

use alloc::vec::Vec;
// Float supplies exp/cos/... under no_std; std's inherent methods shadow it.
#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result};

/// A quadrature rule on a finite interval `[a, b]`.
///
/// Nodes are strictly inside the interval and weights are positive; an
/// `n`-point rule integrates polynomials up to degree `2n - 1` exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub interval: (f64, f64),
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Apply the rule to `f`.
    pub fn integrate<T, F>(&self, mut f: F) -> T
    where
        F: FnMut(f64) -> T,
        T: core::ops::Mul<f64, Output = T> + core::iter::Sum,
    {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| f(x) * w)
            .sum()
    }

    /// Concatenate per-cell rules into one composite rule.
    pub fn concat(rules: &[QuadratureRule]) -> QuadratureRule {
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for r in rules {
            nodes.extend_from_slice(&r.nodes);
            weights.extend_from_slice(&r.weights);
        }
        let a = rules.first().map(|r| r.interval.0).unwrap_or(0.0);
        let b = rules.last().map(|r| r.interval.1).unwrap_or(0.0);
        QuadratureRule { nodes, weights, interval: (a, b) }
    }
}

/// Legendre polynomial `P_n` and its derivative at `x`, by the three-term
/// recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for m in 1..n {
        let m = m as f64;
        let p2 = ((2.0 * m + 1.0) * x * p1 - m * p0) / (m + 1.0);
        p0 = p1;
        p1 = p2;
    }
    // P_n'(x) = n (x P_n - P_{n-1}) / (x^2 - 1)
    let dp = if (x * x - 1.0).abs() < 1e-300 {
        // endpoints; not reached by interior Gauss nodes
        0.0
    } else {
        (n as f64) * (x * p1 - p0) / (x * x - 1.0)
    };
    (p1, dp)
}

/// Gauss–Legendre rule with `n` points mapped to `[a, b]`.
///
/// Nodes are the roots of `P_n`, found by Newton iteration from the
/// Chebyshev-like initial guesses; weights are `2 / ((1 - x^2) P_n'(x)^2)`.
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> Result<QuadratureRule> {
    if n == 0 {
        return Err(Error::invalid("gauss_legendre: n must be >= 1"));
    }
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::invalid("gauss_legendre: need finite a < b"));
    }

    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);

    // roots come out in decreasing order of x; fill and reverse at the end
    for i in 0..n {
        let mut x = (core::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        // Newton; converges in a handful of steps for every root of P_n
        for _ in 0..100 {
            let (p, dp) = legendre(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes.push(mid + half * x);
        weights.push(half * w);
    }
    nodes.reverse();
    weights.reverse();
    // P_n roots are symmetric; n odd puts one at the exact midpoint
    if n % 2 == 1 {
        nodes[n / 2] = mid;
    }
    Ok(QuadratureRule { nodes, weights, interval: (a, b) })
}

/// Composite Gauss–Legendre rule over the cells of a partition
/// `breakpoints[0] < breakpoints[1] < ... < breakpoints[m]`, with `n_total`
/// points distributed proportionally to cell length (at least 2 per cell).
pub fn composite_gauss(breakpoints: &[f64], n_total: usize) -> Result<QuadratureRule> {
    if breakpoints.len() < 2 {
        return Err(Error::invalid("composite_gauss: need at least one cell"));
    }
    let total: f64 = breakpoints.last().unwrap() - breakpoints[0];
    if !(total > 0.0) {
        return Err(Error::invalid("composite_gauss: breakpoints must increase"));
    }
    let cells = breakpoints.len() - 1;
    let mut rules = Vec::with_capacity(cells);
    for c in 0..cells {
        let (lo, hi) = (breakpoints[c], breakpoints[c + 1]);
        if !(hi > lo) {
            return Err(Error::invalid("composite_gauss: breakpoints must increase"));
        }
        let share = ((n_total as f64) * (hi - lo) / total).round() as usize;
        rules.push(gauss_legendre(share.max(2), lo, hi)?);
    }
    Ok(QuadratureRule::concat(&rules))
}
