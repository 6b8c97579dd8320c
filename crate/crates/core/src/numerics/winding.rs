//! Winding numbers of sampled closed curves in the complex plane.
//!
//! The winding number of `f` along a closed path is recovered from samples
//! alone: sum the principal-value phase increments between consecutive
//! samples. This is exact — not approximate — as soon as every increment is
//! strictly below `pi` in magnitude; we demand the stronger `pi/2` so that
//! near-misses surface as errors instead of silently wrong counts.

use alloc::vec::Vec;
use num_complex::Complex64;
// Float supplies cos/round/... under no_std; std's inherent methods shadow it.
#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result};

/// Values `f(z_j)` sampled along a closed path, `z_{j+1}` adjacent to `z_j`
/// and the last sample adjacent to the first.
#[derive(Debug, Clone)]
pub struct ClosedPathSamples {
    pub values: Vec<Complex64>,
}

/// Largest phase step accepted between consecutive samples.
pub const MAX_PHASE_STEP: f64 = core::f64::consts::FRAC_PI_2;

/// Relative floor under which a sample counts as a zero on the path.
pub const ZERO_FLOOR_REL: f64 = 1e-13;

impl ClosedPathSamples {
    pub fn new(values: Vec<Complex64>) -> Self {
        ClosedPathSamples { values }
    }

    /// Net number of counterclockwise turns of `f` around the origin.
    ///
    /// Fails if any sample sits at (numerically) zero, or if some phase step
    /// reaches `pi/2` — the latter means the path was sampled too coarsely
    /// for the count to be trustworthy.
    pub fn winding_number(&self) -> Result<i64> {
        let n = self.values.len();
        if n < 3 {
            return Err(Error::invalid("winding_number: need at least 3 samples"));
        }
        let max_abs = self.values.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let floor = ZERO_FLOOR_REL * max_abs;
        let min_abs = self.values.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
        if !(min_abs > floor) || !min_abs.is_finite() || max_abs == 0.0 {
            return Err(Error::ZeroOnPath { min_abs, floor });
        }

        let mut total = 0.0;
        let mut max_step = 0.0f64;
        for j in 0..n {
            let a = self.values[j];
            let b = self.values[(j + 1) % n];
            // arg(b/a) without the division
            let step = (b * a.conj()).arg();
            max_step = max_step.max(step.abs());
            total += step;
        }
        if max_step >= MAX_PHASE_STEP {
            return Err(Error::SamplingTooCoarse { max_step });
        }

        let turns = total / core::f64::consts::TAU;
        let rounded = turns.round();
        debug_assert!((turns - rounded).abs() < 0.25);
        Ok(rounded as i64)
    }

    /// Largest phase step along the path, for adaptivity diagnostics.
    pub fn max_phase_step(&self) -> f64 {
        let n = self.values.len();
        let mut max_step = 0.0f64;
        for j in 0..n {
            let a = self.values[j];
            let b = self.values[(j + 1) % n];
            max_step = max_step.max((b * a.conj()).arg().abs());
        }
        max_step
    }
}

/// `n` points counterclockwise on the circle `|z - center| = radius`,
/// starting at angle 0. The path is closed implicitly (last connects back to
/// first).
pub fn circle_path(center: Complex64, radius: f64, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|j| {
            let t = core::f64::consts::TAU * (j as f64) / (n as f64);
            center + Complex64::new(radius * t.cos(), radius * t.sin())
        })
        .collect()
}

/// Points counterclockwise around the axis-aligned rectangle with opposite
/// corners `lo` and `hi`, `n_per_side` per edge (corners not duplicated).
pub fn rectangle_path(lo: Complex64, hi: Complex64, n_per_side: usize) -> Vec<Complex64> {
    let n = n_per_side.max(1);
    let mut pts = Vec::with_capacity(4 * n);
    let (x0, y0, x1, y1) = (lo.re, lo.im, hi.re, hi.im);
    for j in 0..n {
        let t = j as f64 / n as f64;
        pts.push(Complex64::new(x0 + t * (x1 - x0), y0));
    }
    for j in 0..n {
        let t = j as f64 / n as f64;
        pts.push(Complex64::new(x1, y0 + t * (y1 - y0)));
    }
    for j in 0..n {
        let t = j as f64 / n as f64;
        pts.push(Complex64::new(x1 - t * (x1 - x0), y1));
    }
    for j in 0..n {
        let t = j as f64 / n as f64;
        pts.push(Complex64::new(x0, y1 - t * (y1 - y0)));
    }
    pts
}
