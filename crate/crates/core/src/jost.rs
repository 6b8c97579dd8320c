//! Independent eigenvalue oracle for the half-line Dirichlet operator:
//! exact transfer-matrix propagation of the Jost solution across
//! piecewise-constant cells.
//!
//! The Jost solution `f_k` solves `-f'' + V f = k^2 f` with
//! `f_k(x) = e^{ikx}` beyond the support of `V`, and the Jost function is
//! its boundary value `f(k) = f_k(0)`. Its zeros in the open upper
//! half-plane are exactly the square roots of the eigenvalues of the
//! Dirichlet operator, with zero order equal to algebraic multiplicity, so
//! this module serves as a cross-check for the determinant route that never
//! touches a matrix discretization.

use alloc::vec::Vec;
use num_complex::Complex64;
// Float supplies hypot/ln/... under no_std; std's inherent methods shadow it.
#[allow(unused_imports)]
use num_traits::Float;

use crate::potentials::{Geometry, Potential};
use crate::zerofinder::{locate_zeros, Rectangle, Zero};
use crate::{Error, Result};

/// Jost solution data `(f, f')` at a position `x`, propagated cell by cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferState {
    pub f: Complex64,
    pub fprime: Complex64,
    pub x: f64,
}

impl TransferState {
    /// The free outgoing state `e^{ikx}` at `x`.
    pub fn outgoing(k: Complex64, x: f64) -> TransferState {
        let f = (Complex64::i() * k * x).exp();
        TransferState { f, fprime: Complex64::i() * k * f, x }
    }

    /// Propagate leftward across a cell of constant potential `v` and width
    /// `delta`, solving `-f'' + v f = k^2 f` exactly on the cell.
    ///
    /// With `kappa^2 = k^2 - v` the propagator needs only `cos(kappa d)`
    /// and `sin(kappa d)/kappa`, both even in `kappa`: no square-root
    /// branch can affect the result, and the state stays entire in `k`.
    pub fn across_cell(&self, v: Complex64, delta: f64, k: Complex64) -> Result<TransferState> {
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(Error::invalid("transfer: cell width must be positive and finite"));
        }
        let kappa_sq = k * k - v;
        let (c, s) = cell_propagator(kappa_sq, delta);
        Ok(TransferState {
            f: c * self.f - s * self.fprime,
            fprime: kappa_sq * s * self.f + c * self.fprime,
            x: self.x - delta,
        })
    }
}

/// `(cos(kappa d), sin(kappa d)/kappa)` as functions of `kappa^2`.
///
/// Near a cell's spectral threshold (`|kappa d| < 1e-3`) both factors are
/// summed as 8-term Taylor series in `(kappa d)^2`, which is
/// cancellation-free; the truncation error is far below machine precision.
fn cell_propagator(kappa_sq: Complex64, delta: f64) -> (Complex64, Complex64) {
    let w = kappa_sq * delta * delta;
    if w.norm() < 1e-6 {
        let mut cos_sum = Complex64::new(0.0, 0.0);
        let mut sinc_sum = Complex64::new(0.0, 0.0);
        let mut term = Complex64::new(1.0, 0.0);
        for m in 0..8 {
            cos_sum += term;
            sinc_sum += term / ((2 * m + 1) as f64);
            term = -term * w / (((2 * m + 1) * (2 * m + 2)) as f64);
        }
        (cos_sum, sinc_sum * delta)
    } else {
        let kappa = kappa_sq.sqrt();
        let kd = kappa * delta;
        (kd.cos(), kd.sin() / kappa)
    }
}

fn jost_cells(breakpoints: &[f64], values: &[Complex64], k: Complex64) -> Result<Complex64> {
    let r = *breakpoints.last().unwrap();
    // e^{ikR} = e^{i Re(k) R} e^{-Im(k) R}: keep the real exponent apart
    // from the unit-modulus phase, and renormalize between cells, so deep
    // half-plane momenta can neither underflow nor overflow the chain even
    // though the boundary value e^{ikR} itself may not be representable
    let mut log_scale = -k.im * r;
    let phase = Complex64::new(0.0, k.re * r).exp();
    let mut f = phase;
    let mut fprime = Complex64::i() * k * phase;
    for c in (0..values.len()).rev() {
        let kappa_sq = k * k - values[c];
        let (cos_kd, sinc_kd) = cell_propagator(kappa_sq, breakpoints[c + 1] - breakpoints[c]);
        let next_f = cos_kd * f - sinc_kd * fprime;
        let next_fprime = kappa_sq * sinc_kd * f + cos_kd * fprime;
        f = next_f;
        fprime = next_fprime;
        let mag = f.norm().max(fprime.norm() / k.norm().max(1.0));
        if mag > 0.0 && !(1e-100..=1e100).contains(&mag) {
            let ln_mag = mag.ln();
            log_scale += ln_mag;
            let inv = (-ln_mag).exp();
            f *= inv;
            fprime *= inv;
        }
    }
    Ok(f * log_scale.exp())
}

/// The Jost function `f(k) = f_k(0)` for a half-line potential.
///
/// Piecewise-constant potentials are propagated exactly. Closed-form
/// potentials are projected first (see [`piecewise_projection`]); callers
/// evaluating many `k` should project once and reuse the result.
pub fn jost_function(v: &Potential, k: Complex64) -> Result<Complex64> {
    if v.geometry() != Geometry::HalfLine1d {
        return Err(Error::invalid("jost: half-line geometry required"));
    }
    match v.piecewise_cells() {
        Some((breakpoints, values)) => jost_cells(breakpoints, values, k),
        None => jost_function(&piecewise_projection(v)?, k),
    }
}

/// Ten probe momenta spread over the upper half-plane, used to certify the
/// piecewise projection of a closed-form potential.
fn probe_momenta() -> [Complex64; 10] {
    let mut probes = [Complex64::new(0.0, 0.0); 10];
    for (j, p) in probes.iter_mut().enumerate() {
        let phase = core::f64::consts::PI * (j as f64 + 0.5) / 10.0;
        let modulus = 0.5 * (1u32 << (j % 4)) as f64;
        *p = modulus * Complex64::new(phase.cos(), phase.sin());
    }
    probes
}

fn project_cells(v: &Potential, n: usize) -> Result<Potential> {
    let r = v.support_radius();
    let samples: Vec<Complex64> =
        (0..n).map(|j| v.value_at(r * (j as f64 + 0.5) / (n as f64))).collect();
    Potential::from_samples(v.geometry(), &samples, r)
}

/// Project a closed-form potential onto a piecewise-constant refinement of
/// midpoint samples, doubling the cell count until the Jost function is
/// stable to `1e-8` at ten probe momenta. Piecewise-constant inputs are
/// returned unchanged — the oracle is exact per representation.
pub fn piecewise_projection(v: &Potential) -> Result<Potential> {
    if v.geometry() != Geometry::HalfLine1d {
        return Err(Error::invalid("jost: half-line geometry required"));
    }
    if v.piecewise_cells().is_some() {
        return Ok(v.clone());
    }
    let probes = probe_momenta();
    let at_probes = |p: &Potential| -> Result<Vec<Complex64>> {
        let (bp, vals) = p.piecewise_cells().unwrap();
        probes.iter().map(|&k| jost_cells(bp, vals, k)).collect()
    };
    let mut n = 64usize;
    let mut coarse = at_probes(&project_cells(v, n)?)?;
    let mut prev_diff = f64::INFINITY;
    loop {
        n *= 2;
        let fine_potential = project_cells(v, n)?;
        let fine = at_probes(&fine_potential)?;
        let diff =
            coarse.iter().zip(&fine).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        if diff < 1e-8 {
            return Ok(fine_potential);
        }
        if n >= (1 << 17) {
            return Err(Error::BudgetExhausted {
                what: "jost projection cells",
                budget: n,
                last: diff,
                prev: prev_diff,
            });
        }
        coarse = fine;
        prev_diff = diff;
    }
}

/// All eigenvalues of the Dirichlet operator whose momenta `k` (with
/// `lambda = k^2`) lie in `rect`, located as zeros of the Jost function
/// with certified multiplicities.
pub fn oracle_eigenvalues(v: &Potential, rect: &Rectangle, tol: f64) -> Result<Vec<Zero>> {
    if !(rect.im_min > 0.0) {
        return Err(Error::invalid(
            "oracle_eigenvalues: rectangle must lie strictly in the upper half-plane",
        ));
    }
    let pw = piecewise_projection(v)?;
    locate_zeros(&|k| jost_function(&pw, k), rect, tol)
}
