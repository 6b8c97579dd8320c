//! Independent bound-state oracle for real radial potentials: direct
//! shooting on the reduced radial equation, sharing no code with the
//! Nyström discretization, the determinants, or the spherical-function
//! tables it is used to cross-check.
//!
//! A bound state at energy `-kappa^2` in the sector `l` is a solution of
//!
//! ```text
//! u'' = ( l(l+1)/r^2 + V(r) + kappa^2 ) u,   u(0) = 0,  u decaying,
//! ```
//!
//! regular at the origin like `r^{l+1}` and proportional to the decaying
//! free solution beyond the support. The mismatch
//! `D(kappa) = u(R) w'(R) - u'(R) w(R)` between the regular solution `u`
//! and the decaying exterior `w` is continuous, vanishes exactly at the
//! eigenvalues (which are simple — a half-line Sturm–Liouville problem),
//! and changes sign there, so a scan plus bisection finds all of them.
//!
//! Two implementation choices keep the integration elementary and robust:
//! the substitution `u = r^{l+1} phi` removes the centrifugal singularity
//! (`phi'' + 2(l+1) phi'/r = (V + kappa^2) phi`, with `phi` analytic and
//! even at the origin), and the exterior enters only through its
//! logarithmic derivative, for which the terminating expansion of the
//! decaying solution gives an overflow-free positive-term ratio at any
//! order.

use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::potentials::{Geometry, Potential};
use crate::{Error, Result};

/// Hard ceiling on the sector index in [`radial_spectrum`]; far above any
/// sector a potential within the library's budgets can bind.
const ELL_CAP: u32 = 150;

/// Scan resolutions for the sign-change count: the count must agree on two
/// consecutive grids before the brackets are trusted.
const SCAN_GRIDS: [usize; 3] = [1500, 3000, 6000];

fn require_real_radial(v: &Potential) -> Result<f64> {
    if v.geometry() != Geometry::Radial3d {
        return Err(Error::invalid("radial shooting: radial geometry required"));
    }
    let sup = v.sup_abs();
    let r_max = v.support_radius();
    for j in 0..64 {
        let x = r_max * (j as f64 + 0.5) / 64.0;
        if v.value_at(x).im.abs() > 1e-12 * sup.max(1.0) {
            return Err(Error::invalid("radial shooting: potential must be real"));
        }
    }
    Ok(sup)
}

/// Regular solution data `(u(R), u'(R))` up to one common positive factor,
/// by fourth-order Runge–Kutta on the regularized variable `phi`.
///
/// The step length resolves the local oscillation (`h` a small fraction of
/// `(sup|V| + kappa^2)^{-1/2}`) and, near the origin, the power-law ramp
/// (`h <~ r / (l+1)`); the state is rescaled by its magnitude whenever it
/// grows large, which leaves the mismatch sign untouched.
fn regular_solution_at_edge(v: &Potential, ell: u32, kappa: f64, refine: f64) -> (f64, f64) {
    let r_max = v.support_radius();
    let bp = v.breakpoints();
    let lp1 = ell as f64 + 1.0;
    let w_scale = v.sup_abs() + kappa * kappa;
    let h_target = refine / (150.0 * (1.0 + w_scale.sqrt()));
    let r0 = (1e-4 * r_max).min(0.5 * bp[1]);
    let c = (v.value_at(0.5 * r0).re + kappa * kappa) / (4.0 * ell as f64 + 6.0);
    let mut r = r0;
    let mut p = 1.0 + c * r0 * r0;
    let mut s = 2.0 * c * r0;
    for cell in bp.windows(2) {
        let end = cell[1];
        while r < end - 1e-14 * r_max {
            let h = (end - r).min(h_target.min(0.2 * r / lp1));
            let accel = |r: f64, p: f64, s: f64| -> f64 {
                (v.value_at(r).re + kappa * kappa) * p - 2.0 * lp1 * s / r
            };
            let (k1p, k1s) = (s, accel(r, p, s));
            let (k2p, k2s) =
                (s + 0.5 * h * k1s, accel(r + 0.5 * h, p + 0.5 * h * k1p, s + 0.5 * h * k1s));
            let (k3p, k3s) =
                (s + 0.5 * h * k2s, accel(r + 0.5 * h, p + 0.5 * h * k2p, s + 0.5 * h * k2s));
            let (k4p, k4s) = (s + h * k3s, accel(r + h, p + h * k3p, s + h * k3s));
            p += h * (k1p + 2.0 * k2p + 2.0 * k3p + k4p) / 6.0;
            s += h * (k1s + 2.0 * k2s + 2.0 * k3s + k4s) / 6.0;
            r += h;
            let mag = p.abs().max(s.abs());
            if mag > 1e50 {
                p /= mag;
                s /= mag;
            }
        }
        r = end;
    }
    // u = r^{l+1} phi: drop the common positive factor r^l
    (r_max * p, lp1 * p + r_max * s)
}

/// Logarithmic derivative `w'/w` at `R` of the decaying exterior solution,
/// from the terminating expansion `w = e^{-kappa r} sum_m c_m (2 kappa
/// r)^{-m}` with `c_0 = 1`, `c_{m+1} = c_m (l+m+1)(l-m)/(m+1)`: all terms
/// positive, so the ratio is computed stably at any `l` with an on-the-fly
/// rescale against overflow.
fn exterior_log_derivative(ell: u32, kappa: f64, r: f64) -> f64 {
    let x = 2.0 * kappa * r;
    let mut term = 1.0f64;
    let mut num = 0.0f64;
    let mut den = 1.0f64;
    for m in 0..ell as u64 {
        let (l, m) = (ell as f64, m as f64);
        term *= (l + m + 1.0) * (l - m) / ((m + 1.0) * x);
        num += (m + 1.0) * term;
        den += term;
        if den > 1e280 {
            num *= 1e-280;
            den *= 1e-280;
            term *= 1e-280;
        }
    }
    -kappa - num / (den * r)
}

/// The matching mismatch `D(kappa)` up to a positive factor: zero exactly
/// at the sector's eigen-momenta.
fn mismatch(v: &Potential, ell: u32, kappa: f64, refine: f64) -> f64 {
    let (u, du) = regular_solution_at_edge(v, ell, kappa, refine);
    u * exterior_log_derivative(ell, kappa, v.support_radius()) - du
}

/// All bound states of `-Delta + V` in the angular-momentum sector `ell`,
/// for a real radial potential, returned as the ascending momenta
/// `kappa > 0` of the eigenvalues `-kappa^2` — each accurate to `tol`.
///
/// Every eigenvalue lies above `-sup|V|`, so the scan covers
/// `(0, sqrt(sup|V|))`; the sign-change count must agree on two
/// consecutive grid refinements before bisection, otherwise the scan
/// budget is reported as exhausted.
pub fn radial_bound_states(v: &Potential, ell: u32, tol: f64) -> Result<Vec<f64>> {
    let sup = require_real_radial(v)?;
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(Error::invalid("radial_bound_states: need tol > 0"));
    }
    if sup == 0.0 {
        return Ok(Vec::new());
    }
    let kappa_max = sup.sqrt();
    let kappa_min = 1e-6 * kappa_max;
    let scan = |grid: usize, refine: f64| -> Vec<(f64, f64)> {
        let mut brackets = Vec::new();
        let at = |j: usize| {
            kappa_min + (kappa_max - kappa_min) * j as f64 / grid as f64
        };
        let mut prev = mismatch(v, ell, at(0), refine);
        for j in 1..=grid {
            let kappa = at(j);
            let here = mismatch(v, ell, kappa, refine);
            if (prev <= 0.0 && here > 0.0) || (prev >= 0.0 && here < 0.0) {
                brackets.push((at(j - 1), kappa));
            }
            prev = here;
        }
        brackets
    };
    let mut brackets = scan(SCAN_GRIDS[0], 1.0);
    let mut accepted = false;
    for pair in SCAN_GRIDS.windows(2) {
        let finer = scan(pair[1], 1.0);
        if finer.len() == brackets.len() {
            brackets = finer;
            accepted = true;
            break;
        }
        brackets = finer;
    }
    if !accepted {
        let coarse = brackets.len();
        let final_check = scan(2 * SCAN_GRIDS[2], 1.0);
        if final_check.len() != coarse {
            return Err(Error::BudgetExhausted {
                what: "radial shooting scan grid",
                budget: 2 * SCAN_GRIDS[2],
                last: final_check.len() as f64,
                prev: coarse as f64,
            });
        }
        brackets = final_check;
    }
    let mut kappas = Vec::new();
    for (mut lo, mut hi) in brackets {
        // bisection with a finer integration step than the scan used
        let mut f_lo = mismatch(v, ell, lo, 0.25);
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            let f_mid = mismatch(v, ell, mid, 0.25);
            if f_mid == 0.0 {
                lo = mid;
                hi = mid;
                break;
            }
            if (f_lo < 0.0) == (f_mid < 0.0) {
                lo = mid;
                f_lo = f_mid;
            } else {
                hi = mid;
            }
        }
        kappas.push(0.5 * (lo + hi));
    }
    kappas.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(kappas)
}

/// The whole discrete spectrum, sector by sector: `(l, kappas)` for
/// `l = 0, 1, ...` until the first empty sector. Eigenvalues move up
/// monotonically in `l` (the centrifugal term grows), so once a sector is
/// empty every higher one is too.
pub fn radial_spectrum(v: &Potential, tol: f64) -> Result<Vec<(u32, Vec<f64>)>> {
    let mut sectors = Vec::new();
    for ell in 0..=ELL_CAP {
        let kappas = radial_bound_states(v, ell, tol)?;
        if kappas.is_empty() {
            return Ok(sectors);
        }
        sectors.push((ell, kappas));
    }
    Err(Error::BudgetExhausted {
        what: "radial spectrum sectors",
        budget: ELL_CAP as usize,
        last: sectors.len() as f64,
        prev: sectors.len() as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jost::oracle_eigenvalues;
    use crate::zerofinder::Rectangle;
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;

    fn well(depth: f64, radius: f64) -> Potential {
        Potential::square_well(Geometry::Radial3d, Complex64::new(-depth, 0.0), radius).unwrap()
    }

    /// `l = 0` square-well eigenvalues solve `q cot q = -kappa` with
    /// `q^2 + kappa^2 = depth` (radius 1): solve that transcendental
    /// equation directly, without any differential equation.
    fn transcendental_kappas(depth: f64) -> Vec<f64> {
        let d = |kappa: f64| {
            let q = (depth - kappa * kappa).sqrt();
            q / q.tan() + kappa
        };
        let mut roots = Vec::new();
        let kappa_max = depth.sqrt();
        let n = 20000;
        let mut prev = d(1e-9);
        for j in 1..n {
            let kappa = kappa_max * j as f64 / n as f64;
            // q cot q has poles where sin q = 0: skip brackets spanning one
            let q_here = (depth - kappa * kappa).sqrt();
            let q_prev = (depth
                - (kappa_max * (j - 1) as f64 / n as f64).powi(2))
            .sqrt();
            let here = d(kappa);
            let crosses_pole = (q_prev / core::f64::consts::PI).floor()
                != (q_here / core::f64::consts::PI).floor();
            if !crosses_pole && (prev < 0.0) != (here < 0.0) {
                let (mut lo, mut hi) = (kappa_max * (j - 1) as f64 / n as f64, kappa);
                let mut f_lo = d(lo);
                for _ in 0..80 {
                    let mid = 0.5 * (lo + hi);
                    let f_mid = d(mid);
                    if (f_lo < 0.0) == (f_mid < 0.0) {
                        lo = mid;
                        f_lo = f_mid;
                    } else {
                        hi = mid;
                    }
                }
                roots.push(0.5 * (lo + hi));
            }
            prev = here;
        }
        roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
        roots
    }

    #[test]
    fn square_well_ell0_matches_the_transcendental_roots() {
        // depth 30 binds two l = 0 states
        let expect = transcendental_kappas(30.0);
        assert_eq!(expect.len(), 2);
        let got = radial_bound_states(&well(30.0, 1.0), 0, 1e-10).unwrap();
        assert_eq!(got.len(), 2);
        for (a, b) in got.iter().zip(&expect) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-7);
        }
    }

    #[test]
    fn ell0_states_match_the_half_line_jost_oracle() {
        let v3 = well(14.0, 1.2);
        let v1 =
            Potential::square_well(Geometry::HalfLine1d, Complex64::new(-14.0, 0.0), 1.2).unwrap();
        let got = radial_bound_states(&v3, 0, 1e-10).unwrap();
        let rect = Rectangle::new(-0.3, 0.3, 1e-3, 14.0f64.sqrt() + 0.3).unwrap();
        let jost = oracle_eigenvalues(&v1, &rect, 1e-9).unwrap();
        assert_eq!(got.len(), jost.len());
        let mut jost_kappas: Vec<f64> = jost.iter().map(|z| z.k.im).collect();
        jost_kappas.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (a, b) in got.iter().zip(&jost_kappas) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-6);
        }
    }

    #[test]
    fn centrifugal_barrier_empties_high_sectors() {
        // sqrt(12) = 3.46 sits between pi (l = 1 threshold) and 4.49 (the
        // l = 2 threshold): exactly the sectors 0 and 1 bind, one state each
        let spectrum = radial_spectrum(&well(12.0, 1.0), 1e-9).unwrap();
        assert_eq!(spectrum.len(), 2);
        assert_eq!(spectrum[0].0, 0);
        assert_eq!(spectrum[0].1.len(), 1);
        assert_eq!(spectrum[1].0, 1);
        assert_eq!(spectrum[1].1.len(), 1);
        // and a barely-subcritical well binds nothing at l = 1
        let shallow = radial_spectrum(&well(9.5, 1.0), 1e-9).unwrap();
        assert_eq!(shallow.len(), 1, "pi^2 = 9.87 > 9.5: l = 1 must be empty");
    }

    #[test]
    fn repulsive_and_complex_potentials_are_rejected_or_empty() {
        let repulsive = well(-0.0, 1.0);
        assert!(radial_bound_states(&repulsive, 0, 1e-9).unwrap().is_empty());
        let bump = Potential::square_well(Geometry::Radial3d, Complex64::new(5.0, 0.0), 1.0)
            .unwrap();
        assert!(radial_bound_states(&bump, 0, 1e-9).unwrap().is_empty());
        let complex_v =
            Potential::square_well(Geometry::Radial3d, Complex64::new(-3.0, 1.0), 1.0).unwrap();
        assert!(radial_bound_states(&complex_v, 0, 1e-9).is_err());
        let half_line =
            Potential::square_well(Geometry::HalfLine1d, Complex64::new(-3.0, 0.0), 1.0).unwrap();
        assert!(radial_bound_states(&half_line, 0, 1e-9).is_err());
    }
}
