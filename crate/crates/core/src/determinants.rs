//! Regularized determinants `det_n` and the determinant-bound checks.
//!
//! For a finite eigenvalue list (repetition = algebraic multiplicity) the
//! `n`-th regularized determinant is
//!
//! ```text
//! det_n(1 + K) = prod_j (1 + lambda_j) exp( sum_{m=1}^{n-1} (-1)^m lambda_j^m / m )
//! ```
//!
//! The checks compare `log |det_n|` against Schatten-norm bounds; each
//! returns a [`BoundCheck`] carrying both sides so callers can report
//! margins instead of a bare boolean.

use alloc::vec::Vec;
use num_complex::Complex64;
// Float supplies ln/powf/... under no_std; std's inherent methods shadow it.
#[allow(unused_imports)]
use num_traits::Float;

use crate::numerics::{self, ComplexMatrix};
use crate::{Error, Result};

/// The sharp constant in `ln|det_2(1+K)| <= Gamma * ||K||_S2^2`.
pub const GAMMA_2_2: f64 = 0.5;

/// Two sides of an inequality `lhs <= rhs`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BoundCheck {
    pub lhs: f64,
    pub rhs: f64,
}

impl BoundCheck {
    /// `rhs - lhs`; nonnegative when the inequality holds.
    pub fn margin(&self) -> f64 {
        self.rhs - self.lhs
    }

    /// Whether the inequality holds up to `slack` of numerical noise.
    pub fn holds(&self, slack: f64) -> bool {
        self.margin() >= -slack
    }
}

/// Polynomial part of the regularization at one eigenvalue:
/// `sum_{m=1}^{n-1} (-1)^m lambda^m / m`.
fn reg_polynomial(lambda: Complex64, n: u32) -> Complex64 {
    let mut sum = Complex64::new(0.0, 0.0);
    let mut pow = Complex64::new(1.0, 0.0);
    let mut sign = -1.0;
    for m in 1..n {
        pow *= lambda;
        sum += pow * (sign / m as f64);
        sign = -sign;
    }
    sum
}

/// `det_n(1 + K)` from the eigenvalues of `K`.
pub fn det_n_from_eigs(eigs: &[Complex64], n: u32) -> Complex64 {
    assert!(n >= 1, "det_n needs n >= 1");
    let mut det = Complex64::new(1.0, 0.0);
    for &l in eigs {
        det *= (Complex64::new(1.0, 0.0) + l) * reg_polynomial(l, n).exp();
    }
    det
}

/// `ln |det_n(1 + K)|`, accumulated term by term so an eigenvalue at `-1`
/// yields `-inf` instead of `ln 0` noise.
pub fn log_abs_det_n_from_eigs(eigs: &[Complex64], n: u32) -> f64 {
    assert!(n >= 1, "det_n needs n >= 1");
    let mut log_abs = 0.0;
    for &l in eigs {
        log_abs += (Complex64::new(1.0, 0.0) + l).norm().ln() + reg_polynomial(l, n).re;
    }
    log_abs
}

/// Principal-branch `log det_n(1 + K)`, accumulated per eigenvalue
/// (`log(1 + lambda_j)` principal plus the polynomial part) so the result is
/// free of the winding ambiguity a single logarithm of the product would
/// have. Requires every `|lambda_j| < 1`.
pub fn log_det_n_from_eigs(eigs: &[Complex64], n: u32) -> Result<Complex64> {
    assert!(n >= 1, "det_n needs n >= 1");
    let mut log = Complex64::new(0.0, 0.0);
    for &l in eigs {
        if l.norm() >= 1.0 {
            return Err(Error::invalid(
                "log_det_n: per-term principal branch needs all |lambda| < 1",
            ));
        }
        log += (Complex64::new(1.0, 0.0) + l).ln() + reg_polynomial(l, n);
    }
    Ok(log)
}

/// `gamma_n(theta) = sum_{m >= n} theta^{m-n} / m` for `0 <= theta < 1`.
///
/// Evaluated by the series for small `theta` (the closed form
/// `-[log(1-theta) + sum_{m<n} theta^m/m] / theta^n` cancels catastrophically
/// as `theta -> 0`) and by the closed form near 1 (where the series is slow).
pub fn gamma_n(n: u32, theta: f64) -> Result<f64> {
    if n < 1 {
        return Err(Error::invalid("gamma_n: need n >= 1"));
    }
    if !(0.0..1.0).contains(&theta) {
        return Err(Error::invalid("gamma_n: need 0 <= theta < 1"));
    }
    if theta <= 0.7 {
        // sum_{j>=0} theta^j / (n + j); positive terms, ratio theta
        let mut pow = 1.0;
        let mut sum = 1.0 / n as f64;
        for j in 1..10_000 {
            pow *= theta;
            let t = pow / (n + j) as f64;
            sum += t;
            if t < 1e-18 * sum {
                break;
            }
        }
        Ok(sum)
    } else {
        let mut bracket = (-theta).ln_1p();
        let mut pow = 1.0;
        for m in 1..n {
            pow *= theta;
            bracket += pow / m as f64;
        }
        Ok(-bracket / theta.powi(n as i32))
    }
}

/// `Gamma_{n,p}(theta) = theta^{n-p} gamma_n(theta)`, valid for `p <= n`.
pub fn gamma_cap(n: u32, p: f64, theta: f64) -> Result<f64> {
    if !(p > 0.0 && p <= n as f64) {
        return Err(Error::invalid("gamma_cap: need 0 < p <= n"));
    }
    Ok(theta.powf(n as f64 - p) * gamma_n(n, theta)?)
}

/// Check `ln |det_n(1 + M)| <= Gamma * ||M||_Sp^p` with a caller-supplied
/// constant. The only case with a pinned constant is `(n, p) = (2, 2)`,
/// `Gamma = 1/2` ([`GAMMA_2_2`]).
pub fn log_det_bound(m: &ComplexMatrix, n: u32, p: f64, gamma: f64) -> Result<BoundCheck> {
    if !(p > 0.0) || (n as f64 - 1.0) > p || p > n as f64 {
        return Err(Error::invalid("log_det_bound: need n-1 <= p <= n, p > 0"));
    }
    let eigs = numerics::eigenvalues(m)?;
    let lhs = log_abs_det_n_from_eigs(&eigs, n);
    let sv = numerics::singular_values(m)?;
    let rhs = gamma * sv.iter().map(|s| s.powf(p)).sum::<f64>();
    Ok(BoundCheck { lhs, rhs })
}

/// Check `|log det_n(1 + M)| <= theta^{n-p} gamma_n(theta) ||M||_Sp^p` for a
/// strict contraction: requires the operator norm `||M|| <= theta < 1`.
pub fn log_det_bound_capped(m: &ComplexMatrix, n: u32, p: f64, theta: f64) -> Result<BoundCheck> {
    let sv = numerics::singular_values(m)?;
    let op_norm = sv.first().copied().unwrap_or(0.0);
    if op_norm > theta {
        return Err(Error::invalid("log_det_bound_capped: operator norm exceeds theta"));
    }
    let eigs = numerics::eigenvalues(m)?;
    let lhs = log_det_n_from_eigs(&eigs, n)?.norm();
    let rhs = gamma_cap(n, p, theta)? * sv.iter().map(|s| s.powf(p)).sum::<f64>();
    Ok(BoundCheck { lhs, rhs })
}

/// Weyl's inequality: `sum_j |lambda_j(M)|^p <= sum_j s_j(M)^p` for
/// `p >= 1`.
pub fn weyl_check(m: &ComplexMatrix, p: f64) -> Result<BoundCheck> {
    if !(p >= 1.0) {
        return Err(Error::invalid("weyl_check: need p >= 1"));
    }
    let eigs = numerics::eigenvalues(m)?;
    let sv = numerics::singular_values(m)?;
    let lhs: f64 = eigs.iter().map(|l| l.norm().powf(p)).sum();
    let rhs: f64 = sv.iter().map(|s| s.powf(p)).sum();
    Ok(BoundCheck { lhs, rhs })
}

/// Eigenvalues of `K` for which `1 + K` is singular, i.e. those at `-1`,
/// counted with multiplicity inside a small disc of radius `tol`.
pub fn multiplicity_at_minus_one(eigs: &[Complex64], tol: f64) -> usize {
    eigs.iter()
        .filter(|l| (**l + Complex64::new(1.0, 0.0)).norm() <= tol)
        .count()
}

/// Collect eigenvalues into a `Vec` sorted by `(re, im)` for stable reports.
pub fn sorted_eigs(mut eigs: Vec<Complex64>) -> Vec<Complex64> {
    eigs.sort_by(|a, b| {
        (a.re, a.im)
            .partial_cmp(&(b.re, b.im))
            .unwrap_or(core::cmp::Ordering::Equal)
    });
    eigs
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use num_complex::Complex64 as C;
    use rand::{Rng, SeedableRng};

    fn random_matrix(n: usize, seed: u64, scale: f64) -> ComplexMatrix {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        ComplexMatrix::from_fn(n, n, |_, _| {
            C::new(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale))
        })
    }

    #[test]
    fn det_n_base_cases() {
        assert_eq!(det_n_from_eigs(&[], 3), C::new(1.0, 0.0));
        let l = C::new(0.3, -0.4);
        let d1 = det_n_from_eigs(&[l], 1);
        assert_relative_eq!(d1.re, 1.3, max_relative = 1e-15);
        assert_relative_eq!(d1.im, -0.4, max_relative = 1e-15);
        // n=2, eigenvalue 1: 2 e^{-1}
        let d2 = det_n_from_eigs(&[C::new(1.0, 0.0)], 2);
        assert_relative_eq!(d2.re, 2.0 * (-1.0f64).exp(), max_relative = 1e-14);
        assert_abs_diff_eq!(d2.im, 0.0, epsilon = 1e-15);
    }

    /// Series oracle: for |lambda| < 1,
    /// log det_n = sum_j sum_{m>=n} (-1)^{m-1} lambda_j^m / m.
    fn det_n_series(eigs: &[C], n: u32) -> C {
        let mut log = C::new(0.0, 0.0);
        for &l in eigs {
            let mut pow = l.powu(n - 1);
            let mut sign = if n % 2 == 0 { -1.0 } else { 1.0 };
            for m in n..300 {
                pow *= l;
                log += pow * (sign / m as f64);
                sign = -sign;
            }
        }
        log.exp()
    }

    #[test]
    fn det_n_matches_tail_series_inside_unit_disc() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for n in 1..=4 {
            for _ in 0..25 {
                let eigs: alloc::vec::Vec<C> = (0..6)
                    .map(|_| {
                        let r = rng.gen_range(0.0..0.8f64);
                        let t = rng.gen_range(0.0..core::f64::consts::TAU);
                        C::new(r * t.cos(), r * t.sin())
                    })
                    .collect();
                let direct = det_n_from_eigs(&eigs, n);
                let series = det_n_series(&eigs, n);
                assert_relative_eq!(direct.re, series.re, max_relative = 1e-10, epsilon = 1e-10);
                assert_relative_eq!(direct.im, series.im, max_relative = 1e-10, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn det2_routes_agree() {
        // det_2(1+M) = det(1+M) e^{-tr M}: eigenvalue route vs LU route
        for seed in 0..10 {
            let m = random_matrix(7, 900 + seed, 0.7);
            let eigs = numerics::eigenvalues(&m).unwrap();
            let via_eigs = det_n_from_eigs(&eigs, 2);
            let id = ComplexMatrix::identity(7, 7);
            let via_lu = numerics::complex_determinant(&(&id + &m))
                * (-numerics::complex_trace(&m)).exp();
            assert_relative_eq!(via_eigs.re, via_lu.re, max_relative = 1e-8, epsilon = 1e-10);
            assert_relative_eq!(via_eigs.im, via_lu.im, max_relative = 1e-8, epsilon = 1e-10);
        }
    }

    #[test]
    fn log_abs_handles_eigenvalue_at_minus_one() {
        let eigs = [C::new(-1.0, 0.0), C::new(0.5, 0.0)];
        assert_eq!(log_abs_det_n_from_eigs(&eigs, 2), f64::NEG_INFINITY);
        assert_eq!(multiplicity_at_minus_one(&eigs, 1e-9), 1);
    }

    #[test]
    fn gamma_2_at_half_matches_closed_form_and_series() {
        // gamma_2(1/2) = -[log(1/2) + 1/2]/(1/4) = 4 (log 2 - 1/2)
        let exact = 4.0 * (2.0f64.ln() - 0.5);
        let got = gamma_n(2, 0.5).unwrap();
        assert_relative_eq!(got, exact, max_relative = 1e-12);
        // independent series summation
        let mut series = 0.0;
        for m in 2..200u32 {
            series += 0.5f64.powi(m as i32 - 2) / m as f64;
        }
        assert_relative_eq!(got, series, max_relative = 1e-10);
        assert_relative_eq!(got, 0.772589, max_relative = 1e-6);
    }

    #[test]
    fn gamma_n_branches_agree_and_limit_is_one_over_n() {
        for n in 1..=5u32 {
            assert_relative_eq!(gamma_n(n, 0.0).unwrap(), 1.0 / n as f64);
            // series (theta <= 0.7) vs closed form (theta > 0.7) cross-check:
            // evaluate both a hair on each side of the switch
            let a = gamma_n(n, 0.699_999_999).unwrap();
            let b = gamma_n(n, 0.700_000_001).unwrap();
            assert_relative_eq!(a, b, max_relative = 1e-8);
        }
        assert!(gamma_n(2, 1.0).is_err());
        assert!(gamma_n(2, -0.1).is_err());
    }

    #[test]
    fn bound1_zero_matrix_and_preconditions() {
        let z = ComplexMatrix::zeros(4, 4);
        let r = log_det_bound(&z, 2, 2.0, GAMMA_2_2).unwrap();
        assert_eq!(r.lhs, 0.0);
        assert_eq!(r.rhs, 0.0);
        assert!(r.holds(0.0));
        assert!(log_det_bound(&z, 2, 0.5, 1.0).is_err());
        assert!(log_det_bound(&z, 2, 2.5, 1.0).is_err());
    }

    #[test]
    fn bound1_holds_on_random_matrices() {
        for seed in 0..100 {
            let m = random_matrix(10, 4000 + seed, 1.0);
            let r = log_det_bound(&m, 2, 2.0, GAMMA_2_2).unwrap();
            assert!(r.margin() >= 0.0, "margin {} at seed {seed}", r.margin());
        }
    }

    #[test]
    fn bound1_rank_one_with_eigenvalue_minus_one() {
        // M = -e1 e1^T has eigenvalues {-1, 0, 0}: det_2(1+M) = 0
        let mut m = ComplexMatrix::zeros(3, 3);
        m[(0, 0)] = C::new(-1.0, 0.0);
        let r = log_det_bound(&m, 2, 2.0, GAMMA_2_2).unwrap();
        assert_eq!(r.lhs, f64::NEG_INFINITY);
        assert!(r.holds(0.0));
    }

    #[test]
    fn bound2_zero_matrix_and_rejection() {
        let z = ComplexMatrix::zeros(3, 3);
        let r = log_det_bound_capped(&z, 2, 2.0, 0.5).unwrap();
        assert_eq!(r.lhs, 0.0);
        assert_eq!(r.rhs, 0.0);
        let m = ComplexMatrix::identity(3, 3) * C::new(0.9, 0.0);
        assert!(log_det_bound_capped(&m, 2, 2.0, 0.5).is_err());
    }

    #[test]
    fn bound2_holds_on_random_contractions() {
        for seed in 0..100 {
            let mut m = random_matrix(8, 7000 + seed, 1.0);
            let op = numerics::singular_values(&m).unwrap()[0];
            m *= C::new(0.45 / op, 0.0);
            let r = log_det_bound_capped(&m, 2, 2.0, 0.5).unwrap();
            assert!(r.margin() >= 0.0, "margin {} at seed {seed}", r.margin());

            // eigenvalue-series oracle for the left side
            let eigs = numerics::eigenvalues(&m).unwrap();
            let series = det_n_series(&eigs, 2);
            let lhs_oracle = series.ln().norm();
            assert_relative_eq!(r.lhs, lhs_oracle, max_relative = 1e-7, epsilon = 1e-9);
        }
    }

    #[test]
    fn weyl_equality_for_hermitian() {
        let a = random_matrix(6, 55, 1.0);
        let m = (&a + &a.adjoint()) * C::new(0.5, 0.0);
        let r = weyl_check(&m, 2.0).unwrap();
        assert_relative_eq!(r.lhs, r.rhs, max_relative = 1e-10, epsilon = 1e-10);
    }

    #[test]
    fn weyl_nilpotent() {
        let m = ComplexMatrix::from_row_slice(
            2,
            2,
            &[C::new(0.0, 0.0), C::new(1.0, 0.0), C::new(0.0, 0.0), C::new(0.0, 0.0)],
        );
        let r = weyl_check(&m, 2.0).unwrap();
        assert_abs_diff_eq!(r.lhs, 0.0, epsilon = 1e-12);
        assert_relative_eq!(r.rhs, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn weyl_holds_on_random_matrices() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(88);
        for trial in 0..100 {
            let dim = rng.gen_range(2..=20);
            let m = random_matrix(dim, 10_000 + trial, 1.0);
            for p in [1.0, 2.0, 4.0] {
                let r = weyl_check(&m, p).unwrap();
                assert!(
                    r.margin() >= -1e-10 * r.rhs.max(1.0),
                    "p={p} margin {} at trial {trial}",
                    r.margin()
                );
            }
        }
    }

    #[test]
    fn sorted_eigs_is_stable_order() {
        let eigs = alloc::vec![C::new(1.0, 2.0), C::new(-1.0, 0.0), C::new(1.0, -2.0)];
        let s = sorted_eigs(eigs);
        assert_eq!(s[0], C::new(-1.0, 0.0));
        assert_eq!(s[1], C::new(1.0, -2.0));
        assert_eq!(s[2], C::new(1.0, 2.0));
    }
}
