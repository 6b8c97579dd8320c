//! Half-integer Bessel machinery for the radial 3-D kernels.
//!
//! Everything here is elementary: spherical Bessel functions `j_l`,
//! `h_l^{(1)}` and the modified functions `K_{m+1/2}` reduce to exponentials
//! and polynomials in `1/z`. The numerical difficulty is purely one of
//! scale — near the origin `j_l ~ z^l / (2l+1)!!` underflows while
//! `h_l^{(1)} ~ -i (2l-1)!! / z^{l+1}` overflows long before `l` reaches the
//! sector budgets — so every recurrence below runs on mantissa/exponent
//! pairs ([`Scaled`]) and only the balanced products that enter the kernels
//! are ever collapsed to plain doubles.
//!
//! Evaluation strategy, chosen for stability: `j_l` by downward (Miller)
//! recurrence normalized against the closed forms `j_0`, `j_1`;
//! `h_l^{(1)}` by upward recurrence, which is stable because `h` is the
//! dominant solution in that direction; `K_{m+1/2}` by its closed form and
//! the standard three-term recurrence, cross-checked against adaptive
//! quadrature of the integral representation
//! `K_nu(z) = Gamma(nu+1/2)^{-1} sqrt(pi/2z) e^{-z}
//! int_0^infty e^{-t} t^{nu-1/2} (1+t/2z)^{nu-1/2} dt` (valid for
//! `Re z > 0`, which both entry points therefore require).

use alloc::vec::Vec;
use num_complex::Complex64;
// Float supplies exp/sqrt/... under no_std; std's inherent methods shadow it.
#[allow(unused_imports)]
use num_traits::Float;

use crate::numerics::gauss_legendre;
use crate::{Error, Result};

/// A complex number `m * 2^e` with the mantissa kept near unit scale, so
/// that recurrences whose terms span thousands of binary orders of
/// magnitude never overflow or underflow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Scaled {
    pub m: Complex64,
    pub e: i32,
}

/// Multiply by `2^e` in steps small enough that no intermediate leaves the
/// double-precision exponent range; underflows saturate cleanly to zero.
fn mul_pow2(mut m: Complex64, mut e: i32) -> Complex64 {
    while e > 900 {
        m *= 2f64.powi(900);
        e -= 900;
        if !m.is_finite() {
            return m;
        }
    }
    while e < -900 {
        m *= 2f64.powi(-900);
        e += 900;
        if m.norm_sqr() == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
    }
    m * 2f64.powi(e)
}

impl Scaled {
    pub(crate) const ZERO: Scaled = Scaled { m: Complex64::new(0.0, 0.0), e: 0 };

    /// Rebase so the mantissa modulus lands in `[2^-32, 2^32]`.
    fn normalized(m: Complex64, e: i32) -> Scaled {
        let n = m.norm();
        if n == 0.0 {
            return Scaled::ZERO;
        }
        let shift = n.log2().round() as i32;
        if shift.abs() <= 32 {
            return Scaled { m, e };
        }
        Scaled { m: mul_pow2(m, -shift), e: e + shift }
    }

    pub(crate) fn from_complex(m: Complex64) -> Scaled {
        Scaled::normalized(m, 0)
    }

    /// `e^w` without overflow: the modulus `e^{Re w}` moves into the
    /// exponent field, the phase stays in the mantissa.
    pub(crate) fn from_exp(w: Complex64) -> Scaled {
        let t = w.re / core::f64::consts::LN_2;
        let e = t.floor();
        let m = Complex64::from_polar(2f64.powf(t - e), w.im);
        Scaled { m, e: e as i32 }
    }

    pub(crate) fn to_complex(self) -> Complex64 {
        mul_pow2(self.m, self.e)
    }

    pub(crate) fn mul(self, o: Scaled) -> Scaled {
        Scaled::normalized(self.m * o.m, self.e + o.e)
    }

    pub(crate) fn div(self, o: Scaled) -> Scaled {
        Scaled::normalized(self.m / o.m, self.e - o.e)
    }

    pub(crate) fn add(self, o: Scaled) -> Scaled {
        // an exact zero carries no meaningful exponent — it must never win
        // the dominance comparison below
        if self.m.norm_sqr() == 0.0 {
            return o;
        }
        if o.m.norm_sqr() == 0.0 {
            return self;
        }
        let (hi, lo) = if self.e >= o.e { (self, o) } else { (o, self) };
        let d = hi.e - lo.e;
        if d > 200 {
            return hi;
        }
        Scaled::normalized(hi.m + mul_pow2(lo.m, -d), hi.e)
    }

    pub(crate) fn sub(self, o: Scaled) -> Scaled {
        self.add(Scaled { m: -o.m, e: o.e })
    }

    fn scale_real(self, s: f64) -> Scaled {
        Scaled::normalized(self.m * s, self.e)
    }
}

/// `sin z` and `cos z` as scaled pairs; safe for any imaginary part.
fn sin_cos_scaled(z: Complex64) -> (Scaled, Scaled) {
    let iz = Complex64::i() * z;
    let ep = Scaled::from_exp(iz);
    let em = Scaled::from_exp(-iz);
    let sin = ep.sub(em).mul(Scaled::from_complex(Complex64::new(0.0, -0.5)));
    let cos = ep.add(em).scale_real(0.5);
    (sin, cos)
}

/// Spherical Bessel tables `j_l(z)` and `h_l^{(1)}(z)` for `l = 0..=l_max`
/// at one argument `z != 0`, as scaled values.
///
/// `j` comes from a downward Miller run started well above both `l_max` and
/// the turning point `|z|`, then normalized against whichever of the closed
/// forms `j_0 = sin z / z`, `j_1 = sin z / z^2 - cos z / z` is larger (so a
/// real zero of one of them never poisons the ratio). `h` runs upward from
/// `h_0 = -i e^{iz} / z`, `h_1 = -e^{iz} (z + i) / z^2`.
pub(crate) fn spherical_jh_tables(z: Complex64, ell_max: usize) -> (Vec<Scaled>, Vec<Scaled>) {
    debug_assert!(z.norm() > 0.0, "spherical tables need z != 0");
    let inv_z = Scaled::from_complex(Complex64::new(1.0, 0.0)).div(Scaled::from_complex(z));
    // closed forms for the references lose ~eps/|z| to cancellation as
    // z -> 0; below |z| = 0.1 their power series are exact to roundoff
    let (j0, j1) = if z.norm() < 0.1 {
        let series = |ell: f64| {
            let mut term = Complex64::new(1.0, 0.0);
            let mut sum = term;
            for m in 0..24 {
                term *= -z * z * 0.5 / ((m as f64 + 1.0) * (2.0 * (ell + m as f64) + 3.0));
                sum += term;
                if term.norm() < 1e-18 * sum.norm() {
                    break;
                }
            }
            sum
        };
        (
            Scaled::from_complex(series(0.0)),
            Scaled::from_complex(z / 3.0 * series(1.0)),
        )
    } else {
        let (sin, cos) = sin_cos_scaled(z);
        let j0 = sin.mul(inv_z);
        (j0, j0.sub(cos).mul(inv_z))
    };

    // downward Miller run; the seed scale is arbitrary and divides out
    let turning = z.norm().ceil() as usize;
    let m = ell_max.max(turning).max(1);
    let start = m + 40 + (3.0 * (m as f64).sqrt()) as usize;
    let mut up = Scaled::ZERO; // f_{n+1}
    let mut cur = Scaled { m: Complex64::new(1.0, 0.0), e: -300 }; // f_n
    let mut raw = alloc::vec![Scaled::ZERO; ell_max + 2];
    for n in (1..=start).rev() {
        let down = cur.scale_real((2 * n + 1) as f64).mul(inv_z).sub(up);
        up = cur;
        cur = down;
        if n - 1 <= ell_max + 1 {
            raw[n - 1] = cur;
        }
    }
    // normalize by the better-conditioned reference (|f| ratios equal |j| ratios)
    let use_zero = {
        let a = raw[0];
        let b = raw.get(1).copied().unwrap_or(Scaled::ZERO);
        let la = if a.m.norm() == 0.0 { f64::NEG_INFINITY } else { a.e as f64 + a.m.norm().log2() };
        let lb = if b.m.norm() == 0.0 { f64::NEG_INFINITY } else { b.e as f64 + b.m.norm().log2() };
        la >= lb
    };
    let ratio = if use_zero { j0.div(raw[0]) } else { j1.div(raw[1]) };
    let j: Vec<Scaled> = raw.iter().take(ell_max + 1).map(|f| f.mul(ratio)).collect();

    // upward recurrence for h^{(1)}, the dominant solution in this direction
    let e_iz = Scaled::from_exp(Complex64::i() * z);
    let h0 = e_iz.mul(Scaled::from_complex(Complex64::new(0.0, -1.0))).mul(inv_z);
    let h1 = e_iz.mul(Scaled::from_complex(-(z + Complex64::i()))).mul(inv_z).mul(inv_z);
    let mut h = Vec::with_capacity(ell_max + 1);
    h.push(h0);
    if ell_max >= 1 {
        h.push(h1);
        for n in 1..ell_max {
            let next = h[n].scale_real((2 * n + 1) as f64).mul(inv_z).sub(h[n - 1]);
            h.push(next);
        }
    }
    (j, h)
}

/// Largest factorial-free order accepted by the `K` entry points; beyond
/// this the recurrence coefficients themselves overflow double precision.
const K_ORDER_CAP: u32 = 160;

fn require_right_half(z: Complex64, what: &str) -> Result<()> {
    if !(z.re > 0.0) || !z.is_finite() {
        return Err(Error::invalid(alloc::format!("{what}: need Re z > 0")));
    }
    Ok(())
}

/// The modified Bessel function `K_{order + 1/2}(z)` for `Re z > 0`, by the
/// closed form `K_{1/2}(z) = sqrt(pi/2z) e^{-z}` and the three-term
/// recurrence `K_{nu+1} = K_{nu-1} + (2 nu / z) K_nu`, seeded with
/// `K_{-1/2} = K_{1/2}`.
pub fn bessel_k_half(order: u32, z: Complex64) -> Result<Complex64> {
    require_right_half(z, "bessel_k_half")?;
    if order > K_ORDER_CAP {
        return Err(Error::invalid("bessel_k_half: order too large"));
    }
    let k_half = (core::f64::consts::PI / (2.0 * z)).sqrt() * (-z).exp();
    let mut prev = k_half; // K_{m-1/2}, seeded at m = 0 with K_{-1/2}
    let mut cur = k_half; // K_{m+1/2}
    for m in 0..order {
        let next = prev + (2.0 * m as f64 + 1.0) / z * cur;
        prev = cur;
        cur = next;
    }
    if !cur.is_finite() {
        return Err(Error::NonFinite(alloc::format!("bessel_k_half at order {order}")));
    }
    Ok(cur)
}

/// `K_{order + 1/2}(z)` by adaptive quadrature of the integral
/// representation (an independent route used to cross-check
/// [`bessel_k_half`]): for half-integer orders the integrand is
/// `e^{-t} t^m (1 + t/2z)^m / m!`, an entire function, so panel-doubled
/// Gauss quadrature on a truncated range converges spectrally.
pub fn bessel_k_half_integral(order: u32, z: Complex64) -> Result<Complex64> {
    require_right_half(z, "bessel_k_half_integral")?;
    if order > 20 {
        return Err(Error::invalid("bessel_k_half_integral: order too large"));
    }
    let m = order as i32;
    // e^{-upper} upper^{2m} below 1e-30 times m! for every accepted order
    let upper = 60.0 + 14.0 * order as f64;
    let integrand =
        |t: f64| (-t).exp() * t.powi(m) * (Complex64::new(1.0, 0.0) + t / (2.0 * z)).powi(m);
    let mut n = 64usize;
    let mut prev: Complex64 = gauss_legendre(n, 0.0, upper)?.integrate(integrand);
    let mut prev_diff = f64::INFINITY;
    let factorial: f64 = (1..=order).map(|j| j as f64).product();
    let front = (core::f64::consts::PI / (2.0 * z)).sqrt() * (-z).exp() / factorial;
    loop {
        n *= 2;
        let val: Complex64 = gauss_legendre(n, 0.0, upper)?.integrate(integrand);
        let diff = (val - prev).norm();
        if diff <= 1e-13 * val.norm() {
            return Ok(front * val);
        }
        if n >= 4096 {
            return Err(Error::BudgetExhausted {
                what: "bessel_k_half_integral nodes",
                budget: 4096,
                last: diff,
                prev: prev_diff,
            });
        }
        prev = val;
        prev_diff = diff;
    }
}
