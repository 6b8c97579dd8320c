//! Argument-principle zero counting and localization on rectangles, the
//! Blaschke product, the constant `c_nu`, and the zero-sum inequality check.
//!
//! All routines work through a function handle `Fn(Complex64) ->
//! Result<Complex64>` assumed analytic on (a neighborhood of) the region it
//! is sampled on. Counting is exact: a winding number is an integer, and the
//! sampler refines locally until every phase step is safely below `pi/2`, so
//! a wrong count cannot slip through as a rounding artifact — it can only
//! surface as an error.

use alloc::vec::Vec;
use num_complex::Complex64;
// Float supplies hypot/ln/... under no_std; std's inherent methods shadow it.
#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result};

/// Axis-aligned rectangle in the complex `k`-plane.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Rectangle {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Rectangle {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Result<Rectangle> {
        let r = Rectangle { re_min, re_max, im_min, im_max };
        if !(re_min < re_max && im_min < im_max)
            || ![re_min, re_max, im_min, im_max].iter().all(|v| v.is_finite())
        {
            return Err(Error::invalid("rectangle: need finite re_min < re_max, im_min < im_max"));
        }
        Ok(r)
    }

    pub fn center(&self) -> Complex64 {
        Complex64::new(0.5 * (self.re_min + self.re_max), 0.5 * (self.im_min + self.im_max))
    }

    pub fn width(&self) -> f64 {
        self.re_max - self.re_min
    }

    pub fn height(&self) -> f64 {
        self.im_max - self.im_min
    }

    pub fn diameter(&self) -> f64 {
        self.width().hypot(self.height())
    }

    pub fn contains(&self, k: Complex64) -> bool {
        self.re_min <= k.re && k.re <= self.re_max && self.im_min <= k.im && k.im <= self.im_max
    }

    /// Corners in counterclockwise order starting at the lower left.
    pub fn corners(&self) -> [Complex64; 4] {
        [
            Complex64::new(self.re_min, self.im_min),
            Complex64::new(self.re_max, self.im_min),
            Complex64::new(self.re_max, self.im_max),
            Complex64::new(self.re_min, self.im_max),
        ]
    }

    fn translated(&self, d: Complex64) -> Rectangle {
        Rectangle {
            re_min: self.re_min + d.re,
            re_max: self.re_max + d.re,
            im_min: self.im_min + d.im,
            im_max: self.im_max + d.im,
        }
    }

    /// Split into four at an interior point.
    fn quadrisect_at(&self, p: Complex64) -> [Rectangle; 4] {
        [
            Rectangle { re_min: self.re_min, re_max: p.re, im_min: self.im_min, im_max: p.im },
            Rectangle { re_min: p.re, re_max: self.re_max, im_min: self.im_min, im_max: p.im },
            Rectangle { re_min: self.re_min, re_max: p.re, im_min: p.im, im_max: self.im_max },
            Rectangle { re_min: p.re, re_max: self.re_max, im_min: p.im, im_max: self.im_max },
        ]
    }
}

/// A located zero: position, algebraic multiplicity (= winding number of a
/// small circle around it), and `|f|` at the located point.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Zero {
    pub k: Complex64,
    pub multiplicity: usize,
    pub residual: f64,
}

/// Phase step that triggers local refinement (comfortably below the `pi/2`
/// acceptance threshold of the winding count).
const REFINE_STEP: f64 = 1.0;
/// Total boundary samples allowed per contour.
const LOOP_BUDGET: usize = 40_000;
/// Jitter attempts when a zero sits on the contour.
const JITTER_RETRIES: usize = 5;

/// Winding number of `f` along the closed polygon through `pts`, refining
/// locally (midpoint insertion on offending segments) until every phase step
/// is below [`REFINE_STEP`].
fn adaptive_loop_winding<F>(f: &F, pts: Vec<Complex64>) -> Result<i64>
where
    F: Fn(Complex64) -> Result<Complex64> + ?Sized,
{
    let diam = {
        let (mut lo_re, mut hi_re, mut lo_im, mut hi_im) =
            (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for p in &pts {
            lo_re = lo_re.min(p.re);
            hi_re = hi_re.max(p.re);
            lo_im = lo_im.min(p.im);
            hi_im = hi_im.max(p.im);
        }
        (hi_re - lo_re).hypot(hi_im - lo_im)
    };
    let mut pts = pts;
    let mut vals = Vec::with_capacity(pts.len());
    for &p in &pts {
        vals.push(f(p)?);
    }
    let mut candidate: Option<i64> = None;
    loop {
        let max_abs = vals.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let min_abs = vals.iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min);
        if !max_abs.is_finite() {
            return Err(Error::NonFinite("contour samples".into()));
        }
        // only an exact (or denormal-level) zero invalidates a sample; a
        // tiny |f| — e.g. near a high-multiplicity zero just inside — still
        // carries a perfectly usable phase
        let floor = 1e-290;
        if !(min_abs > floor) {
            return Err(Error::ZeroOnPath { min_abs, floor });
        }

        let n = pts.len();
        let mut refine = Vec::new();
        let mut max_step = 0.0f64;
        for j in 0..n {
            let step = (vals[(j + 1) % n] * vals[j].conj()).arg().abs();
            max_step = max_step.max(step);
            if step >= REFINE_STEP {
                refine.push(j);
            }
        }
        let mut doubling = false;
        if refine.is_empty() {
            // every principal step is below REFINE_STEP < pi/2; the sum is a
            // candidate total, but a segment whose true phase swing is near a
            // multiple of 2 pi aliases to a small principal step, so the
            // count is only trusted once a full midpoint doubling reproduces
            // it — splitting an aliased segment exposes halves with large
            // steps
            let total: f64 = (0..n)
                .map(|j| (vals[(j + 1) % n] * vals[j].conj()).arg())
                .sum();
            let turns = total / core::f64::consts::TAU;
            let rounded = turns.round();
            if (turns - rounded).abs() > 0.25 {
                return Err(Error::SamplingTooCoarse { max_step });
            }
            if candidate == Some(rounded as i64) {
                return Ok(rounded as i64);
            }
            candidate = Some(rounded as i64);
            refine = (0..n).collect();
            doubling = true;
        } else {
            candidate = None;
        }
        if n + refine.len() > LOOP_BUDGET {
            return Err(Error::SamplingTooCoarse { max_step });
        }

        let mut new_pts = Vec::with_capacity(n + refine.len());
        let mut new_vals = Vec::with_capacity(n + refine.len());
        let mut r = 0;
        for j in 0..n {
            new_pts.push(pts[j]);
            new_vals.push(vals[j]);
            if r < refine.len() && refine[r] == j {
                r += 1;
                let mid = 0.5 * (pts[j] + pts[(j + 1) % n]);
                // segment shrunk to nothing and the step still will not
                // settle: a zero is effectively on the path (confirmation
                // doublings split calm segments too, which must not trip
                // this)
                if !doubling && (pts[(j + 1) % n] - pts[j]).norm() < 1e-12 * diam {
                    return Err(Error::ZeroOnPath { min_abs, floor });
                }
                new_pts.push(mid);
                new_vals.push(f(mid)?);
            }
        }
        pts = new_pts;
        vals = new_vals;
    }
}

fn rectangle_boundary_points(rect: &Rectangle, per_side: usize) -> Vec<Complex64> {
    crate::numerics::rectangle_path(
        Complex64::new(rect.re_min, rect.im_min),
        Complex64::new(rect.re_max, rect.im_max),
        per_side,
    )
}

fn count_once<F>(f: &F, rect: &Rectangle) -> Result<i64>
where
    F: Fn(Complex64) -> Result<Complex64> + ?Sized,
{
    adaptive_loop_winding(f, rectangle_boundary_points(rect, 8))
}

const JITTER_DIRS: [(f64, f64); 5] = [(1.0, 1.0), (-1.0, 1.0), (-1.0, -1.0), (1.0, -1.0), (1.0, 0.0)];

/// Number of zeros of `f` inside `rect`, counted with multiplicity.
///
/// A zero detected on the boundary jitters the rectangle by
/// `1e-9 * diameter` and retries, up to five times.
pub fn count_zeros<F>(f: &F, rect: &Rectangle) -> Result<usize>
where
    F: Fn(Complex64) -> Result<Complex64> + ?Sized,
{
    let diam = rect.diameter();
    for attempt in 0..=JITTER_RETRIES {
        let r = if attempt == 0 {
            *rect
        } else {
            let (dx, dy) = JITTER_DIRS[(attempt - 1) % JITTER_DIRS.len()];
            rect.translated(Complex64::new(dx, dy) * (1e-9 * diam * attempt as f64))
        };
        match count_once(f, &r) {
            Ok(w) if w >= 0 => return Ok(w as usize),
            Ok(_) => {
                return Err(Error::invalid(
                    "count_zeros: negative winding — handle is not analytic inside",
                ))
            }
            Err(Error::ZeroOnPath { .. }) if attempt < JITTER_RETRIES => continue,
            Err(Error::ZeroOnPath { .. }) => {
                return Err(Error::BoundaryZero { retries: JITTER_RETRIES })
            }
            Err(e) => return Err(e),
        }
    }
    unreachable!()
}

struct Seed {
    center: Complex64,
    count: usize,
    radius: f64,
}

/// Deterministic pseudo-random interior cut point for subdividing `rect`.
///
/// Exact midpoint cuts are a trap: zeros of structured problems love to sit
/// on symmetric dyadic lines (e.g. an eigenvalue at the center of a search
/// box), putting them exactly on every cut at every level. A hash of the
/// rectangle's bits displaces the cut by up to 8% of each side, which is
/// stable across runs but uncorrelated with any zero location.
fn cut_point(rect: &Rectangle) -> Complex64 {
    let mut h: u64 = 0x9e37_79b9_7f4a_7c15;
    for v in [rect.re_min, rect.re_max, rect.im_min, rect.im_max] {
        h ^= v.to_bits();
        // splitmix64 scramble
        h = h.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = h;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        h = z ^ (z >> 31);
    }
    let ux = ((h & 0xffff_ffff) as f64 / 4294967295.0 - 0.5) * 0.16;
    let uy = ((h >> 32) as f64 / 4294967295.0 - 0.5) * 0.16;
    rect.center() + Complex64::new(ux * rect.width(), uy * rect.height())
}

/// Quadrisect until each zero-carrying cell is below `coarse` across, then
/// record it as a seed. A zero on an interior cut line makes the child
/// counts disagree with the parent; the cut point is then jittered.
fn gather_seeds<F>(
    f: &F,
    rect: &Rectangle,
    count: usize,
    coarse: f64,
    seeds: &mut Vec<Seed>,
) -> Result<()>
where
    F: Fn(Complex64) -> Result<Complex64> + ?Sized,
{
    if count == 0 {
        return Ok(());
    }
    if rect.diameter() <= coarse {
        seeds.push(Seed { center: rect.center(), count, radius: 0.5 * rect.diameter() });
        return Ok(());
    }
    let mut cut = cut_point(rect);
    for attempt in 0..=JITTER_RETRIES {
        let kids = rect.quadrisect_at(cut);
        let mut kid_counts = [0usize; 4];
        let mut ok = true;
        for (i, kid) in kids.iter().enumerate() {
            match count_zeros(f, kid) {
                Ok(c) => kid_counts[i] = c,
                Err(Error::BoundaryZero { .. }) => {
                    ok = false;
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        if ok && kid_counts.iter().sum::<usize>() == count {
            for (kid, kc) in kids.iter().zip(kid_counts) {
                gather_seeds(f, kid, kc, coarse, seeds)?;
            }
            return Ok(());
        }
        // a zero straddles the cut: move the cut point and try again
        let d = 1e-2 * rect.diameter() * (attempt + 1) as f64;
        let (dx, dy) = JITTER_DIRS[attempt % JITTER_DIRS.len()];
        cut = cut_point(rect) + Complex64::new(dx * d, dy * d);
    }
    Err(Error::BoundaryZero { retries: JITTER_RETRIES })
}

/// Newton polish with the multiplicity-aware step `m f / f'` (central-
/// difference derivative); falls back to winding bisection on stagnation.
///
/// The differencing width tracks the last step size: near a multiple zero a
/// fixed width would dominate the derivative (`f' ~ m d^{m-1}` with `d` the
/// remaining error, versus an `O(h^{m-1})` differencing bias), freezing the
/// iteration at `d ~ h` while the step-size test reports convergence.
fn polish<F>(f: &F, seed: &Seed, tol: f64) -> Result<(Complex64, f64)>
where
    F: Fn(Complex64) -> Result<Complex64> + ?Sized,
{
    let m = seed.count as f64;
    let mut k = seed.center;
    let leash = (4.0 * seed.radius).max(100.0 * tol);
    let scale = k.norm().max(1.0);
    let mut h = 1e-6 * scale;
    for _ in 0..100 {
        let fk = f(k)?;
        let fp = (f(k + Complex64::new(h, 0.0))? - f(k - Complex64::new(h, 0.0))?)
            / Complex64::new(2.0 * h, 0.0);
        if fp.norm() == 0.0 {
            break;
        }
        let step = fk / fp * m;
        if !step.re.is_finite() || !step.im.is_finite() {
            break;
        }
        if (k - step - seed.center).norm() > leash {
            break;
        }
        k -= step;
        if step.norm() <= 0.25 * tol {
            return Ok((k, f(k)?.norm()));
        }
        h = (0.02 * step.norm()).clamp(1e-11 * scale, 1e-6 * scale);
    }
    bisect_in_winding(f, seed, tol)
}

/// Re-polish an already-located zero against a sharper handle.
///
/// `seed` must lie within `guard` of the target zero (for example the output
/// of a cheaper search whose own error is below `guard`), with the verified
/// `multiplicity` from that search. Newton steps are leashed to a few times
/// `guard` around the seed, so the iteration cannot silently wander into a
/// different basin.
pub fn refine_zero<F>(
    f: &F,
    seed: Complex64,
    multiplicity: usize,
    guard: f64,
    tol: f64,
) -> Result<Complex64>
where
    F: Fn(Complex64) -> Result<Complex64> + ?Sized,
{
    if multiplicity == 0 || !(guard > 0.0) || !(tol > 0.0) {
        return Err(Error::invalid("refine_zero: need multiplicity >= 1, guard > 0, tol > 0"));
    }
    let s = Seed { center: seed, count: multiplicity, radius: guard };
    polish(f, &s, tol).map(|(k, _)| k)
}

/// Robust fallback: shrink a box around the seed by quadrisection, always
/// descending into the child with the largest count.
fn bisect_in_winding<F>(f: &F, seed: &Seed, tol: f64) -> Result<(Complex64, f64)>
where
    F: Fn(Complex64) -> Result<Complex64> + ?Sized,
{
    let r0 = (2.0 * seed.radius).max(10.0 * tol);
    let mut rect = Rectangle {
        re_min: seed.center.re - r0,
        re_max: seed.center.re + r0,
        im_min: seed.center.im - r0,
        im_max: seed.center.im + r0,
    };
    if count_zeros(f, &rect)? == 0 {
        return Err(Error::ZeroRefinementFailed { re: seed.center.re, im: seed.center.im });
    }
    while rect.diameter() > 2.0 * tol {
        let mut cut = rect.center();
        let mut descended = false;
        for attempt in 0..=JITTER_RETRIES {
            let kids = rect.quadrisect_at(cut);
            let mut best: Option<(usize, usize)> = None;
            let mut all_ok = true;
            for (i, kid) in kids.iter().enumerate() {
                match count_zeros(f, kid) {
                    Ok(c) => {
                        if c > 0 && best.map(|(_, bc)| c > bc).unwrap_or(true) {
                            best = Some((i, c));
                        }
                    }
                    Err(Error::BoundaryZero { .. }) => {
                        all_ok = false;
                        break;
                    }
                    Err(e) => return Err(e),
                }
            }
            if all_ok {
                if let Some((i, _)) = best {
                    rect = kids[i];
                    descended = true;
                }
                break;
            }
            let d = 1e-3 * rect.diameter() * (attempt + 1) as f64;
            let (dx, dy) = JITTER_DIRS[attempt % JITTER_DIRS.len()];
            cut = rect.center() + Complex64::new(dx * d, dy * d);
        }
        if !descended {
            return Err(Error::ZeroRefinementFailed { re: rect.center().re, im: rect.center().im });
        }
    }
    let k = rect.center();
    Ok((k, f(k)?.norm()))
}

/// Winding number of a small circle of radius `r` around `k` — the verified
/// multiplicity.
fn circle_multiplicity<F>(f: &F, k: Complex64, r: f64) -> Result<usize>
where
    F: Fn(Complex64) -> Result<Complex64> + ?Sized,
{
    for attempt in 0..=JITTER_RETRIES {
        let radius = r * (1.0 + 0.05 * attempt as f64);
        match adaptive_loop_winding(f, crate::numerics::circle_path(k, radius, 16)) {
            Ok(w) if w >= 0 => return Ok(w as usize),
            Ok(_) => {
                return Err(Error::invalid(
                    "circle_multiplicity: negative winding — handle is not analytic inside",
                ))
            }
            Err(Error::ZeroOnPath { .. }) if attempt < JITTER_RETRIES => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::BoundaryZero { retries: JITTER_RETRIES })
}

/// Locate all zeros of `f` in `rect` to `|dk| <= tol`, with verified
/// multiplicities summing to `count_zeros(f, rect)`.
pub fn locate_zeros<F>(f: &F, rect: &Rectangle, tol: f64) -> Result<Vec<Zero>>
where
    F: Fn(Complex64) -> Result<Complex64> + ?Sized,
{
    locate_zeros_scouted(f, f, rect, tol)
}

/// [`locate_zeros`] with a cheaper scout handle driving the subdivision.
///
/// The scout must approximate `f` well enough that its zeros sit within the
/// Newton basin of the true ones; the final count, every polish, and every
/// multiplicity verification still use `f`, and any disagreement falls back
/// to subdividing with `f` itself, so a poor scout costs time, not
/// correctness.
pub fn locate_zeros_scouted<F, G>(
    f: &F,
    scout: &G,
    rect: &Rectangle,
    tol: f64,
) -> Result<Vec<Zero>>
where
    F: Fn(Complex64) -> Result<Complex64> + ?Sized,
    G: Fn(Complex64) -> Result<Complex64> + ?Sized,
{
    if !(tol > 0.0) {
        return Err(Error::invalid("locate_zeros: need tol > 0"));
    }
    let total = count_zeros(f, rect)?;
    if total == 0 {
        return Ok(Vec::new());
    }
    let coarse = (1e-3 * rect.diameter()).max(200.0 * tol);

    let scout_total = count_zeros(scout, rect).unwrap_or(usize::MAX);
    let mut seeds = Vec::new();
    let scouted = scout_total == total;
    if scouted {
        gather_seeds(scout, rect, total, coarse, &mut seeds)?;
    } else {
        gather_seeds(f, rect, total, coarse, &mut seeds)?;
    }

    match polish_and_verify(f, &seeds, total, coarse, tol) {
        Ok(zeros) => Ok(zeros),
        Err(e) if scouted => {
            // scout led the subdivision astray; redo it with f itself
            let mut seeds = Vec::new();
            gather_seeds(f, rect, total, coarse, &mut seeds)?;
            polish_and_verify(f, &seeds, total, coarse, tol).map_err(|_| e)
        }
        Err(e) => Err(e),
    }
}

fn polish_and_verify<F>(
    f: &F,
    seeds: &[Seed],
    total: usize,
    coarse: f64,
    tol: f64,
) -> Result<Vec<Zero>>
where
    F: Fn(Complex64) -> Result<Complex64> + ?Sized,
{
    let mut candidates = Vec::with_capacity(seeds.len());
    for seed in seeds {
        let (k, residual) = polish(f, seed, tol)?;
        candidates.push(Zero { k, multiplicity: seed.count, residual });
    }

    // merge clusters indistinguishable at this tolerance
    candidates.sort_by(|a, b| {
        (a.k.re, a.k.im).partial_cmp(&(b.k.re, b.k.im)).unwrap_or(core::cmp::Ordering::Equal)
    });
    let mut merged: Vec<Zero> = Vec::new();
    for c in candidates {
        if let Some(last) = merged.last_mut() {
            if (last.k - c.k).norm() <= 30.0 * tol {
                last.multiplicity += c.multiplicity;
                if c.residual < last.residual {
                    last.k = c.k;
                    last.residual = c.residual;
                }
                continue;
            }
        }
        merged.push(c);
    }

    // verify multiplicities on shrunken circles; the circle winding is
    // authoritative. An empty circle means the polish undershot (e.g. the
    // seed misjudged the multiplicity), so grow the circle toward the
    // nearest neighbour before conceding.
    let mut verified_sum = 0;
    for i in 0..merged.len() {
        let nearest = merged
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, z)| (z.k - merged[i].k).norm())
            .fold(f64::INFINITY, f64::min);
        let cap = (0.45 * nearest).min(2.0 * coarse);
        let mut r = (0.3 * nearest).min(coarse.max(100.0 * tol)).max(50.0 * tol);
        let mut m = circle_multiplicity(f, merged[i].k, r)?;
        while m == 0 && 2.0 * r <= cap {
            r *= 2.0;
            m = circle_multiplicity(f, merged[i].k, r)?;
        }
        merged[i].multiplicity = m;
        verified_sum += m;
    }
    merged.retain(|z| z.multiplicity > 0);

    if verified_sum != total {
        return Err(Error::OracleMismatch(alloc::format!(
            "zero localization lost count: rectangle holds {total}, located {verified_sum}"
        )));
    }
    Ok(merged)
}

/// The constant `c_nu = (1/2pi) int_R dt / (1+t^2)^{nu/2}`, for `nu > 1`.
///
/// Substituting `t = sinh w` turns the integrand into `cosh(w)^{1-nu}`,
/// which decays like `e^{-(nu-1)|w|}`: a truncated composite Gauss rule plus
/// an explicit tail bound gives ~1e-14 absolute accuracy.
pub fn c_nu(nu: f64) -> Result<f64> {
    if !(nu > 1.0) {
        return Err(Error::invalid("c_nu: integral diverges unless nu > 1"));
    }
    let a = nu - 1.0;
    // tail: int_W^inf cosh^{-a} <= 2^a e^{-aW} / a <= 1e-15 target
    let w_max = core::f64::consts::LN_2 + ((1.0 / a).ln() + 34.54) / a;
    let panels = (w_max.ceil() as usize).clamp(1, 100_000);
    let mut sum = 0.0;
    for j in 0..panels {
        let lo = w_max * (j as f64) / (panels as f64);
        let hi = w_max * ((j + 1) as f64) / (panels as f64);
        let rule = crate::numerics::gauss_legendre(24, lo, hi)?;
        sum += rule.integrate::<f64, _>(|w| w.cosh().powf(1.0 - nu));
    }
    Ok(sum / core::f64::consts::PI)
}

/// The Blaschke product `B(k) = prod_j (k - k_j) / (k - conj(k_j) - 2 i eta)`
/// over zeros with `Im k_j > eta`. `|B| = 1` on the line `Im k = eta` and
/// `|B| < 1` strictly above it (off the zeros).
pub fn blaschke(k: Complex64, zeros: &[Complex64], eta: f64) -> Result<Complex64> {
    let mut b = Complex64::new(1.0, 0.0);
    for &z in zeros {
        if !(z.im > eta) {
            return Err(Error::invalid("blaschke: zeros must satisfy Im k_j > eta"));
        }
        let den = k - z.conj() - Complex64::new(0.0, 2.0 * eta);
        if den.norm() == 0.0 {
            return Err(Error::PoleHit);
        }
        b *= (k - z) / den;
    }
    Ok(b)
}

/// Uniform sampling spec for the line `Im k = eta`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LineSamplingSpec {
    /// Samples cover `|Re k| <= x_max`.
    pub x_max: f64,
    /// Number of uniform samples.
    pub samples: usize,
}

/// Caller-supplied analytic bounds that close the two gaps sampling leaves
/// open: the line supremum beyond `x_max`, and the absence of zeros far out.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TailCertificate {
    /// Upper bound for `|k|^nu ln|a(k)|` on the line beyond `|Re k| = x_max`.
    pub line_tail_bound: f64,
    /// `a` has no zeros with `Im k > eta` and `|k| >= zero_free_radius`.
    pub zero_free_radius: f64,
}

/// Outcome of the zero-sum inequality check: the sum of `Im k_j - eta` over
/// the zeros above the line, against `c_nu * A * |eta|^{-nu+1}`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ZeroSumReport {
    pub eta: f64,
    pub nu: f64,
    /// `A`: supremum of `|k|^nu ln|a(k)|` over the sampled line (clamped to
    /// `>= 0`), maxed with the tail bound when one was supplied.
    pub a_const: f64,
    /// `sum_j (Im k_j - eta)`.
    pub lhs: f64,
    /// `c_nu * A * |eta|^{-nu+1}`.
    pub rhs: f64,
    pub margin: f64,
    /// Zeros found above the line (inside the search region).
    pub zeros: Vec<Zero>,
    /// Whether a tail certificate made `A` and the zero search exhaustive.
    pub certified: bool,
    /// Decay probe: `|k| |a(k)-1|` must fall off along growing `|k|`.
    pub precheck_ok: bool,
}

/// Check the zero-sum inequality for a function `a` analytic in
/// `Im k > eta` with `a -> 1` at infinity.
///
/// `A` is realized as a clamped supremum of `|k|^nu ln|a|` over a sampled
/// piece of the line `Im k = eta`; with a [`TailCertificate`] the result is
/// exhaustive and a violated inequality is a hard error, without one the
/// report is informational (`certified = false`, nothing asserted).
pub fn verify_zero_sum<F>(
    a: &F,
    eta: f64,
    nu: f64,
    sampling: &LineSamplingSpec,
    cert: Option<&TailCertificate>,
) -> Result<ZeroSumReport>
where
    F: Fn(Complex64) -> Result<Complex64> + ?Sized,
{
    verify_zero_sum_scouted(a, a, eta, nu, sampling, cert)
}

/// [`verify_zero_sum`] with a cheap scout handle for the zero search.
pub fn verify_zero_sum_scouted<F, G>(
    a: &F,
    scout: &G,
    eta: f64,
    nu: f64,
    sampling: &LineSamplingSpec,
    cert: Option<&TailCertificate>,
) -> Result<ZeroSumReport>
where
    F: Fn(Complex64) -> Result<Complex64> + ?Sized,
    G: Fn(Complex64) -> Result<Complex64> + ?Sized,
{
    if eta == 0.0 || !eta.is_finite() {
        return Err(Error::invalid("verify_zero_sum: need finite eta != 0"));
    }
    if !(nu > 1.0) {
        return Err(Error::invalid("verify_zero_sum: need nu > 1"));
    }
    if !(sampling.x_max > 0.0) || sampling.samples < 2 {
        return Err(Error::invalid("verify_zero_sum: need x_max > 0 and >= 2 samples"));
    }

    // decay precheck: |k| |a - 1| should fall off with |k|
    let mut ratios = [0.0f64; 3];
    for (j, r) in ratios.iter_mut().enumerate() {
        let k = Complex64::new(sampling.x_max * (1 << j) as f64, eta);
        *r = k.norm() * (a(k)? - Complex64::new(1.0, 0.0)).norm();
    }
    let precheck_ok = ratios.iter().all(|r| r.abs() < 1e-12)
        || (ratios[1] <= 0.7 * ratios[0] && ratios[2] <= 0.7 * ratios[1]);

    // A from the sampled line
    let mut a_samp = 0.0f64;
    for j in 0..sampling.samples {
        let x = -sampling.x_max
            + 2.0 * sampling.x_max * (j as f64) / ((sampling.samples - 1) as f64);
        let k = Complex64::new(x, eta);
        let val = a(k)?.norm().ln();
        if val.is_finite() {
            a_samp = a_samp.max(k.norm().powf(nu) * val);
        }
    }
    let a_const = match cert {
        Some(c) => a_samp.max(c.line_tail_bound.max(0.0)),
        None => a_samp,
    };

    // zero search above the line
    let x_z = cert.map(|c| c.zero_free_radius).unwrap_or(sampling.x_max);
    let pad = 1e-9 * eta.abs().max(1.0);
    let rect = Rectangle::new(-x_z, x_z, eta + pad, (eta + pad).max(0.0) + x_z)?;
    let zeros = locate_zeros_scouted(a, scout, &rect, 1e-9)?;

    let lhs: f64 = zeros.iter().map(|z| z.multiplicity as f64 * (z.k.im - eta)).sum();
    let rhs = c_nu(nu)? * a_const * eta.abs().powf(1.0 - nu);
    let margin = rhs - lhs;
    let certified = cert.is_some();
    if certified && lhs > rhs * (1.0 + 1e-6) {
        return Err(Error::OracleMismatch(alloc::format!(
            "zero-sum inequality violated: lhs {lhs:.6e} > rhs {rhs:.6e}"
        )));
    }
    Ok(ZeroSumReport { eta, nu, a_const, lhs, rhs, margin, zeros, certified, precheck_ok })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use num_complex::Complex64 as C;
    use rand::{Rng, SeedableRng};

    fn ok<F: Fn(C) -> C>(f: F) -> impl Fn(C) -> crate::Result<C> {
        move |k| Ok(f(k))
    }

    #[test]
    fn count_simple_examples() {
        let r = Rectangle::new(-2.0, 2.0, 0.5, 2.0).unwrap();
        assert_eq!(count_zeros(&ok(|k| k * k + C::new(1.0, 0.0)), &r).unwrap(), 1);
        assert_eq!(count_zeros(&ok(|_| C::new(1.0, 0.0)), &r).unwrap(), 0);
        let r2 = Rectangle::new(0.0, 2.0, 0.0, 2.0).unwrap();
        let double = ok(|k| {
            let d = k - C::new(1.0, 1.0);
            d * d
        });
        assert_eq!(count_zeros(&double, &r2).unwrap(), 2);
    }

    #[test]
    fn count_jitters_past_boundary_zero() {
        // zero exactly on the boundary midpoint of the bottom edge
        let r = Rectangle::new(-1.0, 1.0, 0.0, 2.0).unwrap();
        let f = ok(|k: C| k * (k - C::new(0.0, 1.0)));
        // k = 0 sits on the path; jitter decides a side deterministically
        let c = count_zeros(&f, &r).unwrap();
        assert!(c == 1 || c == 2, "count {c}");
    }

    #[test]
    fn count_is_additive_over_partitions() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(77);
        let mut trials = 0;
        while trials < 200 {
            let deg = rng.gen_range(1..=6);
            let roots: alloc::vec::Vec<C> = (0..deg)
                .map(|_| C::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)))
                .collect();
            let poly = |k: C| roots.iter().fold(C::new(1.0, 0.0), |p, &z| p * (k - z));
            let f = ok(poly);
            let rect = Rectangle::new(-2.5, 2.5, -2.5, 2.5).unwrap();
            let split_re = rng.gen_range(-1.5..1.5);
            let split_im = rng.gen_range(-1.5..1.5);
            let kids = rect.quadrisect_at(C::new(split_re, split_im));
            let whole = count_zeros(&f, &rect).unwrap();
            let parts: usize =
                kids.iter().map(|kid| count_zeros(&f, kid).unwrap()).sum();
            assert_eq!(whole, parts);
            assert_eq!(whole, deg);
            trials += 1;
        }
    }

    #[test]
    fn locate_single_root_of_quadratic() {
        let r = Rectangle::new(-2.0, 2.0, 0.5, 2.0).unwrap();
        let zeros =
            locate_zeros(&ok(|k| k * k + C::new(1.0, 0.0)), &r, 1e-10).unwrap();
        assert_eq!(zeros.len(), 1);
        assert_eq!(zeros[0].multiplicity, 1);
        assert_abs_diff_eq!(zeros[0].k.re, 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(zeros[0].k.im, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn locate_two_factored_roots() {
        let r = Rectangle::new(0.0, 2.0, 0.0, 1.0).unwrap();
        let f = ok(|k: C| (k - C::new(0.5, 0.5)) * (k - C::new(1.5, 0.5)));
        let zeros = locate_zeros(&f, &r, 1e-10).unwrap();
        assert_eq!(zeros.len(), 2);
        assert_abs_diff_eq!(zeros[0].k.re, 0.5, epsilon = 1e-9);
        assert_abs_diff_eq!(zeros[0].k.im, 0.5, epsilon = 1e-9);
        assert_abs_diff_eq!(zeros[1].k.re, 1.5, epsilon = 1e-9);
        assert_abs_diff_eq!(zeros[1].k.im, 0.5, epsilon = 1e-9);
        assert!(zeros.iter().all(|z| z.multiplicity == 1));
    }

    #[test]
    fn locate_multiple_zero_with_multiplicity() {
        let r = Rectangle::new(0.0, 2.0, 0.0, 2.0).unwrap();
        let f = ok(|k: C| {
            let d = k - C::new(1.0, 1.0);
            d * d * d
        });
        let zeros = locate_zeros(&f, &r, 1e-9).unwrap();
        assert_eq!(zeros.len(), 1);
        assert_eq!(zeros[0].multiplicity, 3);
        assert_abs_diff_eq!(zeros[0].k.re, 1.0, epsilon = 1e-8);
        assert_abs_diff_eq!(zeros[0].k.im, 1.0, epsilon = 1e-8);
    }

    #[test]
    fn locate_random_polynomials_against_their_roots() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(13);
        for _ in 0..25 {
            let deg = rng.gen_range(1..=5);
            let roots: alloc::vec::Vec<C> = (0..deg)
                .map(|_| C::new(rng.gen_range(-1.8..1.8), rng.gen_range(-1.8..1.8)))
                .collect();
            let f = ok(|k: C| roots.iter().fold(C::new(1.0, 0.0), |p, &z| p * (k - z)));
            let rect = Rectangle::new(-2.0, 2.0, -2.0, 2.0).unwrap();
            let zeros = locate_zeros(&f, &rect, 1e-9).unwrap();
            let found: usize = zeros.iter().map(|z| z.multiplicity).sum();
            assert_eq!(found, deg);
            for z in &zeros {
                let nearest =
                    roots.iter().map(|r| (z.k - r).norm()).fold(f64::INFINITY, f64::min);
                assert!(nearest < 1e-7, "located {} off by {nearest}", z.k);
            }
        }
    }

    #[test]
    fn scouted_subdivision_still_verifies_with_fine_function() {
        // scout is a deliberately perturbed version of f
        let f = ok(|k: C| (k - C::new(0.3, 0.7)) * (k - C::new(-0.9, 1.2)));
        let scout = ok(|k: C| {
            (k - C::new(0.3 + 2e-3, 0.7 - 1e-3)) * (k - C::new(-0.9 + 1e-3, 1.2 + 2e-3))
        });
        let rect = Rectangle::new(-2.0, 2.0, 0.0, 2.0).unwrap();
        let zeros = locate_zeros_scouted(&f, &scout, &rect, 1e-10).unwrap();
        assert_eq!(zeros.len(), 2);
        assert_abs_diff_eq!(zeros[0].k.re, -0.9, epsilon = 1e-9);
        assert_abs_diff_eq!(zeros[1].k.re, 0.3, epsilon = 1e-9);
    }

    #[test]
    fn residuals_are_small_against_boundary_scale() {
        let r = Rectangle::new(-2.0, 2.0, 0.5, 2.0).unwrap();
        let f = ok(|k| k * k + C::new(1.0, 0.0));
        let zeros = locate_zeros(&f, &r, 1e-10).unwrap();
        // |f| ~ 1 at distance 1 from the zero
        assert!(zeros[0].residual <= 1e-8);
    }

    #[test]
    fn c_nu_closed_forms() {
        assert_relative_eq!(c_nu(2.0).unwrap(), 0.5, epsilon = 1e-12);
        assert_relative_eq!(
            c_nu(3.0).unwrap(),
            core::f64::consts::FRAC_1_PI,
            epsilon = 1e-12
        );
        assert_relative_eq!(c_nu(4.0).unwrap(), 0.25, epsilon = 1e-12);
        assert_relative_eq!(
            c_nu(5.0).unwrap(),
            2.0 / (3.0 * core::f64::consts::PI),
            epsilon = 1e-12
        );
        assert!(c_nu(1.0).is_err());
        assert!(c_nu(0.5).is_err());
    }

    #[test]
    fn c_nu_is_decreasing_in_nu() {
        let grid = [1.5, 2.0, 3.0, 5.0, 9.0];
        let vals: alloc::vec::Vec<f64> = grid.iter().map(|&n| c_nu(n).unwrap()).collect();
        for w in vals.windows(2) {
            assert!(w[0] > w[1]);
        }
    }

    #[test]
    fn blaschke_base_cases() {
        assert_eq!(blaschke(C::new(0.3, 0.9), &[], -1.0).unwrap(), C::new(1.0, 0.0));
        // single zero i, eta = -1, k = 2i: (2i - i)/(2i + i + 2i) = 1/5
        let b = blaschke(C::new(0.0, 2.0), &[C::new(0.0, 1.0)], -1.0).unwrap();
        assert_relative_eq!(b.norm(), 0.2, epsilon = 1e-15);
        // zero below the line rejected
        assert!(blaschke(C::new(0.0, 2.0), &[C::new(0.0, -2.0)], -1.0).is_err());
        // pole hit: k = conj(k_1) + 2 i eta = -i + (-2i)... with eta=-1, zero=i: pole at -i-2i=-3i
        assert!(matches!(
            blaschke(C::new(0.0, -3.0), &[C::new(0.0, 1.0)], -1.0),
            Err(Error::PoleHit)
        ));
    }

    #[test]
    fn blaschke_is_unimodular_on_the_line() {
        let eta = -0.7;
        let zeros = [C::new(0.4, 0.2), C::new(-1.1, 1.3), C::new(2.0, -0.5)];
        for j in 0..100 {
            let x = -50.0 + j as f64;
            let b = blaschke(C::new(x, eta), &zeros, eta).unwrap();
            assert_relative_eq!(b.norm(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn blaschke_contracts_above_the_line() {
        let eta = -0.5;
        let zeros = [C::new(0.3, 0.4), C::new(-0.8, 0.9)];
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        for _ in 0..50 {
            let k = C::new(rng.gen_range(-3.0..3.0), rng.gen_range(-0.45..3.0));
            if zeros.iter().any(|z| (k - z).norm() < 1e-6) {
                continue;
            }
            let b = blaschke(k, &zeros, eta).unwrap();
            assert!(b.norm() < 1.0);
        }
    }

    #[test]
    fn zero_sum_trivial_function() {
        let spec = LineSamplingSpec { x_max: 10.0, samples: 64 };
        let cert = TailCertificate { line_tail_bound: 0.0, zero_free_radius: 10.0 };
        let report = verify_zero_sum(&ok(|_| C::new(1.0, 0.0)), -0.5, 2.0, &spec, Some(&cert))
            .unwrap();
        assert_eq!(report.a_const, 0.0);
        assert_eq!(report.lhs, 0.0);
        assert_eq!(report.rhs, 0.0);
        assert!(report.certified);
        assert!(report.precheck_ok);
        assert!(report.zeros.is_empty());
    }

    #[test]
    fn zero_sum_flags_non_decaying_input() {
        // Blaschke-type factor: |k||a-1| tends to a constant, which violates
        // the required o(1/|k|) decay of a - 1
        let f = ok(|k: C| (k - C::new(0.0, 1.0)) / (k + C::new(0.0, 1.0)));
        let spec = LineSamplingSpec { x_max: 20.0, samples: 64 };
        let report = verify_zero_sum(&f, -0.5, 2.0, &spec, None).unwrap();
        assert!(!report.precheck_ok);
        assert!(!report.certified);
    }

    #[test]
    fn rectangle_validation() {
        assert!(Rectangle::new(1.0, 0.0, 0.0, 1.0).is_err());
        assert!(Rectangle::new(0.0, 1.0, 1.0, 1.0).is_err());
        assert!(Rectangle::new(0.0, f64::INFINITY, 0.0, 1.0).is_err());
    }
}
