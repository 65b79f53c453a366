//! Adaptive Simpson quadrature for piecewise smooth integrands.

use crate::error::{Error, Result};
use crate::scalar::Real;

const MAX_DEPTH: u32 = 48;

#[derive(Clone, Copy)]
struct Panel<T> {
    a: T,
    m: T,
    b: T,
    fa: T,
    fm: T,
    fb: T,
    whole: T,
}

/// Integrates `f` over `[lo, hi]` to absolute tolerance `tol`.
///
/// Fails with [`Error::Numeric`] naming the subinterval where the recursion
/// bottomed out without meeting its share of the tolerance, or where the
/// integrand produced a non-finite value.
pub fn adaptive_simpson<T, F>(f: &F, lo: T, hi: T, tol: T) -> Result<T>
where
    T: Real,
    F: Fn(T) -> T,
{
    if lo == hi {
        return Ok(T::zero());
    }
    if hi < lo {
        return adaptive_simpson(f, hi, lo, tol).map(|v| -v);
    }
    let half = T::lit(0.5);
    let m = half * (lo + hi);
    let (fa, fm, fb) = (f(lo), f(m), f(hi));
    let whole = (hi - lo) / T::lit(6.0) * (fa + T::lit(4.0) * fm + fb);
    recurse(f, Panel { a: lo, m, b: hi, fa, fm, fb, whole }, tol, MAX_DEPTH)
}

fn recurse<T, F>(f: &F, p: Panel<T>, tol: T, depth: u32) -> Result<T>
where
    T: Real,
    F: Fn(T) -> T,
{
    let half = T::lit(0.5);
    let six = T::lit(6.0);
    let four = T::lit(4.0);
    let lm = half * (p.a + p.m);
    let rm = half * (p.m + p.b);
    let (flm, frm) = (f(lm), f(rm));
    let left = (p.m - p.a) / six * (p.fa + four * flm + p.fm);
    let right = (p.b - p.m) / six * (p.fm + four * frm + p.fb);
    let both = left + right;
    let diff = both - p.whole;
    if !both.is_finite() {
        return Err(Error::Numeric {
            lo: p.a.as_f64(),
            hi: p.b.as_f64(),
            msg: "non-finite integrand".into(),
        });
    }
    // Richardson-corrected acceptance
    if diff.abs() <= T::lit(15.0) * tol {
        return Ok(both + diff / T::lit(15.0));
    }
    // panel no longer resolvable in this precision
    if depth == 0 || lm <= p.a || rm >= p.b {
        return Err(Error::Numeric {
            lo: p.a.as_f64(),
            hi: p.b.as_f64(),
            msg: format!("adaptive Simpson did not converge (error estimate {:e})", diff.abs().as_f64()),
        });
    }
    let l = Panel { a: p.a, m: lm, b: p.m, fa: p.fa, fm: flm, fb: p.fm, whole: left };
    let r = Panel { a: p.m, m: rm, b: p.b, fa: p.fm, fm: frm, fb: p.fb, whole: right };
    Ok(recurse(f, l, half * tol, depth - 1)? + recurse(f, r, half * tol, depth - 1)?)
}

/// Integrates over `[lo, hi]`, splitting panels at every knot strictly inside.
/// Each panel gets the full absolute tolerance `tol`.
pub fn integrate_piecewise<T, F>(f: &F, lo: T, hi: T, knots: &[T], tol: T) -> Result<T>
where
    T: Real,
    F: Fn(T) -> T,
{
    let (a, b, sign) = if lo <= hi { (lo, hi, T::one()) } else { (hi, lo, -T::one()) };
    let mut cuts: Vec<T> = knots.iter().copied().filter(|&k| k > a && k < b).collect();
    cuts.sort_by(|x, y| x.partial_cmp(y).expect("finite knots"));
    let mut total = T::zero();
    let mut left = a;
    for c in cuts.into_iter().chain(std::iter::once(b)) {
        total = total + adaptive_simpson(f, left, c, tol)?;
        left = c;
    }
    Ok(sign * total)
}
