//! Bracketed scalar root finding.

use crate::error::{Error, Result};

/// Brent's method on a bracket `[a, b]` with `f(a) * f(b) <= 0`.
///
/// Terminates when the bracket is narrower than `x_tol` (plus a few ulps) or
/// an exact zero is hit.
pub fn brent<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, x_tol: f64) -> Result<f64> {
    let (mut a, mut b) = (a, b);
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if !(fa.is_finite() && fb.is_finite()) || fa.signum() == fb.signum() {
        return Err(Error::BracketInvalid { a, b, fa, fb });
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..200 {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * x_tol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b);
        if !fb.is_finite() {
            return Err(Error::RootFindingFailure(format!("non-finite value at x = {b}")));
        }
    }
    Err(Error::RootFindingFailure("Brent iteration limit reached".into()))
}

/// Plain bisection on a predicate that is `true` at `lo` and `false` at `hi`
/// (or vice versa); returns the final bracket.
pub fn bisect_predicate<P: FnMut(f64) -> bool>(mut pred: P, lo: f64, hi: f64, x_tol: f64) -> (f64, f64) {
    let (mut lo, mut hi) = (lo, hi);
    let p_lo = pred(lo);
    while (hi - lo).abs() > x_tol {
        let mid = 0.5 * (lo + hi);
        if pred(mid) == p_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo, hi)
}

/// Scans `n` equal subintervals of `[a, b]` and refines every sign change with
/// Brent's method. Roots are returned in increasing order.
pub fn all_roots<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, n: usize, x_tol: f64) -> Result<Vec<f64>> {
    let mut roots = Vec::new();
    let h = (b - a) / n as f64;
    let mut x0 = a;
    let mut f0 = f(x0);
    for i in 1..=n {
        let x1 = if i == n { b } else { a + h * i as f64 };
        let f1 = f(x1);
        if f0 == 0.0 {
            roots.push(x0);
        } else if f0.signum() != f1.signum() && f1 != 0.0 && f0.is_finite() && f1.is_finite() {
            roots.push(brent(&mut f, x0, x1, x_tol)?);
        }
        x0 = x1;
        f0 = f1;
    }
    if f0 == 0.0 {
        roots.push(x0);
    }
    Ok(roots)
}
