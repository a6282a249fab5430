use crate::error::{QacError, Result};
use crate::scalar::Real;

pub const DEFAULT_ROOT_TOL: f64 = 1e-8;

/// Brent's method on a sign-changing bracket.
///
/// Returns `x` whose enclosing bracket is no wider than `tol`. Every step that would not
/// shrink the bracket enough falls back to bisection.
pub fn find_root_bracketed<T: Real, F: FnMut(T) -> T>(mut f: F, lo: T, hi: T, tol: T) -> Result<T> {
    if !(tol > T::zero()) {
        return Err(QacError::invalid("root tolerance must be positive"));
    }
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if !fa.is_finite() || !fb.is_finite() || fa * fb > T::zero() {
        return Err(QacError::NoBracket {
            lo: lo.as_f64(),
            hi: hi.as_f64(),
            f_lo: fa.as_f64(),
            f_hi: fb.as_f64(),
        });
    }
    if fa == T::zero() {
        return Ok(a);
    }
    if fb == T::zero() {
        return Ok(b);
    }
    let two = T::lit(2.0);
    let half = T::lit(0.5);
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    let eps = T::epsilon();
    for _ in 0..500 {
        if fb * fc > T::zero() {
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
        let tol1 = two * eps * b.abs() + half * tol;
        let xm = half * (c - b);
        if xm.abs() <= tol1 || fb == T::zero() {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = two * xm * s;
                q = T::one() - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (two * xm * qq * (qq - r) - (b - a) * (r - T::one()));
                q = (qq - T::one()) * (r - T::one()) * (s - T::one());
            }
            if p > T::zero() {
                q = -q;
            }
            p = p.abs();
            let min1 = T::lit(3.0) * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if two * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b = if d.abs() > tol1 { b + d } else { b + tol1.copysign(xm) };
        fb = f(b);
        if !fb.is_finite() {
            return Err(QacError::NonFiniteIntegrand {
                index: 0,
                node: b.as_f64(),
            });
        }
    }
    Ok(b)
}
