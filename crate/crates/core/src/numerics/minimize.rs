use crate::scalar::Real;

/// Golden-section search for a minimum of `f` on `[lo, hi]`, stopping when the bracket is
/// narrower than `tol`. Returns the best point seen and its value.
pub fn golden_section<T: Real, F: FnMut(T) -> T>(f: F, lo: T, hi: T, tol: T) -> (T, T) {
    golden_section_max_iter(f, lo, hi, tol, 400)
}

pub fn golden_section_max_iter<T: Real, F: FnMut(T) -> T>(mut f: F, lo: T, hi: T, tol: T, max_iter: usize) -> (T, T) {
    let invphi = T::lit(0.618_033_988_749_894_9);
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut c = b - invphi * (b - a);
    let mut d = a + invphi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut iter = 0;
    while (b - a) > tol && iter < max_iter {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = f(d);
        }
        iter += 1;
        if c >= d {
            break;
        }
    }
    if fc <= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}
