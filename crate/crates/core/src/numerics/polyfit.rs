use serde::Serialize;

use crate::error::{QacError, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult<T> {
    /// Ascending degree: `c[0] + c[1] x + ...`.
    pub coefficients: Vec<T>,
    pub residual_rms: T,
}

pub fn polyval<T: Real>(coefficients: &[T], x: T) -> T {
    coefficients.iter().rev().fold(T::zero(), |acc, &c| acc * x + c)
}

/// Least-squares polynomial fit via Householder QR of the Vandermonde matrix.
pub fn polyfit<T: Real>(xs: &[T], ys: &[T], degree: usize) -> Result<FitResult<T>> {
    if xs.len() != ys.len() {
        return Err(QacError::invalid(format!(
            "polyfit: {} abscissae but {} ordinates",
            xs.len(),
            ys.len()
        )));
    }
    let n = xs.len();
    let k = degree + 1;
    if n < k {
        return Err(QacError::invalid(format!(
            "polyfit: degree {degree} needs at least {k} points, got {n}"
        )));
    }
    // column-major Vandermonde
    let mut a: Vec<Vec<T>> = (0..k).map(|j| xs.iter().map(|&x| x.powi(j as i32)).collect()).collect();
    let mut b: Vec<T> = ys.to_vec();
    for j in 0..k {
        let norm = a[j][j..].iter().fold(T::zero(), |s, &v| s + v * v).sqrt();
        if norm == T::zero() {
            return Err(QacError::invalid(
                "polyfit: rank-deficient design (repeated abscissae?)",
            ));
        }
        let alpha = if a[j][j] > T::zero() { -norm } else { norm };
        let mut v: Vec<T> = a[j][j..].to_vec();
        v[0] = v[0] - alpha;
        let vnorm2 = v.iter().fold(T::zero(), |s, &x| s + x * x);
        if vnorm2 == T::zero() {
            continue;
        }
        let two = T::lit(2.0);
        for col in a.iter_mut().skip(j) {
            let dot = v.iter().zip(&col[j..]).fold(T::zero(), |s, (&vi, &ci)| s + vi * ci);
            let scale = two * dot / vnorm2;
            for (ci, &vi) in col[j..].iter_mut().zip(&v) {
                *ci = *ci - scale * vi;
            }
        }
        let dot = v.iter().zip(&b[j..]).fold(T::zero(), |s, (&vi, &bi)| s + vi * bi);
        let scale = two * dot / vnorm2;
        for (bi, &vi) in b[j..].iter_mut().zip(&v) {
            *bi = *bi - scale * vi;
        }
    }
    let eps = T::epsilon() * T::from_count(n) * a[0][0].abs();
    let mut c = vec![T::zero(); k];
    for j in (0..k).rev() {
        if a[j][j].abs() <= eps {
            return Err(QacError::invalid("polyfit: rank-deficient design"));
        }
        let mut s = b[j];
        for (i, ci) in c.iter().enumerate().skip(j + 1) {
            s = s - a[i][j] * *ci;
        }
        c[j] = s / a[j][j];
    }
    let sse = xs.iter().zip(ys).fold(T::zero(), |s, (&x, &y)| {
        let r = y - polyval(&c, x);
        s + r * r
    });
    Ok(FitResult {
        coefficients: c,
        residual_rms: (sse / T::from_count(n)).sqrt(),
    })
}
