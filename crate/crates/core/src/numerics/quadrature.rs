use serde::Serialize;

use crate::error::{QacError, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuadratureKind {
    GaussHermiteProbabilist,
}

/// Quadrature rule for the standard Gaussian measure `Dz = e^{-z^2/2} dz / sqrt(2 pi)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
    pub kind: QuadratureKind,
}

impl<T: Real> QuadratureRule<T> {
    pub const DEFAULT_NODES: usize = 120;

    /// Probabilists' Gauss-Hermite rule with `n` nodes; weights sum to one.
    ///
    /// Nodes come from Newton iteration on the orthonormal Hermite recurrence in `f64`
    /// and are then cast to `T`.
    pub fn gauss_hermite(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(QacError::invalid("quadrature needs at least one node"));
        }
        let (x, w) = hermite_physicist(n)?;
        // physicists' weight e^{-x^2}  ->  probabilists' e^{-z^2/2}, z = sqrt(2) x
        let total: f64 = w.iter().sum();
        let mut pairs: Vec<(f64, f64)> = x
            .iter()
            .zip(&w)
            .map(|(&xi, &wi)| (xi * std::f64::consts::SQRT_2, wi / total))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(Self {
            nodes: pairs.iter().map(|p| T::lit(p.0)).collect(),
            weights: pairs.iter().map(|p| T::lit(p.1)).collect(),
            kind: QuadratureKind::GaussHermiteProbabilist,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `sum_i w_i f(x_i)` without the finiteness check.
    #[inline]
    pub fn sum<F: FnMut(T) -> T>(&self, mut f: F) -> T {
        self.nodes
            .iter()
            .zip(&self.weights)
            .fold(T::zero(), |acc, (&x, &w)| acc + w * f(x))
    }
}

fn hermite_physicist(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    const MAX_ITS: usize = 100;
    let pim4 = std::f64::consts::PI.powf(-0.25);
    let nf = n as f64;
    let m = n.div_ceil(2);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut z = 0.0_f64;
    for i in 0..m {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-0.16667),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        let mut converged = false;
        for _ in 0..MAX_ITS {
            let mut p1 = pim4;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                converged = true;
                break;
            }
        }
        if !converged || !z.is_finite() {
            return Err(QacError::NonConvergence {
                iterations: MAX_ITS,
                residual: f64::NAN,
                last: vec![z],
            });
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    Ok((x, w))
}

/// `sum_i w_i f(z_i)`, failing on the first non-finite integrand value.
pub fn gauss_integrate<T: Real, F: FnMut(T) -> T>(mut f: F, rule: &QuadratureRule<T>) -> Result<T> {
    let mut acc = T::zero();
    for (i, (&x, &w)) in rule.nodes.iter().zip(&rule.weights).enumerate() {
        let v = f(x);
        if !v.is_finite() {
            return Err(QacError::NonFiniteIntegrand {
                index: i,
                node: x.as_f64(),
            });
        }
        acc = acc + w * v;
    }
    Ok(acc)
}

/// Reference integrator for `int Dz f(z)` by adaptive Simpson on `[-12, 12]`.
///
/// Slow; meant for cross-checking the Gauss-Hermite path.
pub fn adaptive_gauss_integral<F: Fn(f64) -> f64>(f: F, tol: f64) -> f64 {
    let norm = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
    let g = |z: f64| f(z) * (-0.5 * z * z).exp() * norm;
    // split at the origin so kinks placed there by symmetric integrands land on a panel edge
    let mut total = 0.0;
    for (a, b) in [(-12.0, -6.0), (-6.0, 0.0), (0.0, 6.0), (6.0, 12.0)] {
        let (fa, fm, fb) = (g(a), g(0.5 * (a + b)), g(b));
        let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        total += simpson_rec(&g, a, b, fa, fm, fb, whole, tol / 4.0, 50);
    }
    total
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<G: Fn(f64) -> f64>(
    g: &G,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (g(lm), g(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_rec(g, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
        + simpson_rec(g, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}
