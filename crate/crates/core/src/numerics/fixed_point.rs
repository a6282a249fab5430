use serde::Serialize;

use crate::error::{QacError, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FixedPointConfig {
    pub damping: f64,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for FixedPointConfig {
    fn default() -> Self {
        Self {
            damping: 0.5,
            max_iter: 10_000,
            tol: 1e-10,
        }
    }
}

impl FixedPointConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(QacError::invalid(format!(
                "damping must lie in (0, 1], got {}",
                self.damping
            )));
        }
        if !(self.tol > 0.0) {
            return Err(QacError::invalid(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(QacError::invalid("max_iter must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointOutcome<T> {
    pub x: Vec<T>,
    pub iterations: usize,
    /// Sup-norm of the final damped update.
    pub residual: T,
}

/// Damped iteration `x <- (1-d) x + d map(x)` until the sup-norm update drops below `tol`.
///
/// The map may fail (e.g. leaving its domain); that error is returned unchanged.
/// A non-finite iterate is reported as divergence, running out of iterations as non-convergence.
pub fn fixed_point<T, F>(mut map: F, x0: Vec<T>, cfg: &FixedPointConfig) -> Result<FixedPointOutcome<T>>
where
    T: Real,
    F: FnMut(&[T]) -> Result<Vec<T>>,
{
    cfg.validate()?;
    let d = T::lit(cfg.damping);
    let keep = T::one() - d;
    let tol = T::lit(cfg.tol);
    let mut x = x0;
    let mut residual = T::infinity();
    for it in 1..=cfg.max_iter {
        let fx = map(&x)?;
        if fx.len() != x.len() {
            return Err(QacError::invalid("fixed-point map changed the state dimension"));
        }
        residual = T::zero();
        let mut finite = true;
        for (xi, fi) in x.iter_mut().zip(&fx) {
            let next = keep * *xi + d * *fi;
            if !next.is_finite() {
                finite = false;
            }
            residual = residual.max((next - *xi).abs());
            *xi = next;
        }
        if !finite {
            return Err(QacError::Divergence {
                iteration: it,
                last: x.iter().map(|v| v.as_f64()).collect(),
            });
        }
        if residual <= tol {
            return Ok(FixedPointOutcome {
                x,
                iterations: it,
                residual,
            });
        }
    }
    Err(QacError::NonConvergence {
        iterations: cfg.max_iter,
        residual: residual.as_f64(),
        last: x.iter().map(|v| v.as_f64()).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn contraction_to_zero() {
        let cfg = FixedPointConfig::default();
        let out = fixed_point(|x: &[f64]| Ok(vec![0.5 * x[0]]), vec![1.0], &cfg).unwrap();
        assert!(out.x[0].abs() <= 1e-9);
    }

    #[test]
    fn cosine_fixed_point_independent_of_damping() {
        let map = |x: &[f64]| Ok(vec![x[0].cos()]);
        let a = fixed_point(
            map,
            vec![1.0],
            &FixedPointConfig {
                damping: 0.5,
                ..Default::default()
            },
        )
        .unwrap();
        let b = fixed_point(
            map,
            vec![1.0],
            &FixedPointConfig {
                damping: 0.9,
                ..Default::default()
            },
        )
        .unwrap();
        assert!((a.x[0] - b.x[0]).abs() < 1e-9);
        assert!((a.x[0] - 0.739_085_133_215_160_6).abs() < 1e-9);
    }

    #[test]
    fn undamped_cycle_is_non_convergence() {
        let cfg = FixedPointConfig {
            damping: 1.0,
            max_iter: 50,
            tol: 1e-12,
        };
        let err = fixed_point(|x: &[f64]| Ok(vec![1.0 - x[0]]), vec![0.0], &cfg).unwrap_err();
        match err {
            QacError::NonConvergence { iterations, last, .. } => {
                assert_eq!(iterations, 50);
                assert_eq!(last.len(), 1);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn blow_up_is_divergence() {
        let cfg = FixedPointConfig {
            damping: 1.0,
            max_iter: 5000,
            tol: 1e-12,
        };
        let err = fixed_point(|x: &[f64]| Ok(vec![x[0] * 1e10]), vec![1.0], &cfg).unwrap_err();
        assert!(matches!(err, QacError::Divergence { .. }));
    }

    #[test]
    fn rejects_bad_config() {
        let cfg = FixedPointConfig {
            damping: 0.0,
            ..Default::default()
        };
        assert!(fixed_point(|x: &[f64]| Ok(x.to_vec()), vec![0.0], &cfg).is_err());
    }
}
