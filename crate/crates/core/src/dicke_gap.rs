//! Single-copy Hamiltonian in the maximal-spin (Dicke) subspace and its minimum gap.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{QacError, Result};
use crate::numerics::{golden_section_max_iter, polyfit};
use crate::scalar::Real;

/// Symmetric tridiagonal matrix on the basis `M = -N/2, ..., N/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct DickeHamiltonian<T> {
    pub n: usize,
    pub p: u32,
    pub gamma: T,
    pub field: T,
    pub diag: Vec<T>,
    pub offdiag: Vec<T>,
}

pub fn build_dicke<T: Real>(n: usize, p: u32, gamma: T, field: T) -> Result<DickeHamiltonian<T>> {
    if n == 0 {
        return Err(QacError::invalid("N must be at least 1"));
    }
    if p < 2 {
        return Err(QacError::invalid(format!("p must be >= 2, got {p}")));
    }
    let nf = T::from_count(n);
    let half = nf / T::lit(2.0);
    let two = T::lit(2.0);
    let scale = (two / nf).powi(p as i32 - 1);
    let ms: Vec<T> = (0..=n).map(|j| T::from_count(j) - half).collect();
    let diag = ms
        .iter()
        .map(|&m| -two * (scale * m.powi(p as i32) + gamma * m))
        .collect();
    let s2 = half * (half + T::one());
    let offdiag = ms[..n]
        .iter()
        .map(|&m| -field * (s2 - m * (m + T::one())).max(T::zero()).sqrt())
        .collect();
    Ok(DickeHamiltonian {
        n,
        p,
        gamma,
        field,
        diag,
        offdiag,
    })
}

/// Symmetry sector of the spectrum to analyse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sector {
    Full,
    /// States even under `M -> -M`; only a symmetry when `gamma = 0` and `p` is even.
    Even,
}

impl Sector {
    /// `Even` where the spin-flip symmetry holds, otherwise `Full`.
    ///
    /// With the symmetry present the lowest full-spectrum gap is the exponentially small
    /// tunnelling splitting of the ground doublet, not the avoided crossing.
    pub fn natural<T: Real>(p: u32, gamma: T) -> Self {
        if gamma == T::zero() && p.is_multiple_of(2) {
            Sector::Even
        } else {
            Sector::Full
        }
    }
}

impl<T: Real> DickeHamiltonian<T> {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Restriction to the parity-even subspace, itself tridiagonal.
    pub fn even_sector(&self) -> (Vec<T>, Vec<T>) {
        let n = self.n;
        if n.is_multiple_of(2) {
            let c = n / 2;
            let d = self.diag[c..].to_vec();
            let mut e = self.offdiag[c..].to_vec();
            if let Some(first) = e.first_mut() {
                *first = *first * T::SQRT_2();
            }
            (d, e)
        } else {
            let c = n.div_ceil(2);
            let mut d = self.diag[c..].to_vec();
            d[0] = d[0] + self.offdiag[c - 1];
            (d, self.offdiag[c..].to_vec())
        }
    }

    fn sector_matrix(&self, sector: Sector) -> (Vec<T>, Vec<T>) {
        match sector {
            Sector::Full => (self.diag.clone(), self.offdiag.clone()),
            Sector::Even => self.even_sector(),
        }
    }

    pub fn norm_bound(&self) -> T {
        let dmax = self.diag.iter().fold(T::zero(), |a, &v| a.max(v.abs()));
        let emax = self.offdiag.iter().fold(T::zero(), |a, &v| a.max(v.abs()));
        dmax + emax + emax
    }

    /// Two lowest eigenvalues in `sector`, ascending.
    pub fn two_lowest(&self, sector: Sector) -> Result<(T, T)> {
        let (d, e) = self.sector_matrix(sector);
        if d.len() < 2 {
            return Err(QacError::invalid("sector has fewer than two states"));
        }
        Ok((tridiagonal_eigenvalue(&d, &e, 0), tridiagonal_eigenvalue(&d, &e, 1)))
    }

    pub fn gap(&self, sector: Sector) -> Result<T> {
        let (a, b) = self.two_lowest(sector)?;
        Ok(b - a)
    }
}

/// Number of eigenvalues strictly below `x`.
pub fn sturm_count<T: Real>(d: &[T], e: &[T], x: T) -> usize {
    let emax = e.iter().fold(T::zero(), |a, &v| a.max(v.abs()));
    let pivmin = T::min_positive_value() * (emax * emax).max(T::one());
    let mut count = 0;
    let mut q = d[0] - x;
    for i in 0..d.len() {
        if i > 0 {
            q = d[i] - x - e[i - 1] * e[i - 1] / q;
        }
        if q.abs() < pivmin {
            q = -pivmin;
        }
        if q < T::zero() {
            count += 1;
        }
    }
    count
}

/// `k`-th smallest eigenvalue (0-based) by Sturm bisection to floating-point resolution.
pub fn tridiagonal_eigenvalue<T: Real>(d: &[T], e: &[T], k: usize) -> T {
    assert!(k < d.len(), "eigenvalue index out of range");
    let n = d.len();
    let mut lo = T::infinity();
    let mut hi = T::neg_infinity();
    for i in 0..n {
        let r = if i > 0 { e[i - 1].abs() } else { T::zero() } + if i + 1 < n { e[i].abs() } else { T::zero() };
        lo = lo.min(d[i] - r);
        hi = hi.max(d[i] + r);
    }
    let pad = T::epsilon() * (lo.abs().max(hi.abs())) * T::lit(4.0) + T::min_positive_value();
    lo = lo - pad;
    hi = hi + pad;
    for _ in 0..2000 {
        let mid = (lo + hi) * T::lit(0.5);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(d, e, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (lo + hi) * T::lit(0.5)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapPoint<T> {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "Gamma_min")]
    pub field_min: T,
    #[serde(rename = "Delta_min")]
    pub delta_min: T,
    /// Minimum found at the edge of the coarse grid.
    #[serde(skip)]
    pub at_boundary: bool,
    #[serde(skip)]
    pub norm: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapScanConfig<T> {
    pub field_lo: T,
    pub field_hi: T,
    /// Coarse grid uses `max(min_points, points_per_n * N)` points.
    pub min_points: usize,
    pub points_per_n: usize,
    /// Golden-section tolerance on the field.
    pub refine_tol: T,
    pub sector: Option<Sector>,
}

impl<T: Real> Default for GapScanConfig<T> {
    fn default() -> Self {
        Self {
            field_lo: T::lit(0.5),
            field_hi: T::lit(3.0),
            min_points: 200,
            points_per_n: 5,
            // the avoided crossing narrows exponentially in N
            refine_tol: T::epsilon() * T::lit(8.0),
            sector: None,
        }
    }
}

/// Minimum over the field of the gap between the two lowest levels.
pub fn min_gap<T: Real>(n: usize, p: u32, gamma: T, cfg: &GapScanConfig<T>) -> Result<GapPoint<T>> {
    if !(cfg.field_lo < cfg.field_hi) || cfg.field_lo < T::zero() {
        return Err(QacError::invalid("gap scan needs 0 <= field_lo < field_hi"));
    }
    let sector = cfg.sector.unwrap_or_else(|| Sector::natural(p, gamma));
    let gap_at = |g: T| -> Result<T> { build_dicke(n, p, gamma, g)?.gap(sector) };
    let points = cfg.min_points.max(cfg.points_per_n * n).max(3);
    let step = (cfg.field_hi - cfg.field_lo) / T::from_count(points - 1);
    let grid: Vec<T> = (0..points).map(|i| cfg.field_lo + step * T::from_count(i)).collect();
    let mut best = 0;
    let mut best_val = T::infinity();
    for (i, &g) in grid.iter().enumerate() {
        let v = gap_at(g)?;
        if v < best_val {
            best_val = v;
            best = i;
        }
    }
    let at_boundary = best == 0 || best == points - 1;
    if at_boundary {
        log::warn!(
            "gap minimum for N = {n} at the edge of [{}, {}]; widen the field grid",
            cfg.field_lo,
            cfg.field_hi
        );
    }
    let a = grid[best.saturating_sub(1)];
    let b = grid[(best + 1).min(points - 1)];
    let (mut gmin, mut dmin) = golden_section_max_iter(
        |g| gap_at(g).unwrap_or(T::infinity()),
        a,
        b,
        cfg.refine_tol * (T::one() + b.abs()),
        400,
    );
    if best_val < dmin {
        gmin = grid[best];
        dmin = best_val;
    }
    let norm = build_dicke(n, p, gamma, gmin)?.norm_bound();
    Ok(GapPoint {
        n,
        field_min: gmin,
        delta_min: dmin,
        at_boundary,
        norm,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapScalingFit<T> {
    pub p: u32,
    pub gamma: T,
    pub sector: Sector,
    pub per_n: Vec<GapPoint<T>>,
    /// Sizes left out because their gap is at the rounding floor.
    pub excluded: Vec<usize>,
    #[serde(rename = "C")]
    pub c: T,
    pub fit_residual: T,
}

/// Noise floor multiplier for the fitted gaps, in units of `eps * ||H||`.
pub const GAP_FLOOR_FACTOR: f64 = 1e3;

/// Fits `ln Delta_min = a + N ln C` over `n_list`.
pub fn fit_gap_coefficient<T: Real>(
    p: u32,
    gamma: T,
    n_list: &[usize],
    cfg: &GapScanConfig<T>,
) -> Result<GapScalingFit<T>> {
    if n_list.len() < 2 {
        return Err(QacError::invalid("gap fit needs at least two sizes"));
    }
    let sector = cfg.sector.unwrap_or_else(|| Sector::natural(p, gamma));
    let cfg = GapScanConfig {
        sector: Some(sector),
        ..*cfg
    };
    let per_n: Vec<GapPoint<T>> = n_list
        .par_iter()
        .map(|&n| min_gap(n, p, gamma, &cfg))
        .collect::<Result<Vec<_>>>()?;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut excluded = Vec::new();
    for pt in &per_n {
        if !(pt.delta_min > T::zero()) {
            return Err(QacError::Precision {
                n: pt.n,
                gap: pt.delta_min.as_f64(),
                floor: 0.0,
            });
        }
        let floor = T::lit(GAP_FLOOR_FACTOR) * T::epsilon() * pt.norm;
        if pt.delta_min < floor {
            log::info!(
                "excluding N = {} from the fit: gap {} below floor {}",
                pt.n,
                pt.delta_min,
                floor
            );
            excluded.push(pt.n);
            continue;
        }
        xs.push(T::from_count(pt.n));
        ys.push(pt.delta_min.ln());
    }
    if xs.len() < 2 {
        let worst = per_n
            .iter()
            .min_by(|a, b| a.delta_min.partial_cmp(&b.delta_min).unwrap());
        let (n, gap, floor) = worst
            .map(|w| {
                (
                    w.n,
                    w.delta_min.as_f64(),
                    (T::lit(GAP_FLOOR_FACTOR) * T::epsilon() * w.norm).as_f64(),
                )
            })
            .unwrap_or((0, 0.0, 0.0));
        return Err(QacError::Precision { n, gap, floor });
    }
    let fit = polyfit(&xs, &ys, 1)?;
    Ok(GapScalingFit {
        p,
        gamma,
        sector,
        per_n,
        excluded,
        c: fit.coefficients[1].exp(),
        fit_residual: fit.residual_rms,
    })
}
