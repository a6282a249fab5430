//! Free energy and saddle-point conditions of the penalty-encoded p-body ferromagnet.

use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{QacError, Result};
use crate::numerics::{fixed_point, golden_section, FixedPointConfig};
use crate::scalar::{log_add_exp, sigmoid, Real};

/// Inverse temperature, either finite or the zero-temperature limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Beta<T> {
    Finite(T),
    Infinite,
}

impl<T: Real> Beta<T> {
    pub fn from_temperature(t: T) -> Self {
        if t == T::zero() {
            Beta::Infinite
        } else {
            Beta::Finite(T::one() / t)
        }
    }

    pub fn temperature(&self) -> T {
        match *self {
            Beta::Finite(b) => T::one() / b,
            Beta::Infinite => T::zero(),
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Beta::Infinite)
    }
}

impl<T: Real> fmt::Display for Beta<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Beta::Finite(b) => write!(f, "{b}"),
            Beta::Infinite => f.write_str("inf"),
        }
    }
}

impl<T: Real> Serialize for Beta<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Beta::Finite(b) => s.serialize_f64(b.as_f64()),
            Beta::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<T: Real> std::str::FromStr for Beta<T> {
    type Err = QacError;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("inf") || t.eq_ignore_ascii_case("infinity") {
            return Ok(Beta::Infinite);
        }
        let v: f64 = t
            .parse()
            .map_err(|_| QacError::invalid(format!("beta must be a positive number or 'inf', got '{s}'")))?;
        if v.is_infinite() && v > 0.0 {
            return Ok(Beta::Infinite);
        }
        if !(v > 0.0 && v.is_finite()) {
            return Err(QacError::invalid(format!("beta must be positive, got {v}")));
        }
        Ok(Beta::Finite(T::lit(v)))
    }
}

/// Parameter point of the encoded ferromagnet.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(bound(serialize = "T: Real + Serialize"))]
pub struct FerroParams<T> {
    /// Interaction order.
    pub p: u32,
    /// Number of code copies (odd).
    #[serde(rename = "K")]
    pub k: usize,
    /// Penalty strength.
    pub gamma: T,
    /// Transverse field.
    #[serde(rename = "Gamma")]
    pub field: T,
    pub beta: Beta<T>,
    #[serde(rename = "J")]
    pub j: T,
}

impl<T: Real> FerroParams<T> {
    pub fn new(p: u32, k: usize, gamma: T, field: T, beta: Beta<T>) -> Result<Self> {
        let s = Self {
            p,
            k,
            gamma,
            field,
            beta,
            j: T::one(),
        };
        s.validate()?;
        Ok(s)
    }

    /// Zero-temperature, single-copy parameters.
    pub fn ground(p: u32, gamma: T, field: T) -> Self {
        Self {
            p,
            k: 1,
            gamma,
            field,
            beta: Beta::Infinite,
            j: T::one(),
        }
    }

    pub fn with_field(mut self, field: T) -> Self {
        self.field = field;
        self
    }

    pub fn with_gamma(mut self, gamma: T) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn with_beta(mut self, beta: Beta<T>) -> Self {
        self.beta = beta;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.p < 2 {
            return Err(QacError::invalid(format!("p must be >= 2, got {}", self.p)));
        }
        if self.k == 0 || self.k.is_multiple_of(2) {
            return Err(QacError::invalid(format!("K must be odd and positive, got {}", self.k)));
        }
        if !(self.gamma >= T::zero() && self.gamma.is_finite()) {
            return Err(QacError::invalid(format!(
                "gamma must be finite and >= 0, got {}",
                self.gamma
            )));
        }
        if !(self.field >= T::zero() && self.field.is_finite()) {
            return Err(QacError::invalid(format!(
                "Gamma must be finite and >= 0, got {}",
                self.field
            )));
        }
        if let Beta::Finite(b) = self.beta {
            if !(b > T::zero() && b.is_finite()) {
                return Err(QacError::invalid(format!("beta must be positive, got {b}")));
            }
        }
        if !(self.j > T::zero() && self.j.is_finite()) {
            return Err(QacError::invalid(format!("J must be positive, got {}", self.j)));
        }
        Ok(())
    }
}

/// Per-copy Hubbard-Stratonovich fields.
#[derive(Debug, Clone, PartialEq)]
pub struct CopyMagnetizations<T>(Vec<T>);

impl<T: Real> CopyMagnetizations<T> {
    pub fn new(m: Vec<T>, k: usize) -> Result<Self> {
        if m.len() != k {
            return Err(QacError::invalid(format!("expected {k} copy fields, got {}", m.len())));
        }
        if let Some(bad) = m.iter().find(|v| !(v.abs() <= T::one())) {
            return Err(QacError::invalid(format!("copy field {bad} outside [-1, 1]")));
        }
        Ok(Self(m))
    }

    pub fn uniform(m: T, k: usize) -> Self {
        Self(vec![m; k])
    }

    /// `kappa` copies at `+m`, the rest at `-m`.
    pub fn mixed(m: T, k: usize, kappa: usize) -> Result<Self> {
        if kappa > k {
            return Err(QacError::invalid(format!("kappa = {kappa} exceeds K = {k}")));
        }
        Ok(Self((0..k).map(|i| if i < kappa { m } else { -m }).collect()))
    }

    pub fn as_slice(&self) -> &[T] {
        &self.0
    }
}

#[inline]
fn hypot_gap<T: Real>(g: T, field: T) -> T {
    (g * g + field * field).sqrt()
}

/// `g / sqrt(g^2 + Gamma^2)`, taken as 0 when both vanish.
#[inline]
pub(crate) fn unit_ratio<T: Real>(g: T, u: T) -> T {
    if u == T::zero() {
        T::zero()
    } else {
        g / u
    }
}

/// Free energy in units of `J` times `J`, summed over copies.
///
/// Finite `beta`: log-sum-exp over the two penalty orientations. Zero temperature: the
/// dominant orientation, i.e. `sum_k (p-1) m_k^p - max(sum_k u+_k, sum_k u-_k)`, which equals
/// the `|m_k|` form for every uniform configuration.
pub fn free_energy<T: Real>(params: &FerroParams<T>, m: &CopyMagnetizations<T>) -> T {
    free_energy_slice(params, m.as_slice())
}

pub(crate) fn free_energy_slice<T: Real>(params: &FerroParams<T>, m: &[T]) -> T {
    let p = params.p as i32;
    let pf = T::from_u32(params.p).unwrap();
    let mut poly = T::zero();
    let mut up = T::zero();
    let mut um = T::zero();
    for &mk in m {
        poly = poly + (pf - T::one()) * mk.powi(p);
        let h = pf * mk.powi(p - 1);
        up = up + hypot_gap(params.gamma + h, params.field);
        um = um + hypot_gap(params.gamma - h, params.field);
    }
    let f = match params.beta {
        Beta::Infinite => poly - up.max(um),
        Beta::Finite(b) => poly - log_add_exp(b * up, b * um) / b,
    };
    params.j * f
}

/// Free energy of the uniform configuration `m_k = m`.
pub fn free_energy_uniform<T: Real>(params: &FerroParams<T>, m: T) -> T {
    let p = params.p as i32;
    let pf = T::from_u32(params.p).unwrap();
    let kf = T::from_count(params.k);
    let h = pf * m.powi(p - 1);
    let up = kf * hypot_gap(params.gamma + h, params.field);
    let um = kf * hypot_gap(params.gamma - h, params.field);
    let poly = kf * (pf - T::one()) * m.powi(p);
    let f = match params.beta {
        Beta::Infinite => poly - up.max(um),
        Beta::Finite(b) => poly - log_add_exp(b * up, b * um) / b,
    };
    params.j * f
}

/// Right-hand side of the uniform self-consistency condition.
pub fn saddle_map<T: Real>(params: &FerroParams<T>, m: T) -> T {
    let p = params.p as i32;
    let pf = T::from_u32(params.p).unwrap();
    match params.beta {
        Beta::Infinite => {
            let g = params.gamma + pf * m.abs().powi(p - 1);
            unit_ratio(g, hypot_gap(g, params.field))
        }
        Beta::Finite(b) => {
            let h = pf * m.powi(p - 1);
            let gp = params.gamma + h;
            let gm = params.gamma - h;
            let up = hypot_gap(gp, params.field);
            let um = hypot_gap(gm, params.field);
            let kb = T::from_count(params.k) * b;
            let wp = sigmoid(kb * (up - um));
            let wm = sigmoid(kb * (um - up));
            unit_ratio(gp, up) * wp - unit_ratio(gm, um) * wm
        }
    }
}

/// `m - RHS(m)`; zero at stationary points of the uniform free energy.
pub fn saddle_residual<T: Real>(params: &FerroParams<T>, m: T) -> T {
    m - saddle_map(params, m)
}

/// Numerical derivative of the uniform free energy. One-sided at `m = 0`.
pub fn uniform_slope<T: Real>(params: &FerroParams<T>, m: T, h: T) -> T {
    if m == T::zero() {
        (free_energy_uniform(params, h) - free_energy_uniform(params, T::zero())) / h
    } else {
        (free_energy_uniform(params, m + h) - free_energy_uniform(params, m - h)) / (h + h)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Symmetric,
    Broken,
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Branch::Symmetric => "symmetric",
            Branch::Broken => "broken",
        })
    }
}

/// Amplitude below which an order parameter counts as zero when labelling branches.
pub const SYMMETRIC_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct SaddleSolution<T> {
    pub m: T,
    /// `|m - RHS(m)|` at the returned point.
    pub residual: T,
    pub iterations: usize,
    pub branch: Branch,
    pub free_energy: T,
}

/// Damped iteration of `m <- RHS(m)` from `m0`.
pub fn solve_saddle<T: Real>(params: &FerroParams<T>, m0: T, cfg: &FixedPointConfig) -> Result<SaddleSolution<T>> {
    params.validate()?;
    if !(m0 >= T::zero() && m0 <= T::one()) {
        return Err(QacError::invalid(format!("seed m0 must lie in [0, 1], got {m0}")));
    }
    let out = fixed_point(|x: &[T]| Ok(vec![saddle_map(params, x[0])]), vec![m0], cfg)?;
    let m = out.x[0];
    Ok(SaddleSolution {
        m,
        residual: saddle_residual(params, m).abs(),
        iterations: out.iterations,
        branch: if m.abs() < T::lit(SYMMETRIC_THRESHOLD) {
            Branch::Symmetric
        } else {
            Branch::Broken
        },
        free_energy: free_energy_uniform(params, m),
    })
}

/// Free energy with `kappa` copies at `+m` and `K - kappa` at `-m`.
pub fn mixed_copy_free_energy<T: Real>(params: &FerroParams<T>, m: T, kappa: usize) -> Result<T> {
    let cfg = CopyMagnetizations::mixed(m, params.k, kappa)?;
    Ok(free_energy(params, &cfg))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LocalMinimum<T> {
    pub m: T,
    #[serde(rename = "F")]
    pub f: T,
    pub is_global: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LandscapeSample<T> {
    pub grid: Vec<(T, T)>,
    pub minima: Vec<LocalMinimum<T>>,
}

impl<T: Real> LandscapeSample<T> {
    pub fn global(&self) -> Option<&LocalMinimum<T>> {
        self.minima
            .iter()
            .filter(|m| m.is_global)
            .min_by(|a, b| a.f.partial_cmp(&b.f).unwrap_or(std::cmp::Ordering::Equal))
    }
}

pub const LANDSCAPE_POINTS: usize = 2001;
pub const MINIMUM_REFINE_TOL: f64 = 1e-8;
pub const DEGENERACY_TOL: f64 = 1e-6;

/// Samples the uniform free energy on an even grid and refines every local minimum.
///
/// Endpoints count as minima when the adjacent grid value is not lower.
pub fn scan_landscape<T: Real>(params: &FerroParams<T>, m_lo: T, m_hi: T, n_grid: usize) -> Result<LandscapeSample<T>> {
    params.validate()?;
    if !(m_lo < m_hi) {
        return Err(QacError::invalid("landscape needs m_lo < m_hi"));
    }
    if n_grid < 3 {
        return Err(QacError::invalid("landscape needs at least 3 grid points"));
    }
    let step = (m_hi - m_lo) / T::from_count(n_grid - 1);
    let grid: Vec<(T, T)> = (0..n_grid)
        .map(|i| {
            let m = if i == n_grid - 1 {
                m_hi
            } else {
                m_lo + step * T::from_count(i)
            };
            (m, free_energy_uniform(params, m))
        })
        .collect();
    let f = |m: T| free_energy_uniform(params, m);
    let tol = T::lit(MINIMUM_REFINE_TOL);
    let mut found: Vec<(T, T)> = Vec::new();
    let n = n_grid;
    if grid[0].1 <= grid[1].1 {
        found.push(golden_section(f, grid[0].0, grid[1].0, tol));
    }
    for i in 1..n - 1 {
        if grid[i].1 < grid[i - 1].1 && grid[i].1 <= grid[i + 1].1 {
            found.push(golden_section(f, grid[i - 1].0, grid[i + 1].0, tol));
        }
    }
    if grid[n - 1].1 < grid[n - 2].1 {
        found.push(golden_section(f, grid[n - 2].0, grid[n - 1].0, tol));
    }
    found.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
    found.dedup_by(|a, b| (a.0 - b.0).abs() < T::lit(1e-6));
    let fmin = found.iter().fold(T::infinity(), |acc, x| acc.min(x.1));
    let deg = T::lit(DEGENERACY_TOL);
    let minima = found
        .into_iter()
        .map(|(m, fm)| LocalMinimum {
            m,
            f: fm,
            is_global: fm <= fmin + deg,
        })
        .collect();
    Ok(LandscapeSample { grid, minima })
}
