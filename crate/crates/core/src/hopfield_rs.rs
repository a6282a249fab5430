//! Hopfield models with penalty encoding: finite numbers of condensed patterns, and the
//! zero-temperature replica-symmetric equations for extensively many patterns.

use std::fmt;

use serde::Serialize;

use crate::error::{QacError, Result};
use crate::meanfield_core::{Branch, SYMMETRIC_THRESHOLD};
use crate::numerics::{
    find_root_bracketed, fixed_point, gauss_integrate, golden_section, FixedPointConfig, QuadratureRule,
};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HopfieldParams<T> {
    pub p: u32,
    #[serde(rename = "K")]
    pub k: usize,
    pub gamma: T,
    #[serde(rename = "Gamma")]
    pub field: T,
    /// Pattern load: number of patterns over `N^(p-1)`.
    pub a: T,
    #[serde(rename = "J")]
    pub j: T,
}

impl<T: Real> HopfieldParams<T> {
    pub fn new(p: u32, k: usize, gamma: T, field: T, a: T) -> Result<Self> {
        let s = Self {
            p,
            k,
            gamma,
            field,
            a,
            j: T::one(),
        };
        s.validate()?;
        Ok(s)
    }

    pub fn with_field(mut self, field: T) -> Self {
        self.field = field;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.p < 2 {
            return Err(QacError::invalid(format!("p must be >= 2, got {}", self.p)));
        }
        if self.k == 0 || self.k.is_multiple_of(2) {
            return Err(QacError::invalid(format!("K must be odd and positive, got {}", self.k)));
        }
        for (name, v) in [("gamma", self.gamma), ("Gamma", self.field), ("a", self.a)] {
            if !(v >= T::zero() && v.is_finite()) {
                return Err(QacError::invalid(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        if !(self.j > T::zero() && self.j.is_finite()) {
            return Err(QacError::invalid(format!("J must be positive, got {}", self.j)));
        }
        Ok(())
    }
}

/// Largest number of condensed patterns enumerated exactly.
pub const MAX_PATTERNS: u32 = 10;

/// Zero-temperature free energy with `l` condensed patterns of equal overlap `m`, averaged
/// exactly over the `2^l` pattern configurations. Summed over the `K` copies and scaled by `J`.
pub fn finite_pattern_free_energy<T: Real>(params: &HopfieldParams<T>, l: u32, m: T) -> Result<T> {
    if l == 0 || l > MAX_PATTERNS {
        return Err(QacError::invalid(format!(
            "pattern count l must lie in 1..={MAX_PATTERNS}, got {l}"
        )));
    }
    let p = params.p as i32;
    let pf = T::from_u32(params.p).unwrap();
    let lf = T::from_u32(l).unwrap();
    let h = pf * m.powi(p - 1);
    // configurations with the same sum of xi contribute equally
    let mut acc = T::zero();
    let mut binom = T::one();
    for plus in 0..=l {
        let s = T::from_i64(2 * plus as i64 - l as i64).unwrap();
        let g = params.gamma + (h * s).abs();
        acc = acc + binom * (g * g + params.field * params.field).sqrt();
        binom = binom * T::from_u32(l - plus).unwrap() / T::from_u32(plus + 1).unwrap();
    }
    let avg = acc / T::lit(2.0).powi(l as i32);
    let kf = T::from_count(params.k);
    Ok(params.j * kf * ((pf - T::one()) * lf * m.powi(p) - avg))
}

/// Minimum over `m` in `[0, 1]` of the finite-pattern free energy: grid scan plus golden refinement.
pub fn finite_pattern_minimum<T: Real>(params: &HopfieldParams<T>, l: u32, n_grid: usize) -> Result<(T, T)> {
    if n_grid < 3 {
        return Err(QacError::invalid("grid needs at least 3 points"));
    }
    let f = |m: T| finite_pattern_free_energy(params, l, m);
    let step = T::one() / T::from_count(n_grid - 1);
    let mut best = (0usize, T::infinity());
    for i in 0..n_grid {
        let v = f(step * T::from_count(i))?;
        if v < best.1 {
            best = (i, v);
        }
    }
    let a = step * T::from_count(best.0.saturating_sub(1));
    let b = (step * T::from_count(best.0 + 1)).min(T::one());
    let (x, fx) = golden_section(|m| f(m).unwrap_or(T::infinity()), a, b, T::lit(1e-10));
    Ok(if fx <= best.1 {
        (x, fx)
    } else {
        (step * T::from_count(best.0), best.1)
    })
}

/// Gaussian moments `(int g/u, int g^2/u^2, int Gamma^2/u^3)` for `g = mean + width z`.
fn moments<T: Real>(mean: T, width: T, field: T, rule: &QuadratureRule<T>) -> Result<(T, T, T)> {
    let f2 = field * field;
    let pieces = |z: T| {
        let g = mean + width * z;
        let u2 = g * g + f2;
        if u2 == T::zero() {
            (T::zero(), T::zero(), T::zero())
        } else {
            let u = u2.sqrt();
            (g / u, g * g / u2, f2 / (u2 * u))
        }
    };
    let m = gauss_integrate(|z| pieces(z).0, rule)?;
    let q = gauss_integrate(|z| pieces(z).1, rule)?;
    let c = gauss_integrate(|z| pieces(z).2, rule)?;
    Ok((m, q, c))
}

fn clamp_nonneg<T: Real>(name: &str, v: T) -> T {
    if v < T::zero() {
        log::debug!("{name} = {v} < 0 clamped to zero");
        T::zero()
    } else {
        v
    }
}

/// Consistency map for `p >= 3`: returns `(m', q', C)`.
pub fn rs_consistency_p_ge_3<T: Real>(
    params: &HopfieldParams<T>,
    state: (T, T),
    rule: &QuadratureRule<T>,
) -> Result<(T, T, T)> {
    if params.p < 3 {
        return Err(QacError::invalid("this map needs p >= 3"));
    }
    let (m, q) = state;
    let m = clamp_nonneg("m", m);
    let q = clamp_nonneg("q", q);
    let p = params.p as i32;
    let pf = T::from_u32(params.p).unwrap();
    let mean = pf * m.powi(p - 1) + params.gamma;
    let width = (params.a * pf * q.powi(p - 1)).sqrt();
    moments(mean, width, params.field, rule)
}

/// Consistency map for `p = 2`, state `(m, q, C)`: returns `(m', q', C')`.
///
/// Uses the normalization in which the zero-load limit is the ferromagnet with
/// transition at `Gamma = 2`.
pub fn rs_consistency_p2<T: Real>(
    params: &HopfieldParams<T>,
    state: (T, T, T),
    rule: &QuadratureRule<T>,
) -> Result<(T, T, T)> {
    if params.p != 2 {
        return Err(QacError::invalid("this map needs p = 2"));
    }
    let (m, q, c) = state;
    if !(c < T::one()) {
        return Err(QacError::ReplicaBreakdown { c: c.as_f64() });
    }
    let m = clamp_nonneg("m", m);
    let q = clamp_nonneg("q", q);
    let two = T::lit(2.0);
    let one_minus = T::one() - c;
    let q_tilde = q / (one_minus * one_minus);
    let (m1, q1, c1) = moments(
        two * m + params.gamma,
        two * (params.a * q_tilde).sqrt(),
        params.field,
        rule,
    )?;
    Ok((m1, q1, two * c1))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RSolution<T> {
    pub m: T,
    pub q: T,
    #[serde(rename = "C")]
    pub c: T,
    /// `|x - map(x)|` for each of `(m, q, C)`.
    pub residuals: [T; 3],
    pub branch: Branch,
    pub iterations: usize,
}

impl<T: Real> RSolution<T> {
    pub fn max_residual(&self) -> T {
        self.residuals.iter().fold(T::zero(), |a, &r| a.max(r))
    }
}

/// Zero-temperature replica-symmetric free energy per copy, times `J`.
pub fn rs_free_energy<T: Real>(params: &HopfieldParams<T>, sol: &RSolution<T>, rule: &QuadratureRule<T>) -> Result<T> {
    let p = params.p as i32;
    let pf = T::from_u32(params.p).unwrap();
    let (m, q, c) = (sol.m.max(T::zero()), sol.q.max(T::zero()), sol.c);
    let f2 = params.field * params.field;
    let f = if params.p == 2 {
        if !(c < T::one()) {
            return Err(QacError::ReplicaBreakdown { c: c.as_f64() });
        }
        let two = T::lit(2.0);
        let om = T::one() - c;
        let mean = two * m + params.gamma;
        let width = two * (params.a * q / (om * om)).sqrt();
        let integral = gauss_integrate(
            |z| {
                let g = mean + width * z;
                (g * g + f2).sqrt()
            },
            rule,
        )?;
        m * m + params.a * (-T::one() + q * c / (om * om)) - integral
    } else {
        let mean = pf * m.powi(p - 1) + params.gamma;
        let width = (params.a * pf * q.powi(p - 1)).sqrt();
        let integral = gauss_integrate(
            |z| {
                let g = mean + width * z;
                (g * g + f2).sqrt()
            },
            rule,
        )?;
        (pf - T::one()) * m.powi(p) + params.a * pf * (pf - T::one()) / T::lit(2.0) * c * q.powi(p - 1) - integral
    };
    Ok(params.j * f)
}

fn apply_map<T: Real>(params: &HopfieldParams<T>, x: &[T], rule: &QuadratureRule<T>) -> Result<Vec<T>> {
    if params.p == 2 {
        let (m, q, c) = rs_consistency_p2(params, (x[0], x[1], x[2]), rule)?;
        Ok(vec![m, q, c])
    } else {
        let (m, q, _) = rs_consistency_p_ge_3(params, (x[0], x[1]), rule)?;
        Ok(vec![m, q])
    }
}

fn finish<T: Real>(
    params: &HopfieldParams<T>,
    x: &[T],
    iterations: usize,
    rule: &QuadratureRule<T>,
) -> Result<RSolution<T>> {
    let (m, q) = (x[0].max(T::zero()), x[1].max(T::zero()));
    let (m1, q1, c1, c) = if params.p == 2 {
        let (m1, q1, c1) = rs_consistency_p2(params, (m, q, x[2]), rule)?;
        (m1, q1, c1, x[2])
    } else {
        let (m1, q1, c1) = rs_consistency_p_ge_3(params, (m, q), rule)?;
        (m1, q1, c1, c1)
    };
    let thr = T::lit(SYMMETRIC_THRESHOLD);
    Ok(RSolution {
        m,
        q,
        c,
        residuals: [(m - m1).abs(), (q - q1).abs(), (c - c1).abs()],
        branch: if m < thr && q < thr {
            Branch::Symmetric
        } else {
            Branch::Broken
        },
        iterations,
    })
}

/// Damped fixed point of the consistency map from `seed = (m0, q0)`, or `(m0, q0, C0)` for
/// `p = 2` (a missing `C0` starts at zero).
pub fn solve_rs<T: Real>(
    params: &HopfieldParams<T>,
    seed: &[T],
    cfg: &FixedPointConfig,
    rule: &QuadratureRule<T>,
) -> Result<RSolution<T>> {
    params.validate()?;
    if seed.len() < 2 {
        return Err(QacError::invalid("seed needs at least (m0, q0)"));
    }
    let x0 = if params.p == 2 {
        vec![seed[0], seed[1], seed.get(2).copied().unwrap_or(T::zero())]
    } else {
        vec![seed[0], seed[1]]
    };
    let out = fixed_point(|x: &[T]| apply_map(params, x, rule), x0, cfg)?;
    finish(params, &out.x, out.iterations, rule)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepDirection {
    Up,
    Down,
}

impl fmt::Display for SweepDirection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepDirection::Up => "up",
            SweepDirection::Down => "down",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepJump<T> {
    pub field_before: T,
    pub field_after: T,
    pub m_before: T,
    pub m_after: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTrace<T> {
    pub direction: SweepDirection,
    pub points: Vec<(T, RSolution<T>)>,
    pub jumps: Vec<SweepJump<T>>,
}

pub const JUMP_THRESHOLD: f64 = 0.05;

/// Continuation along `grid`: each point is seeded from the previous solution.
///
/// The direction is read off the grid, which must be strictly monotone.
pub fn sweep_gamma_axis<T: Real>(
    params: &HopfieldParams<T>,
    grid: &[T],
    seed: &[T],
    jump_threshold: T,
    cfg: &FixedPointConfig,
    rule: &QuadratureRule<T>,
) -> Result<SweepTrace<T>> {
    if grid.len() < 2 {
        return Err(QacError::invalid("sweep needs at least two field values"));
    }
    let up = grid[1] > grid[0];
    if !grid.windows(2).all(|w| if up { w[1] > w[0] } else { w[1] < w[0] }) {
        return Err(QacError::invalid("sweep grid must be strictly monotone"));
    }
    let mut state: Vec<T> = seed.to_vec();
    let mut points = Vec::with_capacity(grid.len());
    let mut jumps = Vec::new();
    for &g in grid {
        let sol = solve_rs(&params.with_field(g), &state, cfg, rule)?;
        if let Some((g0, prev)) = points.last().map(|(g0, s): &(T, RSolution<T>)| (*g0, *s)) {
            if (sol.m - prev.m).abs() > jump_threshold {
                jumps.push(SweepJump {
                    field_before: g0,
                    field_after: g,
                    m_before: prev.m,
                    m_after: sol.m,
                });
            }
        }
        state = vec![sol.m, sol.q, sol.c];
        points.push((g, sol));
    }
    Ok(SweepTrace {
        direction: if up { SweepDirection::Up } else { SweepDirection::Down },
        points,
        jumps,
    })
}

/// Even grid from `lo` to `hi` inclusive.
pub fn linspace<T: Real>(lo: T, hi: T, n: usize) -> Vec<T> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| {
                if i == n - 1 {
                    hi
                } else {
                    lo + (hi - lo) * T::from_count(i) / T::from_count(n - 1)
                }
            })
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RsCrossing<T> {
    #[serde(rename = "Gamma_c")]
    pub field: T,
    pub broken: RSolution<T>,
    pub symmetric: RSolution<T>,
}

/// Field where the broken branch (seeded at `m = q = 1`) and the branch seeded at
/// `m = q = 0` have equal free energy.
pub fn locate_rs_crossing<T: Real>(
    params: &HopfieldParams<T>,
    bracket: (T, T),
    cfg: &FixedPointConfig,
    rule: &QuadratureRule<T>,
) -> Result<RsCrossing<T>> {
    let one = [T::one(), T::one()];
    let zero = [T::zero(), T::zero()];
    let branches = |g: T| -> Result<(RSolution<T>, RSolution<T>, T)> {
        let pr = params.with_field(g);
        let b = solve_rs(&pr, &one, cfg, rule)?;
        let s = solve_rs(&pr, &zero, cfg, rule)?;
        if (b.m - s.m).abs() < T::lit(1e-3) {
            return Err(QacError::Spinodal { last_gamma: g.as_f64() });
        }
        let df = rs_free_energy(&pr, &b, rule)? - rs_free_energy(&pr, &s, rule)?;
        Ok((b, s, df))
    };
    let mut failure: Option<QacError> = None;
    let field = find_root_bracketed(
        |g| match branches(g) {
            Ok((_, _, df)) => df,
            Err(e) => {
                failure.get_or_insert(e);
                T::nan()
            }
        },
        bracket.0,
        bracket.1,
        T::lit(1e-9),
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let field = field?;
    let (broken, symmetric, _) = branches(field)?;
    Ok(RsCrossing {
        field,
        broken,
        symmetric,
    })
}
