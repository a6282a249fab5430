//! Locating and classifying phase transitions of the encoded ferromagnet.

use std::fmt;

use serde::Serialize;

use crate::error::{QacError, Result};
use crate::meanfield_core::{free_energy_uniform, saddle_map, scan_landscape, Beta, FerroParams, LocalMinimum};
use crate::numerics::{find_root_bracketed, golden_section, polyfit, FitResult};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TransitionOrder {
    First,
    Second,
}

impl fmt::Display for TransitionOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TransitionOrder::First => "first",
            TransitionOrder::Second => "second",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransitionRecord<T> {
    #[serde(rename = "Gamma_c")]
    pub gamma_c: T,
    pub order: TransitionOrder,
    #[serde(rename = "T")]
    pub t: T,
    pub gamma: T,
    pub p: u32,
    /// Smaller-m coexisting minimum.
    pub m_left: T,
    pub m_right: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepAxis {
    Temperature,
    Penalty,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseDiagram<T> {
    pub points: Vec<TransitionRecord<T>>,
    pub axis: SweepAxis,
    pub resolution: usize,
}

/// Step for the numerical slope of the saddle map.
pub const STABILITY_STEP: f64 = 1e-6;

/// Slope of the saddle map at `m = 0`. One-sided at zero temperature.
pub fn stability_slope<T: Real>(params: &FerroParams<T>) -> T {
    let h = T::lit(STABILITY_STEP);
    match params.beta {
        Beta::Infinite => (saddle_map(params, h) - saddle_map(params, T::zero())) / h,
        Beta::Finite(_) => (saddle_map(params, h) - saddle_map(params, -h)) / (h + h),
    }
}

/// Field at which `m = 0` loses linear stability.
///
/// `params.field` is ignored. Fails with `NotFound` when `m = 0` is not a stationary point
/// (zero temperature with a nonzero penalty) or when the slope does not cross one in the bracket.
pub fn second_order_gamma_c<T: Real>(params: &FerroParams<T>, bracket: (T, T)) -> Result<TransitionRecord<T>> {
    params.validate()?;
    let (lo, hi) = bracket;
    if !(lo > T::zero() && hi > lo) {
        return Err(QacError::invalid("stability bracket must satisfy 0 < lo < hi"));
    }
    let at_zero = saddle_map(&params.with_field(lo), T::zero()).abs();
    if at_zero > T::lit(1e-12) {
        return Err(QacError::NotFound(format!(
            "m = 0 is not stationary (p = {}, gamma = {}, T = {}); no transition below Gamma = {}",
            params.p,
            params.gamma,
            params.beta.temperature(),
            hi
        )));
    }
    let s = |g: T| stability_slope(&params.with_field(g)) - T::one();
    let gamma_c = find_root_bracketed(s, lo, hi, T::lit(1e-10)).map_err(|e| match e {
        QacError::NoBracket { .. } => QacError::NotFound(format!(
            "no stability change of m = 0 on [{lo}, {hi}] (p = {}, gamma = {}, T = {})",
            params.p,
            params.gamma,
            params.beta.temperature()
        )),
        other => other,
    })?;
    Ok(TransitionRecord {
        gamma_c,
        order: TransitionOrder::Second,
        t: params.beta.temperature(),
        gamma: params.gamma,
        p: params.p,
        m_left: T::zero(),
        m_right: T::zero(),
    })
}

/// Which two local minima of a landscape the first-order locator follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MinimaSelector {
    /// Smallest-m and largest-m minima.
    Outermost,
    /// Minima `i` and `i + 1` in increasing m.
    Adjacent(usize),
}

impl MinimaSelector {
    fn pick<T: Real>(&self, minima: &[LocalMinimum<T>]) -> Option<(T, T)> {
        match *self {
            MinimaSelector::Outermost if minima.len() >= 2 => Some((minima[0].m, minima[minima.len() - 1].m)),
            MinimaSelector::Adjacent(i) if i + 1 < minima.len() => Some((minima[i].m, minima[i + 1].m)),
            _ => None,
        }
    }
}

/// Half-width of the continuation trust window in m.
pub const TRUST_WINDOW: f64 = 0.05;
/// Grid used to find seeds for the locator.
pub const SEED_GRID: usize = 2001;

/// Local minimum of the uniform free energy near `seed`, restricted to `[lo_lim, hi_lim]`.
///
/// Follows the descent when the refined point lands on the trust-window edge; returns `None`
/// when it runs into an interior limit, meaning the minimum has merged away.
fn follow_minimum<T: Real>(params: &FerroParams<T>, seed: T, lo_lim: T, hi_lim: T) -> Option<T> {
    let w = T::lit(TRUST_WINDOW);
    let edge = T::lit(1e-7);
    let f = |m: T| free_energy_uniform(params, m);
    let mut s = seed.max(lo_lim).min(hi_lim);
    for _ in 0..40 {
        let a = (s - w).max(lo_lim);
        let b = (s + w).min(hi_lim);
        let (x, _) = golden_section(f, a, b, T::lit(1e-10));
        let at_lo = x - a < edge;
        let at_hi = b - x < edge;
        if at_lo {
            if a > T::zero() && a == lo_lim {
                return None;
            }
            if a <= T::zero() {
                return Some(T::zero());
            }
            s = a;
            continue;
        }
        if at_hi {
            if b < T::one() && b == hi_lim {
                return None;
            }
            if b >= T::one() {
                return Some(T::one());
            }
            s = b;
            continue;
        }
        return Some(x);
    }
    None
}

#[derive(Debug, Clone, Copy)]
struct Tracked<T> {
    field: T,
    left: T,
    right: T,
    delta_f: T,
}

fn track_pair<T: Real>(params: &FerroParams<T>, field: T, left: T, right: T) -> Option<Tracked<T>> {
    let pr = params.with_field(field);
    let mid = (left + right) * T::lit(0.5);
    let l = follow_minimum(&pr, left, T::zero(), mid)?;
    let r = follow_minimum(&pr, right, mid, T::one())?;
    if r - l < T::lit(1e-3) {
        return None;
    }
    Some(Tracked {
        field,
        left: l,
        right: r,
        delta_f: free_energy_uniform(&pr, l) - free_energy_uniform(&pr, r),
    })
}

/// Tolerance on the located transition field.
pub const FIRST_ORDER_TOL: f64 = 1e-10;

/// First-order transition between two tracked minima seeded at `reference` field.
///
/// Both minima are continued from `reference` toward both ends of `bracket`; the sign change
/// of `F(left) - F(right)` is then bisected with warm-started tracking.
pub fn locate_crossing<T: Real>(
    params: &FerroParams<T>,
    reference: T,
    seeds: (T, T),
    bracket: (T, T),
) -> Result<TransitionRecord<T>> {
    let (lo, hi) = bracket;
    if !(lo < hi) || reference < lo || reference > hi {
        return Err(QacError::invalid("crossing bracket must contain the reference field"));
    }
    let (s_l, s_r) = if seeds.0 <= seeds.1 { seeds } else { (seeds.1, seeds.0) };
    let start = track_pair(params, reference, s_l, s_r).ok_or(QacError::Spinodal {
        last_gamma: reference.as_f64(),
    })?;
    let width = hi - lo;
    let step = T::lit(0.01).min(width / T::lit(20.0)).max(T::lit(1e-6));
    let mut path = vec![start];
    let mut vanished_at: Option<T> = None;
    for dir in [-T::one(), T::one()] {
        let mut cur = start;
        loop {
            let next_field = cur.field + dir * step;
            let next_field = if dir < T::zero() {
                next_field.max(lo)
            } else {
                next_field.min(hi)
            };
            if next_field == cur.field {
                break;
            }
            match track_pair(params, next_field, cur.left, cur.right) {
                Some(t) => {
                    let crossed = t.delta_f * cur.delta_f <= T::zero();
                    path.push(t);
                    cur = t;
                    if crossed {
                        break;
                    }
                }
                None => {
                    vanished_at = Some(cur.field);
                    break;
                }
            }
        }
    }
    path.sort_by(|a, b| a.field.partial_cmp(&b.field).unwrap_or(std::cmp::Ordering::Equal));
    let pair = path
        .windows(2)
        .find(|w| w[0].delta_f * w[1].delta_f <= T::zero())
        .map(|w| (w[0], w[1]));
    let (mut a, mut b) = match pair {
        Some(p) => p,
        None => {
            return Err(match vanished_at {
                Some(g) => QacError::Spinodal { last_gamma: g.as_f64() },
                None => QacError::NotFound(format!(
                    "free energies of the tracked minima do not cross on [{lo}, {hi}]"
                )),
            })
        }
    };
    let tol = T::lit(FIRST_ORDER_TOL);
    while b.field - a.field > tol && a.delta_f != T::zero() {
        let mid = (a.field + b.field) * T::lit(0.5);
        if mid <= a.field || mid >= b.field {
            break;
        }
        let t = track_pair(params, mid, a.left, a.right)
            .or_else(|| track_pair(params, mid, b.left, b.right))
            .ok_or(QacError::Spinodal {
                last_gamma: a.field.as_f64(),
            })?;
        if t.delta_f * a.delta_f <= T::zero() {
            b = t;
        } else {
            a = t;
        }
    }
    let best = if a.delta_f.abs() <= b.delta_f.abs() { a } else { b };
    Ok(TransitionRecord {
        gamma_c: best.field,
        order: TransitionOrder::First,
        t: params.beta.temperature(),
        gamma: params.gamma,
        p: params.p,
        m_left: best.left,
        m_right: best.right,
    })
}

/// First-order transition inside `bracket`, with minima chosen from the landscape at the
/// bracket midpoint. `params.field` is ignored.
pub fn first_order_gamma_c<T: Real>(
    params: &FerroParams<T>,
    selector: MinimaSelector,
    bracket: (T, T),
) -> Result<TransitionRecord<T>> {
    params.validate()?;
    let reference = (bracket.0 + bracket.1) * T::lit(0.5);
    let ls = scan_landscape(&params.with_field(reference), T::zero(), T::one(), SEED_GRID)?;
    let seeds = selector.pick(&ls.minima).ok_or_else(|| {
        QacError::NotFound(format!(
            "landscape at Gamma = {reference} has {} minima; selector {:?} needs more",
            ls.minima.len(),
            selector
        ))
    })?;
    locate_crossing(params, reference, seeds, bracket)
}

/// Zero-temperature field at which `m` is stationary: `g(m) sqrt(1 - m^2) / m`.
pub fn stationary_field<T: Real>(p: u32, gamma: T, m: T) -> T {
    let g = gamma + T::from_u32(p).unwrap() * m.powi(p as i32 - 1);
    g * (T::one() - m * m).sqrt() / m
}

const STATIONARY_GRID: usize = 4000;

/// Zero-temperature coexistence window `(Gamma_lo, Gamma_hi)` of two minima, from the extrema
/// of the stationary field. `None` when the stationary field is monotone.
pub fn coexistence_window<T: Real>(p: u32, gamma: T) -> Option<(T, T)> {
    let n = STATIONARY_GRID;
    let ms: Vec<T> = (1..n).map(|i| T::from_count(i) / T::from_count(n)).collect();
    let vals: Vec<T> = ms.iter().map(|&m| stationary_field(p, gamma, m)).collect();
    let mut local_max: Option<usize> = None;
    let mut local_min: Option<usize> = None;
    for i in 1..vals.len() - 1 {
        if vals[i] > vals[i - 1] && vals[i] >= vals[i + 1] && local_max.is_none() {
            local_max = Some(i);
        }
        if vals[i] < vals[i - 1] && vals[i] <= vals[i + 1] && local_min.is_none() {
            local_min = Some(i);
        }
    }
    let imax = local_max?;
    let tol = T::lit(1e-12);
    let (_, neg_max) = golden_section(|m| -stationary_field(p, gamma, m), ms[imax - 1], ms[imax + 1], tol);
    let upper = -neg_max;
    let lower = match local_min {
        Some(imin) if imin < imax => {
            golden_section(|m| stationary_field(p, gamma, m), ms[imin - 1], ms[imin + 1], tol).1
        }
        _ => T::zero(),
    };
    if upper > lower {
        Some((lower, upper))
    } else {
        None
    }
}

/// Zero-temperature first-order transition for `p >= 3`, bracketed by the coexistence window.
pub fn first_order_gamma_c_ground<T: Real>(p: u32, gamma: T) -> Result<TransitionRecord<T>> {
    if p < 3 {
        return Err(QacError::invalid("first-order transitions need p >= 3"));
    }
    let (lo, hi) = coexistence_window(p, gamma)
        .ok_or_else(|| QacError::NotFound(format!("no coexistence of minima for p = {p}, gamma = {gamma}")))?;
    let shrink = (hi - lo) * T::lit(1e-4);
    let lo = (lo + shrink).max(T::lit(1e-3));
    let hi = hi - shrink;
    first_order_gamma_c(&FerroParams::ground(p, gamma, lo), MinimaSelector::Outermost, (lo, hi))
}

/// Penalty above which the zero-temperature first-order transition disappears.
pub fn critical_gamma<T: Real>(p: u32) -> Result<T> {
    if p < 3 {
        return Err(QacError::invalid("critical penalty is defined for p >= 3"));
    }
    let exists = |g: T| coexistence_window(p, g).is_some();
    let mut lo = T::zero();
    let mut hi = T::one();
    if !exists(lo) {
        return Err(QacError::NotFound(format!(
            "no first-order transition at gamma = 0 for p = {p}"
        )));
    }
    while exists(hi) {
        lo = hi;
        hi = hi + hi;
        if hi > T::lit(1e6) {
            return Err(QacError::NotFound(
                "first-order transition persists for all gamma".into(),
            ));
        }
    }
    while hi - lo > T::lit(1e-7) {
        let mid = (lo + hi) * T::lit(0.5);
        if exists(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo + hi) * T::lit(0.5))
}

/// Zero-temperature transition fields on a penalty grid, and their least-squares fit.
pub fn gamma_c_fit<T: Real>(
    p: u32,
    gamma_grid: &[T],
    degree: usize,
) -> Result<(Vec<TransitionRecord<T>>, FitResult<T>)> {
    if gamma_grid.len() < degree + 1 {
        return Err(QacError::invalid(format!(
            "degree-{degree} fit needs at least {} penalty values, got {}",
            degree + 1,
            gamma_grid.len()
        )));
    }
    let records = gamma_grid
        .iter()
        .map(|&g| first_order_gamma_c_ground(p, g))
        .collect::<Result<Vec<_>>>()?;
    let ys: Vec<T> = records.iter().map(|r| r.gamma_c).collect();
    let fit = polyfit(gamma_grid, &ys, degree)?;
    Ok((records, fit))
}

/// Adjacent fields on a descending sweep between which the global minimum jumps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlobalJump<T> {
    pub field_above: T,
    pub field_below: T,
    pub m_above: T,
    pub m_below: T,
}

/// Sweeps the field downward over `grid` and reports jumps of the global minimum larger than
/// `threshold`.
pub fn scan_global_jumps<T: Real>(
    params: &FerroParams<T>,
    grid: &[T],
    n_m: usize,
    threshold: T,
) -> Result<Vec<GlobalJump<T>>> {
    let mut prev: Option<(T, T)> = None;
    let mut out = Vec::new();
    for &g in grid {
        let ls = scan_landscape(&params.with_field(g), T::zero(), T::one(), n_m)?;
        let m = ls
            .minima
            .iter()
            .min_by(|a, b| a.f.partial_cmp(&b.f).unwrap_or(std::cmp::Ordering::Equal))
            .map(|x| x.m)
            .unwrap_or(T::zero());
        if let Some((g0, m0)) = prev {
            if (m - m0).abs() > threshold {
                out.push(GlobalJump {
                    field_above: g0,
                    field_below: g,
                    m_above: m0,
                    m_below: m,
                });
            }
        }
        prev = Some((g, m));
    }
    Ok(out)
}

fn nearest_other<T: Real>(minima: &[LocalMinimum<T>], target: T, exclude: T) -> Option<T> {
    minima
        .iter()
        .filter(|x| (x.m - exclude).abs() > T::lit(1e-3))
        .min_by(|a, b| {
            (a.m - target)
                .abs()
                .partial_cmp(&(b.m - target).abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
        .map(|x| x.m)
}

/// Refines a detected jump into a first-order record.
pub fn refine_jump<T: Real>(params: &FerroParams<T>, jump: &GlobalJump<T>) -> Result<TransitionRecord<T>> {
    let bracket = (jump.field_below, jump.field_above);
    for (field, keep, other) in [
        (jump.field_above, jump.m_above, jump.m_below),
        (jump.field_below, jump.m_below, jump.m_above),
    ] {
        let ls = scan_landscape(&params.with_field(field), T::zero(), T::one(), SEED_GRID)?;
        if let Some(partner) = nearest_other(&ls.minima, other, keep) {
            if let Ok(rec) = locate_crossing(params, field, (keep, partner), bracket) {
                return Ok(rec);
            }
        }
    }
    Err(QacError::Spinodal {
        last_gamma: jump.field_above.as_f64(),
    })
}

/// Sweep settings for phase diagrams.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseScanConfig<T> {
    pub field_lo: T,
    pub field_hi: T,
    /// Points of the descending field sweep used to detect first-order jumps.
    pub n_field: usize,
    /// Points of each landscape in that sweep.
    pub n_m: usize,
    pub jump_threshold: T,
}

impl<T: Real> Default for PhaseScanConfig<T> {
    fn default() -> Self {
        Self {
            field_lo: T::lit(0.05),
            field_hi: T::lit(4.0),
            n_field: 400,
            n_m: 1001,
            jump_threshold: T::lit(0.05),
        }
    }
}

/// All transitions at one temperature, sorted by decreasing field.
pub fn transitions_at<T: Real>(params: &FerroParams<T>, cfg: &PhaseScanConfig<T>) -> Result<Vec<TransitionRecord<T>>> {
    params.validate()?;
    if params.p == 2 {
        let upper = if params.beta.is_infinite() {
            cfg.field_hi
        } else {
            cfg.field_hi.max(T::lit(1e3))
        };
        return match second_order_gamma_c(params, (cfg.field_lo, upper)) {
            Ok(r) => Ok(vec![r]),
            Err(QacError::NotFound(msg)) => {
                log::info!("{msg}");
                Ok(Vec::new())
            }
            Err(e) => Err(e),
        };
    }
    if cfg.n_field < 2 {
        return Err(QacError::invalid("field sweep needs at least 2 points"));
    }
    let n = cfg.n_field;
    let grid: Vec<T> = (0..n)
        .map(|i| cfg.field_hi - (cfg.field_hi - cfg.field_lo) * T::from_count(i) / T::from_count(n - 1))
        .collect();
    let jumps = scan_global_jumps(params, &grid, cfg.n_m, cfg.jump_threshold)?;
    let mut out = Vec::with_capacity(jumps.len());
    for j in &jumps {
        out.push(refine_jump(params, j)?);
    }
    out.sort_by(|a, b| b.gamma_c.partial_cmp(&a.gamma_c).unwrap_or(std::cmp::Ordering::Equal));
    Ok(out)
}

/// Transitions over a temperature grid; `T = 0` uses the zero-temperature branch.
pub fn phase_diagram<T: Real>(
    p: u32,
    k: usize,
    gamma: T,
    t_grid: &[T],
    cfg: &PhaseScanConfig<T>,
) -> Result<PhaseDiagram<T>> {
    let mut ts: Vec<T> = t_grid.to_vec();
    if ts.iter().any(|t| !(*t >= T::zero()) || !t.is_finite()) {
        return Err(QacError::invalid("temperatures must be finite and >= 0"));
    }
    ts.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let mut points = Vec::new();
    for &t in &ts {
        let params = FerroParams::new(p, k, gamma, cfg.field_lo, Beta::from_temperature(t))?;
        points.extend(transitions_at(&params, cfg)?);
    }
    Ok(PhaseDiagram {
        points,
        axis: SweepAxis::Temperature,
        resolution: ts.len(),
    })
}
