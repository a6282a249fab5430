//! Named reproductions. Each preset writes its data files into one directory and evaluates a
//! fixed list of expectations.

use std::path::Path;

use clap::ValueEnum;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use super::commands::*;
use super::emit::{fmt_sig, schema, Cell};
use crate::dicke_gap::{fit_gap_coefficient, GapScalingFit, GapScanConfig};
use crate::error::QacError;
use crate::hopfield_rs::{
    finite_pattern_minimum, linspace, sweep_gamma_axis, HopfieldParams, SweepTrace, JUMP_THRESHOLD,
};
use crate::meanfield_core::{scan_landscape, Beta, FerroParams, LANDSCAPE_POINTS};
use crate::numerics::{polyfit, FixedPointConfig};
use crate::phase_scan::{
    critical_gamma, first_order_gamma_c_ground, gamma_c_fit, phase_diagram, transitions_at, PhaseScanConfig,
    TransitionOrder,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[value(rename_all = "kebab-case")]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    Fig1,
    Fig2,
    Fig3a,
    Fig3b,
    Fig3c,
    Fig4a,
    Fig4b,
    SmGammac,
    SmGammacp,
    SmGap,
    SmHopfieldL,
}

impl Preset {
    pub fn name(&self) -> String {
        self.to_possible_value()
            .map(|v| v.get_name().to_string())
            .unwrap_or_default()
    }

    /// Acceptance criterion whose assertions this preset carries.
    pub fn criterion(&self) -> u8 {
        match self {
            Preset::Fig1 => 1,
            Preset::Fig3a | Preset::Fig3b => 2,
            Preset::SmGammac => 3,
            Preset::SmGammacp => 4,
            Preset::Fig2 => 5,
            Preset::Fig3c | Preset::SmGap => 6,
            Preset::Fig4a => 8,
            Preset::Fig4b => 9,
            Preset::SmHopfieldL => 10,
        }
    }
}

/// Where an expected value comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    /// Published figure or caption value.
    Reference,
    /// Follows from the model without a published number.
    Derived,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub criterion: u8,
    pub name: String,
    pub observed: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    pub source: Source,
    pub pass: bool,
}

impl Check {
    fn close(criterion: u8, name: &str, observed: f64, expected: f64, tolerance: f64) -> Self {
        Self {
            criterion,
            name: name.into(),
            observed: json!(observed),
            expected: Some(expected),
            tolerance: Some(tolerance),
            source: Source::Reference,
            pass: (observed - expected).abs() <= tolerance,
        }
    }

    fn holds(criterion: u8, name: &str, observed: Value, pass: bool, source: Source) -> Self {
        Self {
            criterion,
            name: name.into(),
            observed,
            expected: None,
            tolerance: None,
            source,
            pass,
        }
    }
}

pub const K: usize = 3;
pub const LOAD: f64 = 0.01;

pub fn run(preset: Preset, ctx: &mut Ctx, dir: &Path) -> CliResult<Report> {
    let c = preset.criterion();
    match preset {
        Preset::Fig1 => fig1(c, ctx, dir),
        Preset::Fig2 => fig2(c, ctx, dir),
        Preset::Fig3a => landscape_at_transition(c, ctx, dir, 0.0, 1.185, (0.0, 0.943)),
        Preset::Fig3b => landscape_at_transition(c, ctx, dir, 0.5, 1.847, (0.328, 0.844)),
        Preset::Fig3c => fig3c(c, ctx, dir),
        Preset::Fig4a => fig4a(c, ctx, dir),
        Preset::Fig4b => fig4b(c, ctx, dir),
        Preset::SmGammac => sm_gammac(c, ctx, dir),
        Preset::SmGammacp => sm_gammacp(c, ctx, dir),
        Preset::SmGap => sm_gap(c, ctx, dir),
        Preset::SmHopfieldL => sm_hopfield_l(c, ctx, dir),
    }
}

fn file(ctx: &Ctx, dir: &Path, stem: &str) -> std::path::PathBuf {
    dir.join(format!("{stem}.{}", ctx.format.extension()))
}

fn fig1(c: u8, ctx: &mut Ctx, dir: &Path) -> CliResult<Report> {
    let cfg = PhaseScanConfig::default();
    let ts = linspace(0.0, 1.0, 21);
    let gammas = [0.0, 0.1, 0.2, 0.5];
    let diagrams = gammas
        .par_iter()
        .map(|&g| phase_diagram(2, K, g, &ts, &cfg))
        .collect::<Result<Vec<_>, QacError>>()?;
    let rows: Vec<_> = diagrams.iter().flat_map(|d| d.points.iter().map(record_row)).collect();
    ctx.emit(&file(ctx, dir, "phase_diagram"), schema::PHASE_DIAGRAM, &rows)?;
    let ground = diagrams[0].points.iter().find(|r| r.t == 0.0);
    let checks = vec![
        Check::close(
            c,
            "Gamma_c at gamma=0, T=0",
            ground.map_or(f64::NAN, |r| r.gamma_c),
            2.0,
            1e-3,
        ),
        Check::holds(
            c,
            "transition at gamma=0, T=0 is second order",
            json!(ground.map(|r| r.order.to_string())),
            ground.is_some_and(|r| r.order == TransitionOrder::Second),
            Source::Reference,
        ),
    ];
    Ok(Report {
        results: json!({ "K": K, "gamma": gammas, "T": ts }),
        checks,
    })
}

fn fig2(c: u8, ctx: &mut Ctx, dir: &Path) -> CliResult<Report> {
    let cfg = PhaseScanConfig::default();
    let ts = [0.0, 0.01, 0.02, 0.025, 0.03, 0.04];
    let gammas = [0.0, 0.25, 0.5, 1.0];
    let jobs: Vec<(f64, f64)> = gammas.iter().flat_map(|&g| ts.iter().map(move |&t| (g, t))).collect();
    let found = jobs
        .par_iter()
        .map(|&(g, t)| {
            let pr = FerroParams::new(4, K, g, cfg.field_lo, Beta::from_temperature(t))?;
            transitions_at(&pr, &cfg)
        })
        .collect::<Result<Vec<_>, QacError>>()?;
    let rows: Vec<_> = found.iter().flatten().map(record_row).collect();
    ctx.emit(&file(ctx, dir, "phase_diagram"), schema::PHASE_DIAGRAM, &rows)?;

    // finer sweep around the two-transition window
    let fine = PhaseScanConfig {
        field_lo: 1.6,
        field_hi: 2.2,
        n_field: 241,
        ..cfg
    };
    let target = FerroParams::new(4, K, 0.5, fine.field_lo, Beta::from_temperature(0.025))?;
    let recs = transitions_at(&target, &fine)?;
    let fields: Vec<f64> = recs.iter().map(|r| r.gamma_c).collect();
    let nearest = |x: f64| {
        fields
            .iter()
            .copied()
            .min_by(|a, b| (a - x).abs().total_cmp(&(b - x).abs()))
            .unwrap_or(f64::NAN)
    };
    let checks = vec![
        Check::close(
            c,
            "first-order records at gamma=0.5, T=0.025",
            recs.len() as f64,
            2.0,
            0.0,
        ),
        Check::close(
            c,
            "upper transition at gamma=0.5, T=0.025",
            nearest(1.8698),
            1.8698,
            2e-3,
        ),
        Check::close(c, "lower transition at gamma=0.5, T=0.025", nearest(1.849), 1.849, 2e-3),
    ];
    Ok(Report {
        results: json!({ "K": K, "scan": cfg, "target_scan": fine, "records_at_target": recs }),
        checks,
    })
}

fn landscape_at_transition(
    c: u8,
    ctx: &mut Ctx,
    dir: &Path,
    gamma: f64,
    expected: f64,
    minima: (f64, f64),
) -> CliResult<Report> {
    let rec = first_order_gamma_c_ground::<f64>(4, gamma)?;
    let pr = FerroParams::new(4, K, gamma, rec.gamma_c, Beta::Infinite)?;
    let ls = scan_landscape(&pr, 0.0, 1.0, LANDSCAPE_POINTS)?;
    ctx.emit(
        &file(ctx, dir, "landscape"),
        schema::LANDSCAPE,
        &landscape_rows(&ls.grid),
    )?;
    ctx.emit(&file(ctx, dir, "minima"), schema::MINIMA, &minima_rows(&ls))?;
    let label = format!("gamma={}", fmt_sig(gamma));
    let checks = vec![
        Check::close(c, &format!("Gamma_c at {label}"), rec.gamma_c, expected, 5e-3),
        Check::close(c, &format!("left minimum at {label}"), rec.m_left, minima.0, 5e-3),
        Check::close(c, &format!("right minimum at {label}"), rec.m_right, minima.1, 5e-3),
    ];
    Ok(Report {
        results: json!({ "record": rec, "minima": ls.minima }),
        checks,
    })
}

fn gap_fits(ctx: &mut Ctx, dir: &Path, gammas: &[f64]) -> CliResult<Vec<GapScalingFit<f64>>> {
    let ns: Vec<usize> = (100..=200).step_by(10).collect();
    let cfg = GapScanConfig::default();
    let fits = gammas
        .iter()
        .map(|&g| fit_gap_coefficient(4, g, &ns, &cfg))
        .collect::<Result<Vec<_>, QacError>>()?;
    for f in &fits {
        let rows: Vec<_> = f.per_n.iter().map(gap_row).collect();
        ctx.emit(
            &file(ctx, dir, &format!("gaps_gamma{}", fmt_sig(f.gamma))),
            schema::GAP,
            &rows,
        )?;
    }
    let rows: Vec<_> = fits.iter().map(gap_fit_row).collect();
    ctx.emit(&file(ctx, dir, "gap_fit"), schema::GAP_FIT, &rows)?;
    Ok(fits)
}

fn fig3c(c: u8, ctx: &mut Ctx, dir: &Path) -> CliResult<Report> {
    let gammas: Vec<f64> = (0..=10).map(|i| i as f64 * 0.1).collect();
    let fits = gap_fits(ctx, dir, &gammas)?;
    let cs: Vec<f64> = fits.iter().map(|f| f.c).collect();
    let checks = vec![Check::holds(
        c,
        "C(gamma) increasing on gamma=0..1",
        json!(cs),
        cs.windows(2).all(|w| w[1] > w[0]),
        Source::Reference,
    )];
    Ok(Report {
        results: json!({ "N": "100..200:10", "C": cs }),
        checks,
    })
}

fn sm_gap(c: u8, ctx: &mut Ctx, dir: &Path) -> CliResult<Report> {
    let fits = gap_fits(ctx, dir, &[0.0, 0.3])?;
    let checks = vec![
        Check::close(c, "C(gamma=0)", fits[0].c, 0.868, 5e-3),
        Check::close(c, "C(gamma=0.3)", fits[1].c, 0.949, 5e-3),
    ];
    Ok(Report {
        results: json!({ "N": "100..200:10", "C": [fits[0].c, fits[1].c] }),
        checks,
    })
}

fn sweep(
    ctx: &mut Ctx,
    dir: &Path,
    hp: &HopfieldParams<f64>,
    grid: &[f64],
    seed: f64,
    fp: &FixedPointConfig,
) -> CliResult<SweepTrace<f64>> {
    let trace = sweep_gamma_axis(hp, grid, &[seed, seed], JUMP_THRESHOLD, fp, &ctx.rule)?;
    let stem = format!("sweep_p{}_gamma{}_{}", hp.p, fmt_sig(hp.gamma), trace.direction);
    ctx.emit(&file(ctx, dir, &stem), schema::SOLUTION, &sweep_rows(hp, &trace))?;
    Ok(trace)
}

/// Near the continuous transition the plain iteration slows down; fig4a raises the cap.
const FIG4A_MAX_ITER: usize = 200_000;
/// Where `C` approaches 1 the map is stiff and damping 0.5 can lock into a 2-cycle.
const FIG4A_DAMPING: f64 = 0.3;

fn fig4a(c: u8, ctx: &mut Ctx, dir: &Path) -> CliResult<Report> {
    let fp = FixedPointConfig {
        max_iter: ctx.fp.max_iter.max(FIG4A_MAX_ITER),
        damping: ctx.fp.damping.min(FIG4A_DAMPING),
        ..ctx.fp
    };
    let grid = linspace(0.0, 10.0, 400);
    let h0 = HopfieldParams::new(2, K, 0.0, 0.0, LOAD)?;
    let h5 = HopfieldParams::new(2, K, 0.5, 0.0, LOAD)?;
    let t0 = sweep(ctx, dir, &h0, &grid, 1.0, &fp)?;
    let t5 = sweep(ctx, dir, &h5, &grid, 1.0, &fp)?;
    let q_at = |lo: f64, hi: f64| -> Vec<f64> {
        t0.points
            .iter()
            .filter(|(g, _)| *g >= lo && *g <= hi)
            .map(|(_, s)| s.q)
            .collect()
    };
    let above = q_at(2.3, f64::INFINITY);
    let below = q_at(0.0, 2.1);
    let qmax_above = above.iter().copied().fold(0.0, f64::max);
    let qmin_below = below.iter().copied().fold(f64::INFINITY, f64::min);
    let qmin5 = t5.points.iter().map(|(_, s)| s.q).fold(f64::INFINITY, f64::min);
    let checks = vec![
        Check::holds(
            c,
            "gamma=0: q <= 1e-6 for Gamma >= 2.3",
            json!(qmax_above),
            qmax_above <= 1e-6,
            Source::Reference,
        ),
        Check::holds(
            c,
            "gamma=0: q > 1e-6 for Gamma <= 2.1",
            json!(qmin_below),
            qmin_below > 1e-6,
            Source::Reference,
        ),
        Check::holds(
            c,
            "gamma=0.5: q > 1e-4 on [0, 10]",
            json!(qmin5),
            qmin5 > 1e-4,
            Source::Reference,
        ),
    ];
    Ok(Report {
        results: json!({ "K": K, "a": LOAD, "max_iter": fp.max_iter, "damping": fp.damping }),
        checks,
    })
}

fn fig4b(c: u8, ctx: &mut Ctx, dir: &Path) -> CliResult<Report> {
    let up = linspace(0.0, 3.0, 400);
    let down: Vec<f64> = up.iter().rev().copied().collect();
    let fp = ctx.fp;
    let mut traces = Vec::new();
    for gamma in [0.0, 0.5, 1.0, 2.0] {
        let hp = HopfieldParams::new(4, K, gamma, 0.0, LOAD)?;
        let a = sweep(ctx, dir, &hp, &up, 1.0, &fp)?;
        let b = sweep(ctx, dir, &hp, &down, 0.0, &fp)?;
        traces.push((gamma, a, b));
    }
    let (_, up0, _) = &traces[0];
    let j0 = up0.jumps.first();
    let mut checks = vec![
        Check::close(
            c,
            "gamma=0 jump location",
            j0.map_or(f64::NAN, |j| j.field_after),
            1.6,
            0.1,
        ),
        Check::close(c, "gamma=0 pre-jump m", j0.map_or(f64::NAN, |j| j.m_before), 0.86, 0.02),
        Check::close(c, "gamma=0 post-jump m", j0.map_or(f64::NAN, |j| j.m_after), 0.0, 1e-6),
    ];
    let (_, up5, down5) = &traces[1];
    let j5: Vec<_> = up5.jumps.iter().chain(&down5.jumps).collect();
    checks.push(Check::holds(
        c,
        "gamma=0.5 jump with post-jump m > 0.05",
        json!(j5.iter().map(|j| j.m_after).collect::<Vec<_>>()),
        !j5.is_empty() && j5.iter().all(|j| j.m_after > 0.05),
        Source::Reference,
    ));
    for (gamma, a, b) in &traces[2..] {
        let n = a.jumps.len() + b.jumps.len();
        checks.push(Check::holds(
            c,
            &format!("no jump at gamma={}", fmt_sig(*gamma)),
            json!(n),
            n == 0,
            Source::Reference,
        ));
    }
    let jumps: Vec<Value> = traces
        .iter()
        .map(|(g, a, b)| json!({ "gamma": g, "up": a.jumps, "down": b.jumps }))
        .collect();
    Ok(Report {
        results: json!({ "K": K, "a": LOAD, "jumps": jumps }),
        checks,
    })
}

fn sm_gammac(c: u8, ctx: &mut Ctx, dir: &Path) -> CliResult<Report> {
    let grid: Vec<f64> = (0..8).map(|i| i as f64 * 0.1).collect();
    let (recs, quad) = gamma_c_fit(4, &grid, 2)?;
    let rows: Vec<_> = recs.iter().map(record_row).collect();
    ctx.emit(&file(ctx, dir, "gamma_c"), schema::PHASE_DIAGRAM, &rows)?;
    let ys: Vec<f64> = recs.iter().map(|r| r.gamma_c).collect();
    let lin = polyfit(&grid, &ys, 1)?;
    let q = &quad.coefficients;
    let l = &lin.coefficients;
    let checks = vec![
        Check::close(c, "quadratic fit constant", q[0], 1.186, 0.02),
        Check::close(c, "quadratic fit linear coefficient", q[1], 1.379, 0.05),
        Check::close(c, "quadratic fit quadratic coefficient", q[2], -0.115, 0.05),
        Check::close(c, "linear refit slope", l[1], 1.4, 0.1),
        Check::close(c, "linear refit intercept", l[0], 1.2, 0.1),
        Check::holds(
            c,
            "Gamma_c(gamma) increasing",
            json!(ys),
            ys.windows(2).all(|w| w[1] > w[0]),
            Source::Derived,
        ),
    ];
    Ok(Report {
        results: json!({ "quadratic": quad, "linear": lin }),
        checks,
    })
}

fn sm_gammacp(c: u8, ctx: &mut Ctx, dir: &Path) -> CliResult<Report> {
    let ps: Vec<u32> = (3..=8).collect();
    let gcs = ps
        .par_iter()
        .map(|&p| critical_gamma::<f64>(p))
        .collect::<Result<Vec<_>, QacError>>()?;
    let rows: Vec<Vec<Cell>> = ps.iter().zip(&gcs).map(|(&p, &g)| vec![p.into(), g.into()]).collect();
    ctx.emit(&file(ctx, dir, "gamma_c_vs_p"), &["p", "gamma_c"], &rows)?;
    let xs: Vec<f64> = ps.iter().map(|&p| p as f64).collect();
    let fit = polyfit(&xs, &gcs, 1)?;
    let g4 = gcs[1];
    let below = first_order_gamma_c_ground::<f64>(4, g4 - 0.01).is_ok();
    let above = first_order_gamma_c_ground::<f64>(4, g4 + 0.01).is_err();
    let checks = vec![
        Check::close(c, "gamma_c(p=4)", g4, 0.8, 0.05),
        Check::close(c, "fit slope over p=3..8", fit.coefficients[1], 0.46, 0.03),
        Check::close(c, "fit intercept over p=3..8", fit.coefficients[0], -0.99, 0.1),
        Check::holds(
            c,
            "transition just below gamma_c(4)",
            json!(below),
            below,
            Source::Derived,
        ),
        Check::holds(
            c,
            "no transition just above gamma_c(4)",
            json!(above),
            above,
            Source::Derived,
        ),
    ];
    Ok(Report {
        results: json!({ "gamma_c": gcs, "fit": fit }),
        checks,
    })
}

fn sm_hopfield_l(c: u8, ctx: &mut Ctx, dir: &Path) -> CliResult<Report> {
    let grid = linspace(0.0, 3.0, 50);
    let base = HopfieldParams::new(2, K, 1.0, 0.0, 0.0)?;
    let per_field = grid
        .par_iter()
        .map(|&g| {
            (1..=3u32)
                .map(|l| finite_pattern_minimum(&base.with_field(g), l, LANDSCAPE_POINTS))
                .collect::<Result<Vec<_>, QacError>>()
        })
        .collect::<Result<Vec<_>, QacError>>()?;
    let mut rows = Vec::new();
    for l in 0..3 {
        for (g, mins) in grid.iter().zip(&per_field) {
            rows.push(vec![
                (l as u32 + 1).into(),
                (*g).into(),
                mins[l].0.into(),
                mins[l].1.into(),
            ]);
        }
    }
    ctx.emit(&file(ctx, dir, "finite_pattern"), schema::FINITE_PATTERN, &rows)?;
    let violations: Vec<f64> = grid
        .iter()
        .zip(&per_field)
        .filter(|(_, m)| !(m[0].1 < m[1].1 && m[1].1 < m[2].1))
        .map(|(g, _)| *g)
        .collect();
    let checks = vec![Check::holds(
        c,
        "F(l=1) < F(l=2) < F(l=3) at every Gamma",
        json!({ "violating_Gamma": violations }),
        violations.is_empty(),
        Source::Reference,
    )];
    Ok(Report {
        results: json!({ "K": K }),
        checks,
    })
}
