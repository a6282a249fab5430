use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde_json::{json, Value};

use super::args::*;
use super::emit::{emit_table, fmt_sig, schema, Cell, Format};
use super::presets::{self, Check};
use crate::dicke_gap::{fit_gap_coefficient, min_gap, GapPoint, GapScalingFit, GapScanConfig};
use crate::error::QacError;
use crate::hopfield_rs::{finite_pattern_minimum, solve_rs, sweep_gamma_axis, HopfieldParams, RSolution, SweepTrace};
use crate::meanfield_core::{scan_landscape, solve_saddle, Beta, FerroParams, SaddleSolution};
use crate::numerics::{FixedPointConfig, QuadratureRule};
use crate::phase_scan::{gamma_c_fit, phase_diagram, PhaseScanConfig, TransitionRecord};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Solver(#[from] QacError),
    #[error("cannot write {}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Solver(QacError::InvalidInput(_)) => 2,
            CliError::Solver(_) => 3,
            CliError::Io { .. } => 4,
        }
    }

    pub fn record(&self) -> Value {
        match self {
            CliError::Solver(e) => json!({
                "error": e.kind(),
                "message": e.to_string(),
                "report": e,
            }),
            CliError::Io { path, source } => json!({
                "error": "io",
                "message": self.to_string(),
                "report": { "path": path, "os_error": source.to_string() },
            }),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Shared solver settings and the files written so far.
pub struct Ctx {
    pub fp: FixedPointConfig,
    pub rule: QuadratureRule<f64>,
    pub format: Format,
    pub outputs: Vec<PathBuf>,
}

impl Ctx {
    pub fn new(common: &Common) -> CliResult<Self> {
        let fp = FixedPointConfig {
            damping: common.damping,
            max_iter: common.max_iter,
            tol: common.tol,
        };
        fp.validate()?;
        Ok(Self {
            fp,
            rule: QuadratureRule::gauss_hermite(common.quad_nodes)?,
            format: common.format,
            outputs: Vec::new(),
        })
    }

    pub fn emit(&mut self, path: &Path, header: &[&str], rows: &[Vec<Cell>]) -> CliResult<()> {
        emit_table(path, self.format, header, rows).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        self.outputs.push(path.to_path_buf());
        Ok(())
    }

    /// `<dir>/<stem>.<suffix>.<ext>` next to `out`.
    pub fn sibling(&self, out: &Path, suffix: &str) -> PathBuf {
        let stem = out
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        out.with_file_name(format!("{stem}.{suffix}.{}", self.format.extension()))
    }
}

pub struct Report {
    pub results: Value,
    pub checks: Vec<Check>,
}

impl Report {
    fn plain(results: Value) -> Self {
        Self {
            results,
            checks: Vec::new(),
        }
    }
}

pub fn create_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.to_path_buf(),
        source,
    })
}

fn beta_cell(b: Beta<f64>) -> Cell {
    match b {
        Beta::Finite(v) => Cell::Num(v),
        Beta::Infinite => Cell::from("inf"),
    }
}

fn bool_cell(b: bool) -> Cell {
    Cell::from(if b { "true" } else { "false" })
}

pub fn ferro_solution_row(pr: &FerroParams<f64>, s: &SaddleSolution<f64>) -> Vec<Cell> {
    vec![
        pr.p.into(),
        pr.k.into(),
        pr.gamma.into(),
        pr.field.into(),
        beta_cell(pr.beta),
        s.m.into(),
        (s.m * s.m).into(),
        Cell::Empty,
        s.branch.to_string().into(),
        s.residual.into(),
    ]
}

pub fn hopfield_solution_row(hp: &HopfieldParams<f64>, field: f64, s: &RSolution<f64>) -> Vec<Cell> {
    vec![
        hp.p.into(),
        hp.k.into(),
        hp.gamma.into(),
        field.into(),
        "inf".into(),
        s.m.into(),
        s.q.into(),
        s.c.into(),
        s.branch.to_string().into(),
        s.max_residual().into(),
    ]
}

pub fn sweep_rows(hp: &HopfieldParams<f64>, trace: &SweepTrace<f64>) -> Vec<Vec<Cell>> {
    trace
        .points
        .iter()
        .map(|(g, s)| hopfield_solution_row(hp, *g, s))
        .collect()
}

pub fn record_row(r: &TransitionRecord<f64>) -> Vec<Cell> {
    vec![
        r.t.into(),
        r.gamma.into(),
        r.p.into(),
        r.gamma_c.into(),
        r.order.to_string().into(),
        r.m_left.into(),
        r.m_right.into(),
    ]
}

pub fn gap_row(g: &GapPoint<f64>) -> Vec<Cell> {
    vec![g.n.into(), g.field_min.into(), g.delta_min.into()]
}

pub fn gap_fit_row(f: &GapScalingFit<f64>) -> Vec<Cell> {
    vec![f.p.into(), f.gamma.into(), f.c.into(), f.fit_residual.into()]
}

pub fn landscape_rows(grid: &[(f64, f64)]) -> Vec<Vec<Cell>> {
    grid.iter().map(|&(m, f)| vec![m.into(), f.into()]).collect()
}

pub fn minima_rows(ls: &crate::meanfield_core::LandscapeSample<f64>) -> Vec<Vec<Cell>> {
    ls.minima
        .iter()
        .map(|x| vec![x.m.into(), x.f.into(), bool_cell(x.is_global)])
        .collect()
}

fn require_fields(choice: &FieldChoice) -> CliResult<Vec<f64>> {
    choice
        .values()
        .ok_or_else(|| QacError::InvalidInput("one of --Gamma or --Gamma-grid is required".into()).into())
}

pub fn dispatch(command: &Command, ctx: &mut Ctx, out: &Path) -> CliResult<Report> {
    match command {
        Command::FerroLandscape(a) => ferro_landscape(a, ctx, out),
        Command::FerroSolve(a) => ferro_solve(a, ctx, out),
        Command::FerroPhaseDiagram(a) => ferro_phase_diagram(a, ctx, out),
        Command::FerroGammacFit(a) => ferro_gammac_fit(a, ctx, out),
        Command::GapScan(a) => gap_scan(a, ctx, out),
        Command::GapFit(a) => gap_fit(a, ctx, out),
        Command::HopfieldSolve(a) => hopfield_solve(a, ctx, out),
        Command::HopfieldSweep(a) => hopfield_sweep(a, ctx, out),
        Command::HopfieldFinitePattern(a) => finite_pattern(a, ctx, out),
        Command::Reproduce(a) => {
            create_dir(out)?;
            presets::run(a.preset, ctx, out)
        }
    }
}

fn ferro_landscape(a: &LandscapeArgs, ctx: &mut Ctx, out: &Path) -> CliResult<Report> {
    let m = &a.model;
    let pr = FerroParams::new(m.p, m.k, m.gamma, a.field, m.beta)?;
    let ls = scan_landscape(&pr, a.m_lo, a.m_hi, a.n_grid)?;
    ctx.emit(out, schema::LANDSCAPE, &landscape_rows(&ls.grid))?;
    let minima_path = ctx.sibling(out, "minima");
    ctx.emit(&minima_path, schema::MINIMA, &minima_rows(&ls))?;
    Ok(Report::plain(json!({ "minima": ls.minima })))
}

fn ferro_solve(a: &FerroSolveArgs, ctx: &mut Ctx, out: &Path) -> CliResult<Report> {
    let m = &a.model;
    let fields = require_fields(&a.field)?;
    let base = FerroParams::new(m.p, m.k, m.gamma, fields[0], m.beta)?;
    let fp = ctx.fp;
    let rows = fields
        .par_iter()
        .map(|&g| {
            let pr = base.with_field(g);
            pr.validate()?;
            let s = solve_saddle(&pr, a.m0, &fp)?;
            Ok(ferro_solution_row(&pr, &s))
        })
        .collect::<Result<Vec<_>, QacError>>()?;
    ctx.emit(out, schema::SOLUTION, &rows)?;
    Ok(Report::plain(json!({ "points": rows.len() })))
}

fn ferro_phase_diagram(a: &PhaseDiagramArgs, ctx: &mut Ctx, out: &Path) -> CliResult<Report> {
    let cfg = PhaseScanConfig {
        field_lo: a.field_grid.lo.min(a.field_grid.hi),
        field_hi: a.field_grid.hi.max(a.field_grid.lo),
        n_field: a.field_grid.n,
        n_m: a.n_m,
        ..Default::default()
    };
    let mut ts = a.t_grid.0.clone();
    ts.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
    let jobs: Vec<(f64, f64)> = a
        .gamma
        .0
        .iter()
        .flat_map(|&g| ts.iter().map(move |&t| (g, t)))
        .collect();
    let records = jobs
        .par_iter()
        .map(|&(g, t)| phase_diagram(a.p, a.k, g, &[t], &cfg).map(|d| d.points))
        .collect::<Result<Vec<_>, QacError>>()?
        .into_iter()
        .flatten()
        .collect::<Vec<_>>();
    let rows: Vec<_> = records.iter().map(record_row).collect();
    ctx.emit(out, schema::PHASE_DIAGRAM, &rows)?;
    Ok(Report::plain(json!({ "records": records.len(), "scan": cfg })))
}

fn ferro_gammac_fit(a: &GammacFitArgs, ctx: &mut Ctx, out: &Path) -> CliResult<Report> {
    let (records, fit) = gamma_c_fit(a.p, &a.gamma_grid.0, a.degree)?;
    let rows: Vec<_> = records.iter().map(record_row).collect();
    ctx.emit(out, schema::PHASE_DIAGRAM, &rows)?;
    Ok(Report::plain(json!({ "fit": fit })))
}

fn gap_config(a: &GapArgs) -> GapScanConfig<f64> {
    GapScanConfig {
        field_lo: a.field_grid.lo.min(a.field_grid.hi),
        field_hi: a.field_grid.hi.max(a.field_grid.lo),
        min_points: a.field_grid.n,
        sector: a.sector.sector(),
        ..Default::default()
    }
}

fn per_gamma_path(ctx: &Ctx, out: &Path, prefix: &str, gamma: f64, many: bool) -> PathBuf {
    if many {
        ctx.sibling(out, &format!("{prefix}gamma{}", fmt_sig(gamma)))
    } else {
        out.to_path_buf()
    }
}

fn gap_scan(a: &GapArgs, ctx: &mut Ctx, out: &Path) -> CliResult<Report> {
    let cfg = gap_config(a);
    let many = a.gamma.0.len() > 1;
    let mut boundary = Vec::new();
    for &g in &a.gamma.0 {
        let pts = a
            .n_list
            .0
            .par_iter()
            .map(|&n| min_gap(n, a.p, g, &cfg))
            .collect::<Result<Vec<_>, QacError>>()?;
        boundary.extend(
            pts.iter()
                .filter(|p| p.at_boundary)
                .map(|p| json!({ "gamma": g, "N": p.n })),
        );
        let rows: Vec<_> = pts.iter().map(gap_row).collect();
        let path = per_gamma_path(ctx, out, "", g, many);
        ctx.emit(&path, schema::GAP, &rows)?;
    }
    Ok(Report::plain(json!({ "scan": cfg, "minimum_at_grid_edge": boundary })))
}

fn gap_fit(a: &GapArgs, ctx: &mut Ctx, out: &Path) -> CliResult<Report> {
    let cfg = gap_config(a);
    let fits = a
        .gamma
        .0
        .iter()
        .map(|&g| fit_gap_coefficient(a.p, g, &a.n_list.0, &cfg))
        .collect::<Result<Vec<_>, QacError>>()?;
    for f in &fits {
        let path = ctx.sibling(out, &format!("gaps_gamma{}", fmt_sig(f.gamma)));
        ctx.emit(&path, schema::GAP, &f.per_n.iter().map(gap_row).collect::<Vec<_>>())?;
    }
    ctx.emit(out, schema::GAP_FIT, &fits.iter().map(gap_fit_row).collect::<Vec<_>>())?;
    let summary: Vec<Value> = fits
        .iter()
        .map(|f| json!({ "gamma": f.gamma, "C": f.c, "sector": f.sector, "excluded_N": f.excluded }))
        .collect();
    Ok(Report::plain(json!({ "scan": cfg, "fits": summary })))
}

fn hopfield_params(m: &HopfieldModel, field: f64) -> CliResult<HopfieldParams<f64>> {
    Ok(HopfieldParams::new(m.p, m.k, m.gamma, field, m.a)?)
}

fn hopfield_solve(a: &HopfieldSolveArgs, ctx: &mut Ctx, out: &Path) -> CliResult<Report> {
    let fields = require_fields(&a.field)?;
    let base = hopfield_params(&a.model, fields[0])?;
    let seed = [a.m0, a.q0, a.c0];
    let (fp, rule) = (ctx.fp, &ctx.rule);
    let rows = fields
        .par_iter()
        .map(|&g| {
            let hp = base.with_field(g);
            let s = solve_rs(&hp, &seed, &fp, rule)?;
            Ok(hopfield_solution_row(&hp, g, &s))
        })
        .collect::<Result<Vec<_>, QacError>>()?;
    ctx.emit(out, schema::SOLUTION, &rows)?;
    Ok(Report::plain(json!({ "points": rows.len() })))
}

fn hopfield_sweep(a: &HopfieldSweepArgs, ctx: &mut Ctx, out: &Path) -> CliResult<Report> {
    let hp = hopfield_params(&a.model, 0.0)?;
    let mut grid = a.field_grid.values();
    grid.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
    let start = match a.direction {
        DirectionChoice::Up => 1.0,
        DirectionChoice::Down => {
            grid.reverse();
            0.0
        }
    };
    let seed = [a.m0.unwrap_or(start), a.q0.unwrap_or(start)];
    let trace = sweep_gamma_axis(&hp, &grid, &seed, a.jump_threshold, &ctx.fp, &ctx.rule)?;
    ctx.emit(out, schema::SOLUTION, &sweep_rows(&hp, &trace))?;
    Ok(Report::plain(
        json!({ "direction": trace.direction, "jumps": trace.jumps }),
    ))
}

fn finite_pattern(a: &FinitePatternArgs, ctx: &mut Ctx, out: &Path) -> CliResult<Report> {
    let grid = a.field_grid.values();
    let base = HopfieldParams::new(a.p, a.k, a.gamma, grid[0], 0.0)?;
    let jobs: Vec<(u32, f64)> =
        a.l.0
            .iter()
            .flat_map(|&l| grid.iter().map(move |&g| (l as u32, g)))
            .collect();
    let rows = jobs
        .par_iter()
        .map(|&(l, g)| {
            let (m, f) = finite_pattern_minimum(&base.with_field(g), l, a.n_grid)?;
            Ok(vec![l.into(), g.into(), m.into(), f.into()])
        })
        .collect::<Result<Vec<_>, QacError>>()?;
    ctx.emit(out, schema::FINITE_PATTERN, &rows)?;
    Ok(Report::plain(json!({ "points": rows.len() })))
}
