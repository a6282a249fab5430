//! Command-line front end: argument parsing, dispatch, table output and the metadata sidecar.

pub mod args;
pub mod commands;
pub mod emit;
pub mod presets;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};

pub use args::{Cli, Command};
pub use commands::CliError;

use crate::dicke_gap::{GapScanConfig, GAP_FLOOR_FACTOR};
use crate::hopfield_rs::JUMP_THRESHOLD;
use crate::meanfield_core::{DEGENERACY_TOL, LANDSCAPE_POINTS, MINIMUM_REFINE_TOL, SYMMETRIC_THRESHOLD};
use crate::numerics::DEFAULT_ROOT_TOL;
use crate::phase_scan::{PhaseScanConfig, FIRST_ORDER_TOL, SEED_GRID, STABILITY_STEP, TRUST_WINDOW};

/// Exit status when a preset ran but some of its expectations failed.
pub const EXIT_CHECKS_FAILED: i32 = 1;

pub fn version() -> String {
    option_env!("QAC_GIT_DESCRIBE")
        .map(str::to_string)
        .unwrap_or_else(|| format!("v{}", env!("CARGO_PKG_VERSION")))
}

#[derive(Debug, Serialize)]
struct Settings {
    quad_nodes: usize,
    damping: f64,
    tol: f64,
    max_iter: usize,
    threads: usize,
    root_tol: f64,
    symmetric_threshold: f64,
    landscape_points: usize,
    minimum_refine_tol: f64,
    degeneracy_tol: f64,
    stability_step: f64,
    trust_window: f64,
    seed_grid: usize,
    first_order_tol: f64,
    sweep_jump_threshold: f64,
    gap_floor_factor: f64,
    phase_scan: PhaseScanConfig<f64>,
    gap_scan: GapScanConfig<f64>,
}

impl Settings {
    fn new(common: &args::Common, threads: usize) -> Self {
        Self {
            quad_nodes: common.quad_nodes,
            damping: common.damping,
            tol: common.tol,
            max_iter: common.max_iter,
            threads,
            root_tol: DEFAULT_ROOT_TOL,
            symmetric_threshold: SYMMETRIC_THRESHOLD,
            landscape_points: LANDSCAPE_POINTS,
            minimum_refine_tol: MINIMUM_REFINE_TOL,
            degeneracy_tol: DEGENERACY_TOL,
            stability_step: STABILITY_STEP,
            trust_window: TRUST_WINDOW,
            seed_grid: SEED_GRID,
            first_order_tol: FIRST_ORDER_TOL,
            sweep_jump_threshold: JUMP_THRESHOLD,
            gap_floor_factor: GAP_FLOOR_FACTOR,
            phase_scan: PhaseScanConfig::default(),
            gap_scan: GapScanConfig::default(),
        }
    }
}

fn params_of(command: &Command) -> Value {
    let v = match command {
        Command::FerroLandscape(a) => serde_json::to_value(a),
        Command::FerroSolve(a) => serde_json::to_value(a),
        Command::FerroPhaseDiagram(a) => serde_json::to_value(a),
        Command::FerroGammacFit(a) => serde_json::to_value(a),
        Command::GapScan(a) | Command::GapFit(a) => serde_json::to_value(a),
        Command::HopfieldSolve(a) => serde_json::to_value(a),
        Command::HopfieldSweep(a) => serde_json::to_value(a),
        Command::HopfieldFinitePattern(a) => serde_json::to_value(a),
        Command::Reproduce(a) => serde_json::to_value(a),
    };
    v.unwrap_or(Value::Null)
}

/// Data path (a directory for `reproduce`).
pub fn output_path(cli: &Cli) -> PathBuf {
    if let Some(p) = &cli.common.out {
        return p.clone();
    }
    match &cli.command {
        Command::Reproduce(a) => PathBuf::from(format!("reproduce-{}", a.preset.name())),
        c => PathBuf::from(format!("{}.{}", c.name(), cli.common.format.extension())),
    }
}

/// `<stem>.meta.json` beside a data file; `<dir>/<preset>.meta.json` inside a preset directory.
pub fn sidecar_path(cli: &Cli, out: &Path) -> PathBuf {
    match &cli.command {
        Command::Reproduce(a) => out.join(format!("{}.meta.json", a.preset.name())),
        _ => match out.extension() {
            Some(_) => out.with_extension("meta.json"),
            None => {
                let mut s = out.as_os_str().to_owned();
                s.push(".meta.json");
                PathBuf::from(s)
            }
        },
    }
}

/// Runs one command and returns the process exit status.
pub fn run(cli: &Cli) -> i32 {
    let start = Instant::now();
    let out = output_path(cli);
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cli.common.threads.unwrap_or(0))
        .build()
    {
        Ok(p) => p,
        Err(e) => {
            eprintln!("{}", json!({ "error": "thread_pool", "message": e.to_string() }));
            return 3;
        }
    };
    let mut outputs = Vec::new();
    let result = pool.install(|| {
        let mut ctx = commands::Ctx::new(&cli.common)?;
        let r = commands::dispatch(&cli.command, &mut ctx, &out);
        outputs = ctx.outputs;
        r
    });

    let (status, code, results, checks, error) = match &result {
        Ok(rep) => {
            let failed = rep.checks.iter().filter(|c| !c.pass).count();
            for c in &rep.checks {
                log::info!("{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.observed);
            }
            if failed > 0 {
                (
                    "checks_failed",
                    EXIT_CHECKS_FAILED,
                    rep.results.clone(),
                    json!(rep.checks),
                    Value::Null,
                )
            } else {
                ("ok", 0, rep.results.clone(), json!(rep.checks), Value::Null)
            }
        }
        Err(e) => ("error", e.exit_code(), Value::Null, Value::Null, e.record()),
    };

    let meta = json!({
        "tool": "qac",
        "version": version(),
        "command": cli.command.name(),
        "params": params_of(&cli.command),
        "format": cli.common.format,
        "settings": Settings::new(&cli.common, pool.current_num_threads()),
        "outputs": outputs,
        "wall_time_s": start.elapsed().as_secs_f64(),
        "status": status,
        "results": results,
        "checks": checks,
        "error": error,
    });
    let side = sidecar_path(cli, &out);
    let written = serde_json::to_string_pretty(&meta)
        .map_err(std::io::Error::other)
        .and_then(|s| fs::write(&side, s + "\n"));
    if let Err(source) = written {
        let e = CliError::Io { path: side, source };
        eprintln!("{}", e.record());
        return e.exit_code();
    }

    if let Err(e) = &result {
        eprintln!("{}", e.record());
    } else if let Ok(rep) = &result {
        for c in rep.checks.iter().filter(|c| !c.pass) {
            eprintln!("{}", json!({ "error": "check_failed", "check": c }));
        }
    }
    code
}
