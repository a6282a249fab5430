use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Serialize, Serializer};

use super::emit::Format;
use super::presets::Preset;
use crate::dicke_gap::Sector;
use crate::meanfield_core::Beta;

/// Mean-field free energies, transitions, gap scaling and Hopfield solutions for
/// penalty-encoded quantum annealing.
#[derive(Debug, Parser)]
#[command(name = "qac", version, propagate_version = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Common {
    /// Output data file (a directory for `reproduce`). Defaults to `<command>.<format>`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Worker threads for sweeps (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long = "quad-nodes", global = true, default_value_t = 120)]
    pub quad_nodes: usize,
    #[arg(long, global = true, default_value_t = 0.5)]
    pub damping: f64,
    /// Fixed-point tolerance (sup-norm of the damped update).
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long = "max-iter", global = true, default_value_t = 10_000)]
    pub max_iter: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Free energy of the uniform configuration on an m grid, with located minima.
    FerroLandscape(LandscapeArgs),
    /// Self-consistent magnetization at one field or over a field grid.
    FerroSolve(FerroSolveArgs),
    /// Transitions over a temperature grid.
    FerroPhaseDiagram(PhaseDiagramArgs),
    /// Zero-temperature transition field versus penalty, with a polynomial fit.
    FerroGammacFit(GammacFitArgs),
    /// Minimum gap in the symmetric subspace for each N.
    GapScan(GapArgs),
    /// Exponential fit of the minimum gap against N.
    GapFit(GapArgs),
    /// Replica-symmetric solution at one field or over a field grid.
    HopfieldSolve(HopfieldSolveArgs),
    /// Continuation sweep along the field with jump detection.
    HopfieldSweep(HopfieldSweepArgs),
    /// Minimum free energy with l condensed patterns.
    HopfieldFinitePattern(FinitePatternArgs),
    /// Run a named reproduction preset and check its expectations.
    Reproduce(ReproduceArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::FerroLandscape(_) => "ferro-landscape",
            Command::FerroSolve(_) => "ferro-solve",
            Command::FerroPhaseDiagram(_) => "ferro-phase-diagram",
            Command::FerroGammacFit(_) => "ferro-gammac-fit",
            Command::GapScan(_) => "gap-scan",
            Command::GapFit(_) => "gap-fit",
            Command::HopfieldSolve(_) => "hopfield-solve",
            Command::HopfieldSweep(_) => "hopfield-sweep",
            Command::HopfieldFinitePattern(_) => "hopfield-finite-pattern",
            Command::Reproduce(_) => "reproduce",
        }
    }
}

/// `lo:hi:n`, inclusive, evenly spaced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        crate::hopfield_rs::linspace(self.lo, self.hi, self.n)
    }
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("expected lo:hi:n, got '{s}'"));
        }
        let lo: f64 = parts[0]
            .trim()
            .parse()
            .map_err(|_| format!("bad lower bound in '{s}'"))?;
        let hi: f64 = parts[1]
            .trim()
            .parse()
            .map_err(|_| format!("bad upper bound in '{s}'"))?;
        let n: usize = parts[2]
            .trim()
            .parse()
            .map_err(|_| format!("bad point count in '{s}'"))?;
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(format!("grid bounds must be finite in '{s}'"));
        }
        if n == 0 {
            return Err("grid needs at least one point".into());
        }
        if n > 1 && lo == hi {
            return Err(format!("grid '{s}' has equal bounds"));
        }
        Ok(Grid { lo, hi, n })
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.lo, self.hi, self.n)
    }
}

impl Serialize for Grid {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Comma-separated reals, or a `lo:hi:n` grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct FloatList(pub Vec<f64>);

impl FromStr for FloatList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s.contains(':') {
            return Ok(FloatList(s.parse::<Grid>()?.values()));
        }
        let v = s
            .split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|_| format!("bad number '{t}'")))
            .collect::<Result<Vec<_>, _>>()?;
        if v.iter().any(|x| !x.is_finite()) {
            return Err("values must be finite".into());
        }
        Ok(FloatList(v))
    }
}

/// Comma-separated sizes, or `lo..hi` with optional `:step`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct SizeList(pub Vec<usize>);

impl FromStr for SizeList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if let Some((lo, rest)) = s.split_once("..") {
            let (hi, step) = rest.split_once(':').unwrap_or((rest, "1"));
            let lo: usize = lo.trim().parse().map_err(|_| format!("bad size range '{s}'"))?;
            let hi: usize = hi.trim().parse().map_err(|_| format!("bad size range '{s}'"))?;
            let step: usize = step.trim().parse().map_err(|_| format!("bad step in '{s}'"))?;
            if step == 0 || hi < lo {
                return Err(format!("empty size range '{s}'"));
            }
            return Ok(SizeList((lo..=hi).step_by(step).collect()));
        }
        s.split(',')
            .map(|t| t.trim().parse::<usize>().map_err(|_| format!("bad size '{t}'")))
            .collect::<Result<Vec<_>, _>>()
            .map(SizeList)
    }
}

fn parse_beta(s: &str) -> Result<Beta<f64>, String> {
    s.parse::<Beta<f64>>().map_err(|e| e.to_string())
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FerroModel {
    #[arg(long)]
    pub p: u32,
    #[arg(long = "K", default_value_t = 3)]
    #[serde(rename = "K")]
    pub k: usize,
    #[arg(long, default_value_t = 0.0)]
    pub gamma: f64,
    /// Inverse temperature: a positive number or `inf`.
    #[arg(long, default_value = "inf", value_parser = parse_beta)]
    pub beta: Beta<f64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FieldChoice {
    #[arg(long = "Gamma", conflicts_with = "field_grid")]
    #[serde(rename = "Gamma")]
    pub field: Option<f64>,
    #[arg(long = "Gamma-grid")]
    #[serde(rename = "Gamma_grid")]
    pub field_grid: Option<Grid>,
}

impl FieldChoice {
    pub fn values(&self) -> Option<Vec<f64>> {
        match (self.field, self.field_grid) {
            (Some(g), _) => Some(vec![g]),
            (None, Some(grid)) => Some(grid.values()),
            (None, None) => None,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct LandscapeArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: FerroModel,
    #[arg(long = "Gamma")]
    #[serde(rename = "Gamma")]
    pub field: f64,
    #[arg(long = "m-lo", default_value_t = 0.0)]
    pub m_lo: f64,
    #[arg(long = "m-hi", default_value_t = 1.0)]
    pub m_hi: f64,
    #[arg(long = "n-grid", default_value_t = 2001)]
    pub n_grid: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FerroSolveArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: FerroModel,
    #[command(flatten)]
    #[serde(flatten)]
    pub field: FieldChoice,
    #[arg(long, default_value_t = 0.9)]
    pub m0: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PhaseDiagramArgs {
    #[arg(long)]
    pub p: u32,
    #[arg(long = "K", default_value_t = 3)]
    #[serde(rename = "K")]
    pub k: usize,
    /// One or more penalty values.
    #[arg(long, default_value = "0")]
    pub gamma: FloatList,
    /// Temperatures; 0 selects the zero-temperature branch.
    #[arg(long = "T-grid", default_value = "0")]
    #[serde(rename = "T_grid")]
    pub t_grid: FloatList,
    /// Field range and resolution of the descending sweep.
    #[arg(long = "Gamma-grid", default_value = "0.05:4:400")]
    #[serde(rename = "Gamma_grid")]
    pub field_grid: Grid,
    /// Landscape points per field in the sweep.
    #[arg(long = "n-m", default_value_t = 1001)]
    pub n_m: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GammacFitArgs {
    #[arg(long, default_value_t = 4)]
    pub p: u32,
    #[arg(long = "gamma-grid", default_value = "0:0.7:8")]
    pub gamma_grid: FloatList,
    #[arg(long, default_value_t = 2)]
    pub degree: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SectorChoice {
    Auto,
    Full,
    Even,
}

impl SectorChoice {
    pub fn sector(&self) -> Option<Sector> {
        match self {
            SectorChoice::Auto => None,
            SectorChoice::Full => Some(Sector::Full),
            SectorChoice::Even => Some(Sector::Even),
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GapArgs {
    #[arg(long, default_value_t = 4)]
    pub p: u32,
    /// One or more penalty values.
    #[arg(long, default_value = "0")]
    pub gamma: FloatList,
    #[arg(long = "N-list", default_value = "100..200:10")]
    #[serde(rename = "N_list")]
    pub n_list: SizeList,
    /// Coarse field grid `lo:hi:n`; each N uses at least `max(n, 5 N)` points.
    #[arg(long = "Gamma-grid", default_value = "0.5:3:200")]
    #[serde(rename = "Gamma_grid")]
    pub field_grid: Grid,
    #[arg(long, value_enum, default_value_t = SectorChoice::Auto)]
    pub sector: SectorChoice,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct HopfieldModel {
    #[arg(long)]
    pub p: u32,
    #[arg(long = "K", default_value_t = 3)]
    #[serde(rename = "K")]
    pub k: usize,
    #[arg(long, default_value_t = 0.0)]
    pub gamma: f64,
    /// Pattern load.
    #[arg(long, default_value_t = 0.01)]
    pub a: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct HopfieldSolveArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: HopfieldModel,
    #[command(flatten)]
    #[serde(flatten)]
    pub field: FieldChoice,
    #[arg(long, default_value_t = 0.9)]
    pub m0: f64,
    #[arg(long, default_value_t = 0.8)]
    pub q0: f64,
    #[arg(long = "C0", default_value_t = 0.0)]
    #[serde(rename = "C0")]
    pub c0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DirectionChoice {
    Up,
    Down,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct HopfieldSweepArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: HopfieldModel,
    #[arg(long = "Gamma-grid", default_value = "0:3:400")]
    #[serde(rename = "Gamma_grid")]
    pub field_grid: Grid,
    #[arg(long, value_enum, default_value_t = DirectionChoice::Up)]
    pub direction: DirectionChoice,
    /// Seed overlap; defaults to 1 for upward and 0 for downward sweeps.
    #[arg(long)]
    pub m0: Option<f64>,
    #[arg(long)]
    pub q0: Option<f64>,
    #[arg(long = "jump-threshold", default_value_t = 0.05)]
    pub jump_threshold: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FinitePatternArgs {
    #[arg(long)]
    pub p: u32,
    #[arg(long = "K", default_value_t = 3)]
    #[serde(rename = "K")]
    pub k: usize,
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    #[arg(long = "Gamma-grid", default_value = "0:3:50")]
    #[serde(rename = "Gamma_grid")]
    pub field_grid: Grid,
    /// Numbers of condensed patterns.
    #[arg(long, default_value = "1,2,3")]
    pub l: SizeList,
    #[arg(long = "n-grid", default_value_t = 2001)]
    pub n_grid: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ReproduceArgs {
    #[arg(value_enum)]
    pub preset: Preset,
}
