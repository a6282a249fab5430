//! Tabular output: CSV with fixed headers, or JSON arrays of row objects.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::{Map, Number, Value};

/// One table cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map(Into::into).unwrap_or(Cell::Empty)
    }
}

impl Cell {
    pub fn to_text(&self) -> String {
        match self {
            Cell::Num(v) => fmt_sig(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Num(v) => match Number::from_f64(*v) {
                // reparse the printed digits so JSON and CSV carry identical values
                Some(_) => fmt_sig(*v)
                    .parse::<f64>()
                    .ok()
                    .and_then(Number::from_f64)
                    .map(Value::Number)
                    .unwrap_or(Value::Null),
                None => Value::String(fmt_sig(*v)),
            },
            Cell::Int(v) => Value::from(*v),
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Empty => Value::Null,
        }
    }
}

pub const SIGNIFICANT_DIGITS: usize = 12;

/// `%.12g`-style formatting: 12 significant digits, trailing zeros removed, `.` as decimal point.
pub fn fmt_sig(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..SIGNIFICANT_DIGITS as i32).contains(&exp) {
        let decimals = (SIGNIFICANT_DIGITS as i32 - 1 - exp).max(0) as usize;
        trim_zeros(format!("{:.*}", decimals, x))
    } else {
        let m = trim_zeros(mantissa.to_string());
        format!("{m}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        let t = s.trim_end_matches('0').trim_end_matches('.');
        if t == "-0" {
            "0".into()
        } else {
            t.to_string()
        }
    } else {
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(&self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

pub fn write_csv<W: Write>(out: W, header: &[&str], rows: &[Vec<Cell>]) -> io::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_writer(out);
    w.write_record(header)?;
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        w.write_record(row.iter().map(Cell::to_text))?;
    }
    w.flush()
}

pub fn rows_to_json(header: &[&str], rows: &[Vec<Cell>]) -> Value {
    Value::Array(
        rows.iter()
            .map(|row| {
                let mut obj = Map::new();
                for (k, c) in header.iter().zip(row) {
                    obj.insert((*k).to_string(), c.to_json());
                }
                Value::Object(obj)
            })
            .collect(),
    )
}

/// Writes a table to `path` in the given format.
pub fn emit_table(path: &Path, format: Format, header: &[&str], rows: &[Vec<Cell>]) -> io::Result<()> {
    let file = BufWriter::new(File::create(path)?);
    match format {
        Format::Csv => write_csv(file, header, rows),
        Format::Json => {
            let mut file = file;
            serde_json::to_writer_pretty(&mut file, &rows_to_json(header, rows))?;
            file.write_all(b"\n")?;
            file.flush()
        }
    }
}

pub mod schema {
    pub const LANDSCAPE: &[&str] = &["m", "F"];
    pub const MINIMA: &[&str] = &["m", "F", "is_global"];
    pub const SOLUTION: &[&str] = &["p", "K", "gamma", "Gamma", "beta", "m", "q", "C", "branch", "residual"];
    pub const PHASE_DIAGRAM: &[&str] = &["T", "gamma", "p", "Gamma_c", "order", "m_left", "m_right"];
    pub const GAP: &[&str] = &["N", "Gamma_min", "Delta_min"];
    pub const GAP_FIT: &[&str] = &["p", "gamma", "C", "residual_rms"];
    pub const FINITE_PATTERN: &[&str] = &["l", "Gamma", "m", "F"];
}
