//! Deterministic CSV/JSON emission of experiment rows.
//!
//! Floats carry 12 significant digits; absent values are empty CSV fields or
//! JSON `null`. Column order is fixed per row type.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde_json::{Map, Number, Value};

use crate::error::{Error, Result};

pub const SIGNIFICANT_DIGITS: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ReportFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            _ => Err(Error::Parse { what: "format", input: s.to_string() }),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(i128),
    Float(f64),
    Text(String),
    Absent,
}

impl Cell {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Int(v) => Some(*v as f64),
            Cell::Float(v) => Some(*v),
            _ => None,
        }
    }

    /// The value as it will read back after emission.
    pub fn rounded(&self) -> Cell {
        match self {
            Cell::Float(v) => Cell::Float(round_sig(*v)),
            other => other.clone(),
        }
    }

    fn csv_text(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format_float(*v),
            Cell::Text(s) => s.clone(),
            Cell::Absent => String::new(),
        }
    }

    fn json_value(&self) -> Value {
        match self {
            Cell::Int(v) => match i64::try_from(*v) {
                Ok(i) => Value::from(i),
                Err(_) => Value::from(*v as f64),
            },
            Cell::Float(v) => {
                let r = round_sig(*v);
                Number::from_f64(r).map(Value::Number).unwrap_or(Value::Null)
            }
            Cell::Text(s) => Value::from(s.clone()),
            Cell::Absent => Value::Null,
        }
    }
}

pub fn round_sig(v: f64) -> f64 {
    if !v.is_finite() || v == 0.0 {
        return v;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, v).parse().unwrap_or(v)
}

pub fn format_float(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v.is_infinite() {
        if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        let r = round_sig(v);
        // Rust prints the shortest representation that round-trips.
        if r == 0.0 {
            "0".into()
        } else {
            format!("{r}")
        }
    }
}

/// A row type with a fixed column order.
pub trait ReportRow {
    const HEADER: &'static [&'static str];

    fn cells(&self) -> Vec<Cell>;
}

pub fn render_csv<R: ReportRow>(rows: &[R]) -> String {
    let mut out = String::new();
    out.push_str(&R::HEADER.join(","));
    out.push('\n');
    for row in rows {
        let cells = row.cells();
        debug_assert_eq!(cells.len(), R::HEADER.len());
        let line: Vec<String> = cells.iter().map(Cell::csv_text).collect();
        let _ = writeln!(out, "{}", line.join(","));
    }
    out
}

pub fn render_json<R: ReportRow>(rows: &[R]) -> String {
    // serde_json's map sorts keys, so objects are written by hand to keep column order.
    let mut out = String::from("[");
    for (i, row) in rows.iter().enumerate() {
        out.push_str(if i == 0 { "\n  {" } else { ",\n  {" });
        for (j, (name, cell)) in R::HEADER.iter().zip(row.cells()).enumerate() {
            if j > 0 {
                out.push_str(", ");
            }
            let _ = write!(out, "{}: {}", Value::from(*name), cell.json_value());
        }
        out.push('}');
    }
    out.push_str(if rows.is_empty() { "]\n" } else { "\n]\n" });
    out
}

pub fn render<R: ReportRow>(rows: &[R], format: ReportFormat) -> String {
    match format {
        ReportFormat::Csv => render_csv(rows),
        ReportFormat::Json => render_json(rows),
    }
}

/// Writes `rows` to `path`.
pub fn emit_report<R: ReportRow>(rows: &[R], format: ReportFormat, path: &Path) -> Result<()> {
    std::fs::write(path, render(rows, format)).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

/// A parsed report.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

fn parse_field(s: &str) -> Cell {
    if s.is_empty() {
        Cell::Absent
    } else if let Ok(i) = s.parse::<i128>() {
        Cell::Int(i)
    } else if let Ok(f) = s.parse::<f64>() {
        Cell::Float(f)
    } else {
        Cell::Text(s.to_string())
    }
}

pub fn parse_csv(text: &str) -> Result<Table> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let bad = |e: csv::Error| Error::Parse { what: "csv report", input: e.to_string() };
    let header = reader.headers().map_err(bad)?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for record in reader.records() {
        rows.push(record.map_err(bad)?.iter().map(parse_field).collect());
    }
    Ok(Table { header, rows })
}

pub fn parse_json(text: &str, header: &[&str]) -> Result<Table> {
    let bad = |input: String| Error::Parse { what: "json report", input };
    let value: Value = serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
    let Value::Array(items) = value else {
        return Err(bad("top level is not an array".into()));
    };
    let mut rows = Vec::with_capacity(items.len());
    for item in items {
        let Value::Object(map) = item else {
            return Err(bad("row is not an object".into()));
        };
        rows.push(header.iter().map(|k| json_cell(&map, k)).collect());
    }
    Ok(Table { header: header.iter().map(|s| s.to_string()).collect(), rows })
}

fn json_cell(map: &Map<String, Value>, key: &str) -> Cell {
    match map.get(key) {
        None | Some(Value::Null) => Cell::Absent,
        Some(Value::Number(n)) => match n.as_i64() {
            Some(i) => Cell::Int(i as i128),
            None => Cell::Float(n.as_f64().unwrap_or(f64::NAN)),
        },
        Some(Value::String(s)) => Cell::Text(s.clone()),
        Some(other) => Cell::Text(other.to_string()),
    }
}

/// Numeric cells compare by value, so `3` and `3.0` agree.
pub fn cells_match(a: &Cell, b: &Cell) -> bool {
    match (a.as_f64(), b.as_f64()) {
        (Some(x), Some(y)) => x == y || (x.is_nan() && y.is_nan()),
        _ => a == b,
    }
}
