//! Tables written as CSV (17 significant digits) or JSON.

use std::io::Write;

use serde_json::{json, Map, Value};

use crate::config::Format;
use crate::error::CliResult;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Float(x) => format_float(*x),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(i) => json!(i),
            Cell::Float(x) if x.is_finite() => json!(x),
            Cell::Float(x) => json!(format_float(*x)),
            Cell::Text(s) => json!(s),
            Cell::Empty => Value::Null,
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<u32> for Cell {
    fn from(x: u32) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Float)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

/// `{:.16e}`, i.e. 17 significant digits, which round-trips every `f64`.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{x:.16e}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// What a command produces: a table plus scalar results.
#[derive(Debug, Clone)]
pub struct Report {
    pub table: Table,
    pub summary: Map<String, Value>,
}

impl Report {
    pub fn new(table: Table) -> Self {
        Self {
            table,
            summary: Map::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.summary.insert(key.to_string(), value.into());
        self
    }

    pub fn with_float(self, key: &str, x: f64) -> Self {
        let v = Cell::Float(x).json();
        self.with(key, v)
    }
}

pub fn write_csv<W: Write>(table: &Table, w: W) -> CliResult<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(&table.columns)?;
    for row in &table.rows {
        wtr.write_record(row.iter().map(Cell::csv))?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn to_json(report: &Report, command: &str, config: Value) -> Value {
    let rows: Vec<Value> = report
        .table
        .rows
        .iter()
        .map(|r| Value::Array(r.iter().map(Cell::json).collect()))
        .collect();
    json!({
        "tool": "spherewidth",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "config": config,
        "columns": report.table.columns,
        "rows": rows,
        "summary": Value::Object(report.summary.clone()),
    })
}

pub fn write_report<W: Write>(
    report: &Report,
    format: Format,
    command: &str,
    config: Value,
    mut w: W,
) -> CliResult<()> {
    match format {
        Format::Csv => write_csv(&report.table, w),
        Format::Json => {
            serde_json::to_writer_pretty(&mut w, &to_json(report, command, config))
                .map_err(|e| crate::error::CliError::Io(e.into()))?;
            writeln!(w)?;
            Ok(())
        }
    }
}
