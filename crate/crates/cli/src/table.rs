//! Result tables and run summaries, written as CSV or JSON.

use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{ExperimentConfig, Format};

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
            Cell::Int(v) => v.to_string(),
            // 17 significant digits
            Cell::Float(v) if v.is_finite() => format!("{v:.16e}"),
            Cell::Float(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(v) => json!(v),
            Cell::Float(v) => json!(v),
            Cell::Text(s) => json!(s),
            Cell::Empty => Value::Null,
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Text(v.to_string())
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
        v.map_or(Cell::Empty, Into::into)
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Table { columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// Outcome of one trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub version: &'static str,
    pub config: ExperimentConfig,
    pub trials: usize,
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
    pub counts: BTreeMap<String, usize>,
    pub worst: BTreeMap<String, f64>,
}

impl RunSummary {
    pub fn new(config: &ExperimentConfig) -> Self {
        RunSummary {
            version: env!("CARGO_PKG_VERSION"),
            config: config.clone(),
            trials: 0,
            passed: 0,
            failed: 0,
            skipped: 0,
            counts: BTreeMap::new(),
            worst: BTreeMap::new(),
        }
    }

    pub fn record(&mut self, status: Status) {
        self.trials += 1;
        match status {
            Status::Pass => self.passed += 1,
            Status::Fail => self.failed += 1,
            Status::Skipped => self.skipped += 1,
        }
    }

    pub fn count(&mut self, key: &str) {
        *self.counts.entry(key.to_string()).or_default() += 1;
    }

    /// Keeps the smallest value seen for `key`.
    pub fn worst_min(&mut self, key: &str, v: f64) {
        if v.is_finite() {
            let e = self.worst.entry(key.to_string()).or_insert(v);
            *e = e.min(v);
        }
    }

    /// Keeps the largest value seen for `key`.
    pub fn worst_max(&mut self, key: &str, v: f64) {
        if v.is_finite() {
            let e = self.worst.entry(key.to_string()).or_insert(v);
            *e = e.max(v);
        }
    }

    pub fn ok(&self) -> bool {
        self.failed == 0
    }
}

pub fn write_csv<W: Write>(table: &Table, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(&table.columns)?;
    for row in &table.rows {
        w.write_record(row.iter().map(Cell::csv))?;
    }
    w.flush()?;
    Ok(())
}

pub fn to_json(table: &Table, summary: &RunSummary) -> Value {
    json!({
        "summary": summary,
        "columns": table.columns,
        "rows": table.rows.iter().map(|r| r.iter().map(Cell::json).collect::<Vec<_>>()).collect::<Vec<_>>(),
    })
}

pub fn render(table: &Table, summary: &RunSummary, format: Format) -> Result<Vec<u8>, String> {
    let mut buf = Vec::new();
    match format {
        Format::Csv => write_csv(table, &mut buf).map_err(|e| e.to_string())?,
        Format::Json => {
            serde_json::to_writer_pretty(&mut buf, &to_json(table, summary)).map_err(|e| e.to_string())?;
            buf.push(b'\n');
        }
    }
    Ok(buf)
}
