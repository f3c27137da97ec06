//! Rendering of command results: CSV with fixed 12-digit floats, or JSON.

use std::io::Write;

use moyal_core::fmt_sig;
use serde_json::{json, Map, Value};

use crate::args::Format;

#[derive(Clone, Debug)]
pub enum Cell {
    F(Option<f64>),
    U(Option<usize>),
    S(String),
    B(Option<bool>),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::F(Some(x)) => fmt_sig(*x),
            Cell::U(Some(x)) => x.to_string(),
            Cell::B(Some(b)) => b.to_string(),
            Cell::S(s) => s.clone(),
            _ => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::F(Some(x)) if x.is_finite() => json!(x),
            Cell::U(Some(x)) => json!(x),
            Cell::B(Some(b)) => json!(b),
            Cell::S(s) => json!(s),
            _ => Value::Null,
        }
    }
}

pub fn f(x: f64) -> Cell {
    Cell::F(Some(x))
}

pub fn fo(x: Option<f64>) -> Cell {
    Cell::F(x)
}

pub fn s(x: impl Into<String>) -> Cell {
    Cell::S(x.into())
}

#[derive(Debug)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Self { columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn json_rows(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|r| {
                    let mut m = Map::new();
                    for (c, v) in self.columns.iter().zip(r) {
                        m.insert((*c).to_string(), v.json());
                    }
                    Value::Object(m)
                })
                .collect(),
        )
    }
}

/// What a command produces: a flat table, the JSON document, and whether every check passed.
pub struct Output {
    pub table: Table,
    pub json: Value,
    pub passed: bool,
}

impl Output {
    /// JSON is the table rows under "rows" plus extra top-level fields.
    pub fn from_table(table: Table, passed: bool, extra: Value) -> Self {
        let mut doc = match extra {
            Value::Object(m) => m,
            _ => Map::new(),
        };
        doc.insert("rows".into(), table.json_rows());
        doc.insert("passed".into(), json!(passed));
        Self { table, json: Value::Object(doc), passed }
    }
}

pub fn render<W: Write>(out: &Output, format: Format, w: W) -> std::io::Result<()> {
    match format {
        Format::Csv => write_csv(&out.table, w),
        Format::Json => write_json(&out.json, w),
    }
}

pub fn write_csv<W: Write>(t: &Table, w: W) -> std::io::Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(&t.columns)?;
    for r in &t.rows {
        wr.write_record(r.iter().map(Cell::csv))?;
    }
    wr.flush()
}

fn write_json<W: Write>(v: &Value, mut w: W) -> std::io::Result<()> {
    serde_json::to_writer_pretty(&mut w, v)?;
    writeln!(w)
}

/// Machine-readable error record.
pub fn error_record(kind: &str, message: &str, format: Format) -> String {
    match format {
        Format::Json => {
            let v = json!({"status": "error", "kind": kind, "message": message});
            format!("{}\n", serde_json::to_string_pretty(&v).unwrap())
        }
        Format::Csv => {
            let mut wr = csv::Writer::from_writer(Vec::new());
            wr.write_record(["status", "kind", "message"]).unwrap();
            wr.write_record(["error", kind, message]).unwrap();
            String::from_utf8(wr.into_inner().unwrap()).unwrap()
        }
    }
}
