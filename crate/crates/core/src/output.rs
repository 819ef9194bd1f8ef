//! Plot-ready emission: versioned CSV tables and JSON reports.
//!
//! CSV files start with the line `# adiametric-csv v1`, followed by a header
//! row; numbers are written with 17 significant digits. JSON reports are a
//! single object with `config`, `result` and `diagnostics`.

use std::io::Write;

use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};

pub const CSV_VERSION_LINE: &str = "# adiametric-csv v1";

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Num(if b { 1.0 } else { 0.0 })
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_owned())
    }
}

/// Round-trip-safe rendering: 17 significant digits, `.` decimal point.
pub fn format_number(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{CSV_VERSION_LINE}").map_err(io_error)?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns).map_err(csv_error)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|c| match c {
                Cell::Num(x) => format_number(*x),
                Cell::Text(s) => s.clone(),
            }))
            .map_err(csv_error)?;
        }
        w.flush().map_err(io_error)
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }
}

/// Parses a CSV v1 document back into a table (numbers where they parse).
pub fn read_csv(text: &str) -> Result<Table> {
    let body = text
        .strip_prefix(CSV_VERSION_LINE)
        .and_then(|rest| rest.strip_prefix('\n'))
        .ok_or_else(|| Error::InvalidParameter("missing CSV version line".into()))?;
    let mut r = csv::Reader::from_reader(body.as_bytes());
    let columns = r
        .headers()
        .map_err(csv_error)?
        .iter()
        .map(str::to_owned)
        .collect();
    let mut table = Table {
        columns,
        rows: Vec::new(),
    };
    for record in r.records() {
        let record = record.map_err(csv_error)?;
        table.rows.push(
            record
                .iter()
                .map(|s| s.parse::<f64>().map(Cell::Num).unwrap_or_else(|_| Cell::Text(s.into())))
                .collect(),
        );
    }
    Ok(table)
}

/// A finished command: JSON payload, optional tabular view, diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub result: Value,
    pub table: Option<Table>,
    pub diagnostics: Value,
}

impl Report {
    pub fn to_json<C: Serialize>(&self, config: &C) -> String {
        let doc = serde_json::json!({
            "config": config,
            "result": self.result,
            "diagnostics": self.diagnostics,
        });
        let mut s = serde_json::to_string_pretty(&doc).expect("report is serializable");
        s.push('\n');
        s
    }
}

pub fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("result types are serializable")
}

fn io_error(e: std::io::Error) -> Error {
    Error::InvalidParameter(format!("write failed: {e}"))
}

fn csv_error(e: csv::Error) -> Error {
    Error::InvalidParameter(format!("csv: {e}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout_and_round_trip() {
        let mut t = Table::new(["t", "x", "label"]);
        t.push(vec![0.1.into(), (1.0 / 3.0).into(), "a,b".into()]);
        t.push(vec![2.0.into(), f64::NAN.into(), "c".into()]);
        let text = t.to_csv_string();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(CSV_VERSION_LINE));
        assert_eq!(lines.next(), Some("t,x,label"));
        let back = read_csv(&text).unwrap();
        assert_eq!(back.columns, t.columns);
        assert_eq!(back.rows[0], t.rows[0]);
        match back.rows[1][1] {
            Cell::Num(x) => assert!(x.is_nan()),
            _ => panic!("nan should parse"),
        }
    }

    #[test]
    fn seventeen_significant_digits() {
        let x = 0.1 + 0.2;
        let s = format_number(x);
        assert_eq!(s.parse::<f64>().unwrap(), x);
        assert_eq!(s, "3.0000000000000004e-1");
    }
}
