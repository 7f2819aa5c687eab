//! Tabular experiment output with a provenance header.
//!
//! CSV output starts with `#` comment lines carrying the command and the
//! fully resolved configuration as JSON. Floating-point cells are written
//! with 17 significant digits so they parse back to the same `f64`.

use std::io::Write;

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::Result;

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Text(String),
    Empty,
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

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_owned())
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(x: Option<T>) -> Self {
        x.map_or(Cell::Empty, Into::into)
    }
}

/// `f64` with 17 significant digits.
pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Float(x) => format_float(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Float(x) => json!(x),
            Cell::Int(i) => json!(i),
            Cell::Text(s) => json!(s),
            Cell::Empty => Value::Null,
        }
    }
}

/// A named table of results plus the configuration that produced it.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub config: Value,
}

impl Table {
    pub fn new<S: Into<String>>(name: S, columns: &[&str], config: &impl Serialize) -> Result<Self> {
        Ok(Table {
            name: name.into(),
            columns: columns.iter().map(|c| (*c).to_owned()).collect(),
            rows: Vec::new(),
            config: serde_json::to_value(config)?,
        })
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width does not match header");
        self.rows.push(row);
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# sympb {}", self.name)?;
        writeln!(out, "# config: {}", serde_json::to_string(&self.config)?)?;
        writeln!(out, "{}", self.columns.join(","))?;
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(Cell::csv).collect();
            writeln!(out, "{}", line.join(","))?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| Value::Object(self.columns.iter().cloned().zip(r.iter().map(Cell::json)).collect()))
            .collect();
        json!({
            "table": self.name,
            "config": self.config,
            "columns": self.columns,
            "rows": rows,
        })
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("CSV output is UTF-8")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_round_trips() {
        for x in [0.1, -0.9875, 1.0 / 3.0, 6.02214076e23, 5e-324, 0.0] {
            let s = format_float(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
    }

    #[test]
    fn csv_has_provenance_then_header() {
        let mut t = Table::new("demo", &["a", "b", "c"], &json!({"seed": 3})).unwrap();
        t.push(vec![0.5.into(), 7usize.into(), Cell::Empty]);
        t.push(vec![
            Cell::Text("x,y".into()),
            Cell::from(Some(2u64)),
            Cell::from(None::<f64>),
        ]);
        let s = t.to_csv_string();
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], "# sympb demo");
        assert_eq!(lines[1], r#"# config: {"seed":3}"#);
        assert_eq!(lines[2], "a,b,c");
        assert_eq!(lines[3], "5.0000000000000000e-1,7,");
        assert_eq!(lines[4], "\"x,y\",2,");
        let j = t.to_json();
        assert_eq!(j["rows"][0]["b"], json!(7));
        assert_eq!(j["rows"][1]["c"], Value::Null);
    }
}
