//! Tables rendered as CSV or as a JSON array of row objects.

use std::io::Write;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::scalar::format_f64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Text(String),
    Int(i64),
    Float(f64),
    Bool(bool),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Self::Text(s) => s.clone(),
            Self::Int(i) => i.to_string(),
            Self::Float(x) => format_f64(*x),
            Self::Bool(b) => b.to_string(),
            Self::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Self::Text(s) => Value::String(s.clone()),
            Self::Int(i) => Value::from(*i),
            // round-trip through the 15-digit text so both formats agree
            Self::Float(x) => match format_f64(*x).parse::<f64>().ok().and_then(serde_json::Number::from_f64) {
                Some(n) => Value::Number(n),
                None => Value::String(format_f64(*x)),
            },
            Self::Bool(b) => Value::Bool(*b),
            Self::Empty => Value::Null,
        }
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Self::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Self::Text(s)
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Self::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Self::Int(i as i64)
    }
}

impl From<u64> for Cell {
    fn from(i: u64) -> Self {
        // seeds above i64::MAX stay exact as text
        i64::try_from(i).map_or_else(|_| Self::Text(i.to_string()), Self::Int)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Self::Bool(b)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Self::Empty, Into::into)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self { columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> std::io::Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv))?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Value> =
                    self.columns.iter().zip(row).map(|(c, v)| (c.to_string(), v.json())).collect();
                Value::Object(obj)
            })
            .collect();
        let mut text = serde_json::to_string_pretty(&Value::Array(rows)).expect("json serialization");
        text.push('\n');
        text
    }
}

/// Where and how tables are written.
#[derive(Debug, Clone, PartialEq)]
pub struct Sink {
    pub format: Format,
    pub output: Option<String>,
    pub timestamp: bool,
}

impl Sink {
    /// Renders the tables in order. CSV output gets a `# generated` header
    /// line unless timestamps are suppressed; tables are separated by a blank
    /// line. JSON output is one array per table, or an object keyed by table
    /// name when there are several.
    pub fn render(&self, tables: &[(&str, Table)]) -> std::io::Result<String> {
        let mut out = String::new();
        match self.format {
            Format::Csv => {
                if self.timestamp {
                    let secs = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
                    out.push_str(&format!("# generated at unix time {secs}\n"));
                }
                for (i, (_, table)) in tables.iter().enumerate() {
                    if i > 0 {
                        out.push('\n');
                    }
                    out.push_str(&table.to_csv()?);
                }
            }
            Format::Json => {
                if let [(_, table)] = tables {
                    out.push_str(&table.to_json());
                } else {
                    let obj: Map<String, Value> = tables
                        .iter()
                        .map(|(name, t)| (name.to_string(), serde_json::from_str(&t.to_json()).expect("valid json")))
                        .collect();
                    out.push_str(&serde_json::to_string_pretty(&Value::Object(obj)).expect("json serialization"));
                    out.push('\n');
                }
            }
        }
        Ok(out)
    }

    pub fn write(&self, tables: &[(&str, Table)]) -> std::io::Result<()> {
        let text = self.render(tables)?;
        match &self.output {
            Some(path) => std::fs::write(path, text),
            None => {
                let mut stdout = std::io::stdout().lock();
                stdout.write_all(text.as_bytes())?;
                stdout.flush()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        let mut t = Table::new(&["name", "value", "flag", "missing"]);
        t.push(vec!["a,b".into(), 2f64.sqrt().into(), true.into(), Cell::Empty]);
        t.push(vec!["c".into(), 1e-20.into(), false.into(), Cell::Int(-3)]);
        t
    }

    #[test]
    fn csv_quotes_and_formats() {
        let csv = sample().to_csv().unwrap();
        assert_eq!(csv, "name,value,flag,missing\n\"a,b\",1.4142135623731,true,\nc,1e-20,false,-3\n");
    }

    #[test]
    fn json_mirrors_rows() {
        let v: Value = serde_json::from_str(&sample().to_json()).unwrap();
        assert_eq!(v[0]["name"], "a,b");
        assert_eq!(v[0]["value"].as_f64().unwrap(), "1.4142135623731".parse::<f64>().unwrap());
        assert_eq!(v[0]["missing"], Value::Null);
        assert_eq!(v[1]["missing"], -3);
    }

    #[test]
    fn timestamp_header_is_optional() {
        let t = [("t", sample())];
        let with = Sink { format: Format::Csv, output: None, timestamp: true }.render(&t).unwrap();
        let without = Sink { format: Format::Csv, output: None, timestamp: false }.render(&t).unwrap();
        assert!(with.starts_with("# generated"));
        assert_eq!(with.lines().skip(1).collect::<Vec<_>>(), without.lines().collect::<Vec<_>>());
    }
}
