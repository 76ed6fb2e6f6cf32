use std::io::Write;

use serde::Serialize;
use serde_json::{json, Map, Value};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u128),
    Text(String),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(v) => fmt_f64(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(v) if v.is_finite() => json!(v),
            Cell::Num(v) => json!(fmt_f64(*v)),
            Cell::Int(v) => match u64::try_from(*v) {
                Ok(x) => json!(x),
                Err(_) => json!(v.to_string()),
            },
            Cell::Text(s) => json!(s),
            Cell::Empty => Value::Null,
        }
    }
}

/// Shortest representation that parses back to the same `f64`.
pub fn fmt_f64(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v}")
    }
}

#[derive(Debug, Clone)]
pub struct Report {
    pub command: &'static str,
    pub params: Value,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    /// Extra JSON-only fields.
    pub extra: Map<String, Value>,
}

impl Report {
    pub fn new(command: &'static str, params: impl Serialize, columns: &[&str]) -> Self {
        Self {
            command,
            params: serde_json::to_value(params).unwrap_or(Value::Null),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            extra: Map::new(),
        }
    }

    pub fn write<W: Write>(&self, mut w: W, format: Format) -> std::io::Result<()> {
        match format {
            Format::Csv => {
                writeln!(w, "{}", self.columns.join(","))?;
                for row in &self.rows {
                    let cells: Vec<String> = row.iter().map(Cell::csv).collect();
                    writeln!(w, "{}", cells.join(","))?;
                }
            }
            Format::Json => {
                let rows: Vec<Value> = self
                    .rows
                    .iter()
                    .map(|row| {
                        let obj: Map<String, Value> = self
                            .columns
                            .iter()
                            .zip(row)
                            .filter(|(_, c)| **c != Cell::Empty)
                            .map(|(k, c)| (k.clone(), c.json()))
                            .collect();
                        Value::Object(obj)
                    })
                    .collect();
                let mut env = Map::new();
                env.insert("schema_version".into(), json!(SCHEMA_VERSION));
                env.insert("command".into(), json!(self.command));
                env.insert("params".into(), self.params.clone());
                env.insert("columns".into(), json!(self.columns));
                env.insert("rows".into(), Value::Array(rows));
                for (k, v) in &self.extra {
                    env.insert(k.clone(), v.clone());
                }
                serde_json::to_writer_pretty(&mut w, &Value::Object(env))?;
                writeln!(w)?;
            }
        }
        Ok(())
    }
}
