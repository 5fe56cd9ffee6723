//! Subcommand results and their JSON summaries.

use serde_json::{Map, Value};

use crate::table::{format_float, Cell, Table};
use crate::{version, Common};

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub command: &'static str,
    /// Inputs as resolved, defaults included.
    pub params: Vec<(String, Cell)>,
    /// Scalar results that are not part of the table.
    pub summary: Vec<(String, Cell)>,
    pub table: Table,
}

impl Report {
    pub fn new(command: &'static str, table: Table) -> Self {
        Report {
            command,
            params: Vec::new(),
            summary: Vec::new(),
            table,
        }
    }

    pub fn param(mut self, name: &str, value: impl Into<Cell>) -> Self {
        self.params.push((name.to_string(), value.into()));
        self
    }

    pub fn summarize(mut self, name: &str, value: impl Into<Cell>) -> Self {
        self.summary.push((name.to_string(), value.into()));
        self
    }

    /// Summary with parameters, version, seed, wall time and results.
    pub fn to_json(&self, common: &Common, wall_time: f64) -> String {
        let mut root = Map::new();
        root.insert("version".into(), Value::String(version()));
        root.insert("command".into(), Value::String(self.command.into()));
        root.insert("parameters".into(), object(&self.params));
        root.insert("seed".into(), Value::from(common.seed));
        root.insert("wall_time_s".into(), json_cell(&Cell::Float(wall_time)));
        root.insert("results".into(), self.results());
        let mut text = serde_json::to_string_pretty(&Value::Object(root)).expect("json serialization");
        text.push('\n');
        text
    }

    pub fn results(&self) -> Value {
        let mut results = Map::new();
        if !self.summary.is_empty() {
            results.insert("summary".into(), object(&self.summary));
        }
        results.insert("rows".into(), table_json(&self.table));
        Value::Object(results)
    }
}

/// Rows as objects keyed by column name.
pub fn table_json(table: &Table) -> Value {
    Value::Array(
        table
            .rows()
            .iter()
            .map(|row| {
                Value::Object(
                    table
                        .header()
                        .iter()
                        .zip(row)
                        .map(|(h, c)| (h.clone(), json_cell(c)))
                        .collect(),
                )
            })
            .collect(),
    )
}

pub fn object(pairs: &[(String, Cell)]) -> Value {
    Value::Object(pairs.iter().map(|(k, v)| (k.clone(), json_cell(v))).collect())
}

/// Finite floats keep the 17-digit text; non-finite values become strings.
pub fn json_cell(cell: &Cell) -> Value {
    match cell {
        Cell::Float(x) if x.is_finite() => serde_json::from_str(&format_float(*x)).expect("valid json number"),
        Cell::Float(x) => Value::String(format_float(*x)),
        Cell::Int(i) => Value::from(*i),
        Cell::Text(s) => Value::String(s.clone()),
    }
}
