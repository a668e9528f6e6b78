//! CSV and JSON emission.

use std::fmt::Write as _;
use std::path::Path;

use serde_json::{json, Map, Value};

use crate::error::CliError;

pub const DIMENSIONLESS: &str = "dimensionless";

/// `{"unit": .., "value": ..}`; non-finite values become null.
pub fn quantity(value: f64, unit: &str) -> Value {
    json!({ "unit": unit, "value": value })
}

pub fn maybe_quantity(value: Option<f64>, unit: &str) -> Value {
    json!({ "unit": unit, "value": value })
}

pub fn count(n: usize) -> Value {
    json!({ "unit": "count", "value": n })
}

pub fn object(entries: Vec<(&str, Value)>) -> Value {
    Value::Object(entries.into_iter().map(|(k, v)| (k.to_owned(), v)).collect::<Map<_, _>>())
}

/// Row indices kept by decimation: every `stride`-th sample plus the last.
pub fn decimate(n: usize, stride: usize) -> Vec<usize> {
    let mut rows: Vec<usize> = (0..n).step_by(stride.max(1)).collect();
    if n > 0 && rows.last() != Some(&(n - 1)) {
        rows.push(n - 1);
    }
    rows
}

#[derive(Debug, Clone)]
pub struct Table {
    header: Vec<&'static str>,
    body: String,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Self {
            header,
            body: String::new(),
        }
    }

    pub fn push(&mut self, row: &[f64]) {
        assert_eq!(row.len(), self.header.len(), "row width");
        for (i, v) in row.iter().enumerate() {
            if i > 0 {
                self.body.push(',');
            }
            write!(self.body, "{v:.16e}").unwrap();
        }
        self.body.push('\n');
    }

    pub fn render(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        out.push_str(&self.body);
        out
    }
}

pub fn write_outputs(dir: &Path, stem: &str, table: &Table, summary: &Value) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(format!("{stem}.csv")), table.render())?;
    write_json(&dir.join(format!("{stem}.json")), summary)
}

pub fn write_json(path: &Path, value: &Value) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let mut text = serde_json::to_string_pretty(value).expect("json serializes");
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}
