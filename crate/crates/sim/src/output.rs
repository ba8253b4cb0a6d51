//! Tabular results and their CSV/JSON renderings.
//!
//! CSV files start with `# key: value` metadata lines, followed by an
//! RFC 4180 header and rows. The JSON mirror holds the same metadata, column
//! names and numbers: `{"metadata": {...}, "columns": [...], "rows": [[...]]}`.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{Map, Value};

use crate::config::Format;
use crate::error::{Result, SimError};

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    /// File name without extension.
    pub stem: String,
    pub metadata: Vec<(String, Value)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// Shortest representation that parses back to the same `f64`.
fn number(v: f64) -> String {
    format!("{v:?}")
}

impl Table {
    pub fn new(stem: impl Into<String>, columns: Vec<String>) -> Table {
        Table {
            stem: stem.into(),
            metadata: Vec::new(),
            columns,
            rows: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: impl Into<String>, value: impl Into<Value>) {
        self.metadata.push((key.into(), value.into()));
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            let text = match v {
                Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            for line in text.lines() {
                out.push_str(&format!("# {k}: {line}\n"));
            }
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(|&v| number(v))).expect("in-memory write");
        }
        let body = w.into_inner().expect("in-memory flush");
        out.push_str(std::str::from_utf8(&body).expect("CSV output is UTF-8"));
        out
    }

    pub fn to_json(&self) -> String {
        let metadata: Map<String, Value> = self.metadata.iter().cloned().collect();
        let doc = serde_json::json!({
            "metadata": metadata,
            "columns": self.columns,
            "rows": self.rows,
        });
        let mut s = serde_json::to_string_pretty(&doc).expect("JSON serializes");
        s.push('\n');
        s
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }

    /// Writes `<dir>/<stem>.<ext>`, creating `dir` if needed.
    pub fn write(&self, dir: &Path, format: Format) -> Result<PathBuf> {
        fs::create_dir_all(dir).map_err(|e| SimError::io(dir, e))?;
        let path = dir.join(format!("{}.{}", self.stem, format.extension()));
        fs::write(&path, self.render(format)).map_err(|e| SimError::io(&path, e))?;
        Ok(path)
    }
}

/// Reads back a CSV written by [`Table::to_csv`].
pub fn parse_csv(text: &str) -> std::result::Result<Table, String> {
    let mut metadata = Vec::new();
    let mut body = String::new();
    for line in text.lines() {
        match line.strip_prefix("# ") {
            Some(rest) => {
                let (k, v) = rest
                    .split_once(": ")
                    .ok_or_else(|| format!("bad metadata line `{line}`"))?;
                metadata.push((k.to_string(), Value::String(v.to_string())));
            }
            None => {
                body.push_str(line);
                body.push('\n');
            }
        }
    }
    let mut r = csv::Reader::from_reader(body.as_bytes());
    let columns = r
        .headers()
        .map_err(|e| e.to_string())?
        .iter()
        .map(String::from)
        .collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| e.to_string())?;
        rows.push(
            rec.iter()
                .map(|f| f.parse::<f64>().map_err(|e| format!("{f}: {e}")))
                .collect::<std::result::Result<Vec<_>, _>>()?,
        );
    }
    Ok(Table {
        stem: String::new(),
        metadata,
        columns,
        rows,
    })
}
