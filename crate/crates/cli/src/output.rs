//! Result files: RFC-4180 CSV tables and a JSON summary per run.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde_json::{Map, Value};

use crate::error::CliError;
use crate::scenario::Scenario;

/// Shortest text that parses back to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-4..1e16).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self { name: name.into(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn with_header(name: &str, header: Vec<String>) -> Self {
        Self { name: name.into(), header, rows: Vec::new() }
    }

    pub fn push_numbers(&mut self, row: &[f64]) {
        self.rows.push(row.iter().map(|&x| fmt_f64(x)).collect());
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let io = |e: csv::Error| CliError::Runtime(format!("writing {}: {e}", path.display()));
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_path(path).map_err(io)?;
        w.write_record(&self.header).map_err(io)?;
        for r in &self.rows {
            w.write_record(r).map_err(io)?;
        }
        w.flush().map_err(|e| CliError::Runtime(format!("writing {}: {e}", path.display())))
    }
}

/// Everything a run produces.
#[derive(Debug, Clone, Default)]
pub struct ResultBundle {
    pub tables: Vec<Table>,
    pub summary: Map<String, Value>,
    /// Resolved numerical settings, defaults included.
    pub numerics: Map<String, Value>,
    pub warnings: Vec<String>,
}

impl ResultBundle {
    pub fn scalar(&mut self, key: &str, value: f64) {
        self.summary.insert(key.into(), json_f64(value));
    }

    pub fn numeric(&mut self, key: &str, value: impl Into<Value>) {
        self.numerics.insert(key.into(), value.into());
    }

    /// Writes `<name>_<table>.csv` and `<name>_summary.json` into `dir` and
    /// returns the paths written.
    pub fn write(&self, dir: &Path, scenario: &Scenario, seed: u64) -> Result<Vec<PathBuf>, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Runtime(format!("creating {}: {e}", dir.display())))?;
        let mut written = Vec::new();
        let mut names = Vec::new();
        for t in &self.tables {
            let file = format!("{}_{}.csv", scenario.name, t.name);
            let path = dir.join(&file);
            t.write(&path)?;
            names.push(Value::String(file));
            written.push(path);
        }
        let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        let doc = serde_json::json!({
            "version": env!("CARGO_PKG_VERSION"),
            "kind": scenario.kind.name(),
            "seed": seed,
            "timestamp": timestamp,
            "config_hash": scenario.config_hash(),
            "config": scenario.canonical,
            "numerics": self.numerics,
            "summary": self.summary,
            "warnings": self.warnings,
            "tables": names,
        });
        let path = dir.join(format!("{}_summary.json", scenario.name));
        let text = serde_json::to_string_pretty(&doc).map_err(|e| CliError::Runtime(e.to_string()))?;
        std::fs::write(&path, text + "\n").map_err(|e| CliError::Runtime(format!("writing {}: {e}", path.display())))?;
        written.push(path);
        Ok(written)
    }
}

/// JSON has no infinities or NaN; those become strings.
pub fn json_f64(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or_else(|| Value::String(fmt_f64(x)), Value::Number)
}
