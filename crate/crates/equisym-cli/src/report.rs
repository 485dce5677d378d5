//! Report emission: one CSV table and one JSON summary per run, both
//! deterministic functions of the results (floats are printed in shortest
//! round-trip form).

use crate::config::ExperimentConfig;
use anyhow::{Context, Result};
use serde_json::{json, Map, Value};
use std::path::PathBuf;

#[derive(Debug, Clone)]
pub struct Report {
    pub experiment: String,
    pub passed: bool,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub summary: Map<String, Value>,
}

impl Report {
    pub fn new(experiment: &str, header: &[&str]) -> Self {
        Self {
            experiment: experiment.to_string(),
            passed: true,
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
            summary: Map::new(),
        }
    }

    pub fn push_row(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.header.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn set(&mut self, key: &str, value: impl Into<Value>) {
        self.summary.insert(key.to_string(), value.into());
    }

    pub fn csv(&self) -> String {
        let mut out = String::new();
        push_line(&mut out, &self.header);
        for row in &self.rows {
            push_line(&mut out, row);
        }
        out
    }

    pub fn json(&self, cfg: &ExperimentConfig) -> Result<String> {
        let doc = json!({
            "experiment": self.experiment,
            "config": serde_json::to_value(cfg).context("serializing config echo")?,
            "passed": self.passed,
            "summary": Value::Object(self.summary.clone()),
        });
        let mut text = serde_json::to_string_pretty(&doc).context("serializing report")?;
        text.push('\n');
        Ok(text)
    }

    /// Writes `<out>/<experiment>.csv` and `<out>/<experiment>.json`.
    pub fn write(&self, cfg: &ExperimentConfig) -> Result<(PathBuf, PathBuf)> {
        std::fs::create_dir_all(&cfg.out)
            .with_context(|| format!("creating output directory {}", cfg.out.display()))?;
        let csv_path = cfg.out.join(format!("{}.csv", self.experiment));
        let json_path = cfg.out.join(format!("{}.json", self.experiment));
        std::fs::write(&csv_path, self.csv())
            .with_context(|| format!("writing {}", csv_path.display()))?;
        std::fs::write(&json_path, self.json(cfg)?)
            .with_context(|| format!("writing {}", json_path.display()))?;
        Ok((csv_path, json_path))
    }
}

fn push_line<S: AsRef<str>>(out: &mut String, fields: &[S]) {
    for (k, field) in fields.iter().enumerate() {
        if k > 0 {
            out.push(',');
        }
        out.push_str(&quote(field.as_ref()));
    }
    out.push('\n');
}

fn quote(field: &str) -> String {
    if field.contains(',') || field.contains('"') || field.contains('\n') {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

/// Shortest round-trip scientific notation; the uniform float format for CSV
/// error columns.
pub fn fmt_float(x: f64) -> String {
    format!("{x:e}")
}

pub fn fmt_pass(pass: bool) -> String {
    if pass { "pass" } else { "fail" }.to_string()
}
