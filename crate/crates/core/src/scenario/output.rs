// SPDX-License-Identifier: Apache-2.0

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::{ScenarioConfig, Task};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Provenance {
    pub package: &'static str,
    pub version: &'static str,
    pub config_sha256: String,
    /// Copied from `SOURCE_DATE_EPOCH` when set; no wall clock is read.
    pub source_date_epoch: Option<String>,
    pub seedless: bool,
}

impl Provenance {
    pub fn new(resolved_config: &str) -> Self {
        let digest = Sha256::digest(resolved_config.as_bytes());
        let mut hex = String::with_capacity(64);
        for b in digest {
            let _ = write!(hex, "{b:02x}");
        }
        Self {
            package: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            config_sha256: hex,
            source_date_epoch: std::env::var("SOURCE_DATE_EPOCH").ok(),
            seedless: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunReport {
    pub task: Task,
    /// Fully resolved configuration, defaults filled in.
    pub input: ScenarioConfig,
    pub results: serde_json::Value,
    pub diagnostics: serde_json::Value,
    pub provenance: Provenance,
    /// Human-readable lines, rounded to four decimals.
    #[serde(skip)]
    pub summary: Vec<String>,
}

impl RunReport {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self).map_err(|e| Error::Io(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }
}

/// Numeric table written as CSV with a `#` metadata header. Floats use 17
/// significant digits; absent values are empty fields.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
    pub extra_meta: Vec<(String, String)>,
}

impl CsvTable {
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new(), extra_meta: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Option<f64>>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn meta(&mut self, key: &str, value: &str) {
        self.extra_meta.push((key.to_string(), value.to_string()));
    }

    pub fn render(&self, prov: &Provenance, task: Task, angle_unit: &str) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# {} {}", prov.package, prov.version);
        let _ = writeln!(s, "# task: {task}");
        let _ = writeln!(s, "# config_sha256: {}", prov.config_sha256);
        let _ = writeln!(s, "# angle_unit: {angle_unit}");
        for (k, v) in &self.extra_meta {
            let _ = writeln!(s, "# {k}: {v}");
        }
        s.push_str(&self.columns.join(","));
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| v.map(|x| format!("{x:.16e}")).unwrap_or_default()).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }

    pub fn write(&self, path: &Path, prov: &Provenance, task: Task, angle_unit: &str) -> Result<()> {
        std::fs::write(path, self.render(prov, task, angle_unit)).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
    }

    /// Parses text produced by [`CsvTable::render`] back into columns and
    /// rows (metadata lines are skipped).
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.starts_with('#'));
        let header = lines.next().ok_or_else(|| Error::Config("empty csv".into()))?;
        let columns: Vec<String> = header.split(',').map(str::to_string).collect();
        let mut rows = Vec::new();
        for line in lines {
            let row = line
                .split(',')
                .map(|c| {
                    if c.is_empty() {
                        Ok(None)
                    } else {
                        c.parse::<f64>().map(Some).map_err(|e| Error::Config(format!("csv value `{c}`: {e}")))
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            if row.len() != columns.len() {
                return Err(Error::Config("csv row length mismatch".into()));
            }
            rows.push(row);
        }
        Ok(Self { columns, rows, extra_meta: Vec::new() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_is_lossless() {
        let mut t = CsvTable::new(&["a", "b"]);
        t.push(vec![Some(0.1 + 0.2), None]);
        t.push(vec![Some(-1.0e-300), Some(std::f64::consts::PI)]);
        let prov = Provenance::new("x");
        let text = t.render(&prov, Task::Point, "deg");
        assert!(text.starts_with("# cascade-entangle"));
        let back = CsvTable::parse(&text).unwrap();
        assert_eq!(back.columns, t.columns);
        assert_eq!(back.rows, t.rows);
    }

    #[test]
    fn hash_is_stable() {
        assert_eq!(Provenance::new("abc").config_sha256, "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }
}
