//! Tabular results and their metadata sidecar.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Int(i64),
    Real(f64),
    Empty,
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Real(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Real)
    }
}

impl From<Option<usize>> for Cell {
    fn from(v: Option<usize>) -> Self {
        v.map_or(Cell::Empty, Cell::from)
    }
}

/// A default the run used below the paper's scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Shrink {
    pub parameter: String,
    pub paper: f64,
    pub used: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub table: String,
    pub experiment: String,
    pub columns: Vec<String>,
    pub rows: usize,
    /// Hex SHA-256 of `config`.
    pub config_hash: String,
    pub seed: u64,
    pub wall_time_s: f64,
    pub version: String,
    pub workers: usize,
    pub shrunk_defaults: Vec<Shrink>,
    /// The resolved config, as canonical TOML.
    pub config: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub name: String,
    pub columns: Vec<String>,
    rows: Vec<Vec<Cell>>,
}

impl ResultTable {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self { name: name.to_string(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    /// Appends a row; panics if its width does not match the schema.
    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the schema of {}", self.name);
        self.rows.push(row);
    }

    pub fn rows(&self) -> &[Vec<Cell>] {
        &self.rows
    }

    pub fn column(&self, name: &str) -> Option<Vec<Cell>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    /// Comma-separated, header row, `.` decimals, LF line endings. Reals use
    /// the shortest representation that round-trips.
    pub fn to_csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for row in &self.rows {
            for (k, cell) in row.iter().enumerate() {
                if k > 0 {
                    s.push(',');
                }
                match cell {
                    Cell::Int(v) => write!(s, "{v}").unwrap(),
                    Cell::Real(v) => write!(s, "{v:?}").unwrap(),
                    Cell::Empty => {}
                }
            }
            s.push('\n');
        }
        s
    }

    /// Writes `<dir>/<name>.csv` and `<dir>/<name>.meta.json`.
    pub fn write(&self, dir: &Path, meta: &Metadata) -> Result<(PathBuf, PathBuf)> {
        let csv = dir.join(format!("{}.csv", self.name));
        let json = dir.join(format!("{}.meta.json", self.name));
        std::fs::write(&csv, self.to_csv()).map_err(HarnessError::io(&csv))?;
        let text = serde_json::to_string_pretty(meta).expect("metadata serializes");
        std::fs::write(&json, text + "\n").map_err(HarnessError::io(&json))?;
        Ok((csv, json))
    }
}
