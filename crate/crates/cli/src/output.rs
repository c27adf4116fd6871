//! CSV tables and JSON summaries.
//!
//! Floats are written with 17 significant digits so tables round-trip
//! exactly. Nothing time- or host-dependent goes into a file, so a rerun
//! with the same configuration reproduces every byte.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::RunConfig;
use crate::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    pub fn render(&self) -> String {
        match self {
            Cell::Num(x) => format_float(*x),
            Cell::Int(k) => k.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(k: usize) -> Self {
        Cell::Int(k as i64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Text(if b { "PASS" } else { "FAIL" }.to_string())
    }
}

/// 17 significant digits in scientific notation; `nan`/`inf` spelled out.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub headers: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, headers: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            headers: headers.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::CRLF)
            .from_writer(Vec::new());
        w.write_record(&self.headers).map_err(io_err)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render)).map_err(io_err)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

fn io_err(e: csv::Error) -> CliError {
    CliError::Io(e.to_string())
}

/// The JSON summary every command writes next to its tables.
#[derive(Debug, Clone, Serialize)]
pub struct Summary<T: Serialize> {
    pub command: String,
    pub version: String,
    pub config: RunConfig,
    pub passed: bool,
    pub results: T,
}

impl<T: Serialize> Summary<T> {
    pub fn new(command: &str, config: &RunConfig, passed: bool, results: T) -> Self {
        Self {
            command: command.to_string(),
            version: VERSION.to_string(),
            config: config.clone(),
            passed,
            results,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("summary serializes");
        s.push('\n');
        s
    }
}

pub struct OutputDir {
    root: PathBuf,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(root).map_err(|e| CliError::Io(format!("{}: {e}", root.display())))?;
        Ok(Self { root: root.to_path_buf() })
    }

    pub fn path(&self) -> &Path {
        &self.root
    }

    pub fn write(&self, file: &str, contents: &str) -> Result<PathBuf, CliError> {
        let path = self.root.join(file);
        fs::write(&path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Ok(path)
    }

    pub fn write_table(&self, table: &Table) -> Result<PathBuf, CliError> {
        self.write(&format!("{}.csv", table.name), &table.to_csv()?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(format_float(-1e-300).parse::<f64>().unwrap(), -1e-300);
        let x = 0.1 + 0.2;
        assert_eq!(format_float(x).parse::<f64>().unwrap(), x);
        assert_eq!(format_float(f64::NAN), "nan");
    }

    #[test]
    fn csv_quotes_per_rfc4180() {
        let mut t = Table::new("t", &["name", "value"]);
        t.push(vec!["a,b \"c\"".into(), 1.5.into()]);
        let csv = t.to_csv().unwrap();
        assert_eq!(csv, "name,value\r\n\"a,b \"\"c\"\"\",1.5000000000000000e0\r\n");
    }
}
