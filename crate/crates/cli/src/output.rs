//! CSV tables, the JSON manifest and the report directory layout.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

use crate::config::ExperimentConfig;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Bool(bool),
    Text(String),
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_owned())
    }
}

impl Cell {
    pub fn as_f64(&self) -> Option<f64> {
        match *self {
            Cell::Int(v) => Some(v as f64),
            Cell::Float(v) => Some(v),
            Cell::Bool(v) => Some(f64::from(u8::from(v))),
            Cell::Text(_) => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match *self {
            Cell::Bool(v) => Some(v),
            _ => None,
        }
    }

    fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format_float(*v),
            Cell::Bool(v) => v.to_string(),
            Cell::Text(s) if s.contains([',', '"', '\n']) => {
                format!("\"{}\"", s.replace('"', "\"\""))
            }
            Cell::Text(s) => s.clone(),
        }
    }
}

/// Shortest `%g`-style rendering with 12 significant digits.
pub fn format_float(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return if v.is_nan() {
            "nan".into()
        } else if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{v:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp) as usize;
        trim_zeros(format!("{v:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_owned()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_owned()
    } else {
        s
    }
}

/// One CSV file: fixed header, one `Vec<Cell>` per row.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: impl Into<String>, header: &[&'static str]) -> Self {
        Self {
            name: name.into(),
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.header.len(), "row width for {}", self.name);
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> usize {
        self.header
            .iter()
            .position(|h| *h == name)
            .unwrap_or_else(|| panic!("{} has no column {name}", self.name))
    }

    /// Rows whose `column` holds a value equal to `value`.
    pub fn filter(
        &self,
        column: &str,
        value: impl Into<Cell>,
    ) -> impl Iterator<Item = &Vec<Cell>> + '_ {
        let c = self.column(column);
        let value = value.into();
        self.rows.iter().filter(move |r| r[c] == value)
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::render).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Audit {
    /// Moment-based verdicts compared with the dense oracle.
    pub checked: usize,
    /// Moment-based detections the dense oracle does not confirm.
    pub false_positives: usize,
}

impl Audit {
    pub fn merge(&mut self, other: &Audit) {
        self.checked += other.checked;
        self.false_positives += other.false_positives;
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FileEntry {
    pub name: String,
    pub rows: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub experiment: &'static str,
    pub version: &'static str,
    pub library_version: &'static str,
    pub seed: u64,
    pub threads: usize,
    pub started_unix_s: u64,
    pub wall_time_s: f64,
    pub config: ExperimentConfig,
    pub files: Vec<FileEntry>,
    pub audit: Option<Audit>,
    pub summary: serde_json::Value,
}

/// Everything an experiment produced, before it is written out.
#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub tables: Vec<Table>,
    /// `(file name, SVG document)`.
    pub plots: Vec<(String, String)>,
    pub audit: Option<Audit>,
    pub summary: serde_json::Value,
}

impl ExperimentOutput {
    pub fn table(&self, name: &str) -> &Table {
        self.tables
            .iter()
            .find(|t| t.name == name)
            .unwrap_or_else(|| panic!("no table {name}"))
    }
}

/// Writes `<name>.csv` for each table, the plots and `manifest.json`.
pub fn write_report(
    dir: &Path,
    output: &ExperimentOutput,
    manifest: &Manifest,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut written = Vec::new();
    for table in &output.tables {
        let path = dir.join(format!("{}.csv", table.name));
        fs::write(&path, table.to_csv()).with_context(|| format!("writing {}", path.display()))?;
        written.push(path);
    }
    for (name, svg) in &output.plots {
        let path = dir.join(name);
        fs::write(&path, svg).with_context(|| format!("writing {}", path.display()))?;
        written.push(path);
    }
    let path = dir.join("manifest.json");
    fs::write(&path, serde_json::to_string_pretty(manifest)? + "\n")
        .with_context(|| format!("writing {}", path.display()))?;
    written.push(path);
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_use_twelve_significant_digits() {
        assert_eq!(format_float(0.0), "0");
        assert_eq!(format_float(1.0), "1");
        assert_eq!(format_float(-0.25), "-0.25");
        assert_eq!(format_float(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_float(2.0 / 3.0 * 1e5), "66666.6666667");
        assert_eq!(format_float(4.0 / 15.0), "0.266666666667");
        assert_eq!(format_float(1.5e-9), "1.5e-9");
        assert_eq!(format_float(-3.6e-12), "-3.6e-12");
        assert_eq!(format_float(123456789012345.0), "1.23456789012e14");
        assert_eq!(format_float(999999999999.5), "1e12");
    }

    #[test]
    fn csv_quotes_text_with_commas() {
        let mut t = Table::new("t", &["a", "b", "c"]);
        t.push(vec![
            Cell::from("x,y"),
            Cell::from(2usize),
            Cell::from(true),
        ]);
        assert_eq!(t.to_csv(), "a,b,c\n\"x,y\",2,true\n");
        assert_eq!(t.filter("b", 2usize).count(), 1);
    }
}
