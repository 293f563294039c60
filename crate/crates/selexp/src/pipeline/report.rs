//! Versioned structured-text experiment reports.
//!
//! A report is top-level `key = value` metadata followed by named columnar
//! tables. Every value is written with Rust's shortest round-trip float
//! formatting, so a report is a pure function of (inputs, config) and can be
//! compared byte for byte. Tables can additionally be mirrored to one CSV
//! file each for plotting tools.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

pub const REPORT_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: impl Into<String>, columns: &[&str]) -> Self {
        Table {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push_row(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub meta: Vec<(String, String)>,
    pub tables: Vec<Table>,
    pub warnings: Vec<String>,
}

impl Report {
    pub fn push_meta(&mut self, key: impl Into<String>, value: impl ToString) {
        self.meta.push((key.into(), value.to_string()));
    }

    pub fn warn(&mut self, message: impl Into<String>) {
        self.warnings.push(message.into());
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn meta_value(&self, key: &str) -> Option<&str> {
        self.meta
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str("# selexp experiment report\n");
        for (key, value) in &self.meta {
            out.push_str(key);
            out.push_str(" = ");
            out.push_str(value);
            out.push('\n');
        }
        for (i, warning) in self.warnings.iter().enumerate() {
            out.push_str(&format!("warning.{i} = {warning}\n"));
        }
        for table in &self.tables {
            out.push('\n');
            out.push_str(&format!("[table {}]\n", table.name));
            out.push_str(&table.columns.join(","));
            out.push('\n');
            for row in &table.rows {
                out.push_str(&row.join(","));
                out.push('\n');
            }
        }
        out
    }

    /// Writes `report.txt` (and one CSV per table when `csv` is set) under
    /// `dir`, creating it if needed. Returns the report path.
    pub fn write(&self, dir: &Path, csv: bool) -> io::Result<PathBuf> {
        fs::create_dir_all(dir)?;
        let report_path = dir.join("report.txt");
        fs::write(&report_path, self.render())?;
        if csv {
            for table in &self.tables {
                let mut out = String::new();
                out.push_str(&table.columns.join(","));
                out.push('\n');
                for row in &table.rows {
                    out.push_str(&row.join(","));
                    out.push('\n');
                }
                fs::write(dir.join(format!("{}.csv", table.name)), out)?;
            }
        }
        Ok(report_path)
    }
}

/// Shortest round-trip decimal form; stable across runs and platforms.
pub fn fmt_f64(x: f64) -> String {
    format!("{x}")
}
