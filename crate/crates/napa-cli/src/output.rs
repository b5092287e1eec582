//! Deterministic CSV emission: fixed column order, row order given by
//! the caller, floats printed with Rust's shortest-roundtrip `Display`
//! (no locale, no wall-clock anywhere near data files).

use std::fs;
use std::path::{Path, PathBuf};

use crate::commands::{CmdError, CmdResult};

pub struct CsvWriter {
    header: String,
    rows: Vec<String>,
}

impl CsvWriter {
    pub fn new(columns: &[&str]) -> Self {
        CsvWriter {
            header: columns.join(","),
            rows: Vec::new(),
        }
    }

    pub fn row(&mut self, fields: &[String]) {
        self.rows.push(fields.join(","));
    }

    pub fn to_string(&self) -> String {
        let mut s = String::with_capacity(64 * (self.rows.len() + 1));
        s.push_str(&self.header);
        s.push('\n');
        for r in &self.rows {
            s.push_str(r);
            s.push('\n');
        }
        s
    }

    pub fn write(&self, dir: &Path, name: &str) -> CmdResult {
        write_file(&dir.join(name), &self.to_string())
    }
}

pub fn ensure_dir(dir: &Path) -> CmdResult {
    fs::create_dir_all(dir)
        .map_err(|e| CmdError::Input(format!("cannot create {}: {e}", dir.display())))
}

pub fn write_file(path: &PathBuf, content: &str) -> CmdResult {
    fs::write(path, content)
        .map_err(|e| CmdError::Input(format!("cannot write {}: {e}", path.display())))
}

/// `f64` rendered for CSV: shortest representation that round-trips.
pub fn num(x: f64) -> String {
    format!("{x}")
}
