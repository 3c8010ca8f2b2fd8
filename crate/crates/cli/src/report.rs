//! Number formatting and artifact writers.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::CliError;

/// Shortest representation that parses back to the same `f64`.
pub fn exact(x: f64) -> String {
    format!("{x}")
}

/// Six significant digits, fixed notation for moderate magnitudes.
pub fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let rounded: f64 = format!("{x:.5e}").parse().expect("valid float");
    let exp = rounded.abs().log10().floor() as i32;
    if (-5..6).contains(&exp) {
        format!("{:.*}", (5 - exp) as usize, rounded)
    } else {
        format!("{x:.5e}")
    }
}

/// Column-aligned table for the terminal.
pub fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut width: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        for (w, cell) in width.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let line = |cells: Vec<&str>| {
        cells
            .iter()
            .zip(&width)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect::<Vec<_>>()
            .join("  ")
            .trim_end()
            .to_string()
    };
    let mut out = line(header.to_vec());
    out.push('\n');
    for row in rows {
        out.push_str(&line(row.iter().map(String::as_str).collect()));
        out.push('\n');
    }
    out
}

/// Collects the files written by one run.
#[derive(Debug)]
pub struct Artifacts {
    dir: PathBuf,
    written: Vec<String>,
}

fn io(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

impl Artifacts {
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn written(&self) -> &[String] {
        &self.written
    }

    pub fn csv(
        &mut self,
        name: &str,
        header: &[&str],
        rows: &[Vec<String>],
    ) -> Result<(), CliError> {
        let path = self.dir.join(name);
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_path(&path)
            .map_err(|e| io(&path, e))?;
        w.write_record(header).map_err(|e| io(&path, e))?;
        for row in rows {
            w.write_record(row).map_err(|e| io(&path, e))?;
        }
        w.flush().map_err(|e| io(&path, e))?;
        self.written.push(name.to_string());
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let path = self.dir.join(name);
        let mut text = serde_json::to_string_pretty(value).map_err(|e| io(&path, e))?;
        text.push('\n');
        fs::write(&path, text).map_err(|e| io(&path, e))?;
        self.written.push(name.to_string());
        Ok(())
    }
}

/// Provenance record written next to every run's artifacts.
#[derive(Debug, Serialize)]
pub struct Manifest<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'a str,
    pub scenario_name: &'a str,
    pub scenario_path: String,
    pub scenario_sha256: &'a str,
    pub threads: usize,
    pub wall_time_seconds: f64,
    pub artifacts: &'a [String],
}
