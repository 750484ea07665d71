//! CSV tables and run-directory bookkeeping.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use crossnav_core::dynamics::Trajectory;
use crossnav_core::numfmt::format_number;

#[derive(Debug, thiserror::Error)]
pub enum OutputError {
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("column `{column}` holds a non-finite value ({value}) in {path}")]
    NonFinite { path: PathBuf, column: String, value: f64 },
}

/// A cell is either a number (written in shortest round-trip form) or text.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: impl IntoIterator<Item = impl Into<String>>) -> Self {
        Self { header: header.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// Render with `\n` line endings; NaN and infinities are rejected.
    pub fn render(&self, path: &Path) -> Result<String, OutputError> {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let mut fields = Vec::with_capacity(row.len());
            for (cell, column) in row.iter().zip(&self.header) {
                fields.push(match cell {
                    Cell::Num(x) if !x.is_finite() => {
                        return Err(OutputError::NonFinite { path: path.to_path_buf(), column: column.clone(), value: *x })
                    }
                    Cell::Num(x) => format_number(*x),
                    Cell::Text(s) => s.clone(),
                });
            }
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        Ok(out)
    }
}

pub fn trajectory_table(traj: &Trajectory, dim: usize) -> Table {
    let mut header: Vec<String> = ["t", "tau", "lambda", "fidelity", "purity"].map(String::from).to_vec();
    header.extend((1..=dim).map(|k| format!("p_{k}")));
    header.extend(["trace_error", "min_eig"].map(String::from));
    let mut table = Table::new(header);
    for p in &traj.points {
        let mut row: Vec<Cell> = [p.t, p.tau, p.lambda, p.fidelity, p.purity].map(Cell::Num).to_vec();
        row.extend(p.populations.iter().map(|x| Cell::Num(*x)));
        row.extend([Cell::Num(p.trace_error), Cell::Num(p.min_eigenvalue)]);
        table.push(row);
    }
    table
}

/// Files written by one run, removed again if the run fails.
#[derive(Debug)]
pub struct RunDir {
    root: PathBuf,
    written: Vec<PathBuf>,
}

impl RunDir {
    pub fn create(root: &Path) -> Result<Self, OutputError> {
        fs::create_dir_all(root).map_err(|source| OutputError::Io { path: root.to_path_buf(), source })?;
        Ok(Self { root: root.to_path_buf(), written: Vec::new() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn write_text(&mut self, name: &str, text: &str) -> Result<PathBuf, OutputError> {
        let path = self.path(name);
        fs::write(&path, text).map_err(|source| OutputError::Io { path: path.clone(), source })?;
        if !self.written.contains(&path) {
            self.written.push(path.clone());
        }
        Ok(path)
    }

    pub fn write_table(&mut self, name: &str, table: &Table) -> Result<PathBuf, OutputError> {
        let text = table.render(&self.path(name))?;
        self.write_text(name, &text)
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    /// Delete everything this run wrote.
    pub fn discard(self) {
        for path in &self.written {
            let _ = fs::remove_file(path);
        }
    }
}
