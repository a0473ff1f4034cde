use std::path::{Path, PathBuf};

use crate::error::CliError;

/// A CSV file held as strings, with typed accessors.
#[derive(Debug, Clone)]
pub struct Table {
    pub path: PathBuf,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn read(path: &Path) -> Result<Self, CliError> {
        let mut reader = csv::Reader::from_path(path).map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => CliError::Input(format!("cannot read {}: {e}", path.display())),
            _ => CliError::Input(format!("{}: {e}", path.display())),
        })?;
        let header = reader
            .headers()
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?
            .iter()
            .map(str::to_string)
            .collect();
        let rows = reader
            .records()
            .map(|r| {
                r.map(|rec| rec.iter().map(str::to_string).collect())
                    .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
            })
            .collect::<Result<_, _>>()?;
        Ok(Table {
            path: path.to_path_buf(),
            header,
            rows,
        })
    }

    pub fn index(&self, name: &str) -> Result<usize, CliError> {
        self.header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::Input(format!("{}: no column `{name}`", self.path.display())))
    }

    pub fn number(&self, row: usize, col: usize) -> Result<f64, CliError> {
        let cell = &self.rows[row][col];
        cell.parse().map_err(|_| {
            CliError::Input(format!(
                "{}: line {}: `{cell}` is not a number",
                self.path.display(),
                row + 2
            ))
        })
    }

    pub fn column(&self, name: &str) -> Result<Vec<f64>, CliError> {
        let col = self.index(name)?;
        (0..self.rows.len()).map(|r| self.number(r, col)).collect()
    }
}
