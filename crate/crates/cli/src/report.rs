//! Report envelopes and their JSON/CSV serialisation.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::{Format, RunConfig};

pub const VERSION: &str = concat!("npl ", env!("CARGO_PKG_VERSION"));

/// Top-level JSON document. Everything except `timestamp` is a function of
/// `config`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub config: RunConfig,
    pub version: String,
    pub timestamp: String,
    pub results: Value,
}

/// Flat view of a result set; the first row of the CSV is `header`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Table {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> csv::Result<Vec<u8>> {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(&self.header)?;
        for row in &self.rows {
            writer.write_record(row)?;
        }
        writer.into_inner().map_err(|e| e.into_error().into())
    }
}

impl Report {
    pub fn new(config: RunConfig, results: Value) -> Self {
        Report {
            config,
            version: VERSION.to_string(),
            timestamp: chrono::Utc::now().to_rfc3339(),
            results,
        }
    }

    pub fn to_json(&self) -> String {
        let mut text =
            serde_json::to_string_pretty(self).expect("report values are finite or null");
        text.push('\n');
        text
    }

    /// Sidecar path holding the JSON envelope of a CSV report.
    pub fn sidecar_path(csv_path: &Path) -> PathBuf {
        let mut name = csv_path.as_os_str().to_owned();
        name.push(".json");
        PathBuf::from(name)
    }

    /// Writes the report in `config.format`.
    ///
    /// JSON goes to `output_path` or stdout. CSV goes to `output_path` or
    /// stdout; with a path, the JSON envelope is also written next to it as
    /// `<output_path>.json`. Returns the files written.
    pub fn emit(&self, table: &Table) -> io::Result<Vec<PathBuf>> {
        let path = self.config.output_path.as_deref().map(Path::new);
        match (self.config.format, path) {
            (Format::Json, None) => {
                io::stdout().write_all(self.to_json().as_bytes())?;
                Ok(Vec::new())
            }
            (Format::Json, Some(path)) => {
                fs::write(path, self.to_json())?;
                Ok(vec![path.to_path_buf()])
            }
            (Format::Csv, None) => {
                io::stdout().write_all(&table.to_csv().map_err(io::Error::other)?)?;
                Ok(Vec::new())
            }
            (Format::Csv, Some(path)) => {
                fs::write(path, table.to_csv().map_err(io::Error::other)?)?;
                let sidecar = Self::sidecar_path(path);
                fs::write(&sidecar, self.to_json())?;
                Ok(vec![path.to_path_buf(), sidecar])
            }
        }
    }
}

/// Shortest text that parses back to the same float.
pub fn num(v: f64) -> String {
    format!("{v:?}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_has_header_even_when_empty() {
        let table = Table::new(&["a", "b"]);
        assert_eq!(String::from_utf8(table.to_csv().unwrap()).unwrap(), "a,b\n");
    }

    #[test]
    fn sidecar_appends_extension() {
        assert_eq!(
            Report::sidecar_path(Path::new("/tmp/out.csv")),
            PathBuf::from("/tmp/out.csv.json")
        );
    }
}
