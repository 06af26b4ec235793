//! Versioned JSON reports and CSV tables.

use std::fs;
use std::io;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use super::config::{ExperimentConfig, Mode};

pub const SCHEMA_VERSION: u32 = 1;

/// Top-level report. `generated_at_unix` is informational and the only field
/// that differs between identical runs.
#[derive(Debug, Serialize)]
pub struct Report<'a, T: Serialize> {
    pub schema_version: u32,
    pub generated_at_unix: u64,
    pub mode: Mode,
    pub seed: u64,
    pub config: &'a ExperimentConfig,
    /// CSV files written alongside, relative to the output directory.
    pub tables: Vec<String>,
    pub result: T,
}

impl<'a, T: Serialize> Report<'a, T> {
    pub fn new(config: &'a ExperimentConfig, tables: Vec<String>, result: T) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            generated_at_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            mode: config.mode,
            seed: config.seed,
            config,
            tables,
            result,
        }
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> io::Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(io::Error::other)?;
    text.push('\n');
    fs::write(path, text)
}

/// Writes a header row and records; fields are written as given.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> io::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(io::Error::other)?;
    w.write_record(header).map_err(io::Error::other)?;
    for r in rows {
        w.write_record(r).map_err(io::Error::other)?;
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_uses_lf_and_header() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        write_csv(&p, &["x", "y"], &[vec!["0.5".into(), "1".into()]]).unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "x,y\n0.5,1\n");
    }

    #[test]
    fn report_has_schema_fields() {
        let cfg = ExperimentConfig::with_mode(Mode::Search);
        let r = Report::new(&cfg, vec![], 5u32);
        let v: serde_json::Value = serde_json::to_value(&r).unwrap();
        assert_eq!(v["schema_version"], 1);
        assert_eq!(v["mode"], "search");
        assert_eq!(v["result"], 5);
        assert!(v["generated_at_unix"].as_u64().unwrap() > 0);
        assert!(v["config"].get("out").is_none());
    }
}
