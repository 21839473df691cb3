//! CSV tables and JSON result records.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::Context;
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;

/// Fixed-format table: `{:.16e}` for every value (17 significant digits),
/// `\n` line endings.
pub struct Table {
    columns: Vec<&'static str>,
    body: String,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        let mut body = columns.join(",");
        body.push('\n');
        Self { columns: columns.to_vec(), body }
    }

    pub fn row(&mut self, values: &[f64]) {
        assert_eq!(values.len(), self.columns.len(), "row width");
        for (k, v) in values.iter().enumerate() {
            if k > 0 {
                self.body.push(',');
            }
            write!(self.body, "{v:.16e}").expect("writing to a String");
        }
        self.body.push('\n');
    }

    pub fn write(&self, path: &Path) -> anyhow::Result<()> {
        std::fs::write(path, &self.body).with_context(|| format!("cannot write {}", path.display()))
    }
}

#[derive(Debug, Serialize)]
pub struct ResultRecord<'a> {
    pub run_id: String,
    pub command: &'a str,
    pub version: &'static str,
    pub config: &'a RunConfig,
    pub result: Value,
    pub warnings: Vec<String>,
    pub wall_clock_s: f64,
}

/// SHA-256 over the command, library version and resolved config.
pub fn run_id(command: &str, config: &RunConfig) -> String {
    let mut h = Sha256::new();
    h.update(command.as_bytes());
    h.update([0]);
    h.update(env!("CARGO_PKG_VERSION").as_bytes());
    h.update([0]);
    h.update(serde_json::to_vec(config).expect("config serializes"));
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

pub fn record<'a>(command: &'a str, config: &'a RunConfig, result: Value, warnings: Vec<String>, elapsed: Duration) -> ResultRecord<'a> {
    ResultRecord {
        run_id: run_id(command, config),
        command,
        version: env!("CARGO_PKG_VERSION"),
        config,
        result,
        warnings,
        wall_clock_s: elapsed.as_secs_f64(),
    }
}

pub fn write_json(path: &Path, value: &impl Serialize) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

pub struct OutDir(PathBuf);

impl OutDir {
    pub fn create(path: &Path) -> anyhow::Result<Self> {
        std::fs::create_dir_all(path).with_context(|| format!("cannot create {}", path.display()))?;
        Ok(Self(path.to_path_buf()))
    }

    pub fn file(&self, name: &str) -> PathBuf {
        self.0.join(name)
    }
}
