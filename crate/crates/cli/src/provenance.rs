//! What every output file carries: tool version, resolved config hash, seed.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub tool_version: &'static str,
    pub config_hash: String,
    pub seed: u64,
}

impl Provenance {
    pub fn of(cfg: &ExperimentConfig) -> Self {
        Provenance { tool: "motionpulse", tool_version: TOOL_VERSION, config_hash: cfg.hash(), seed: cfg.seed }
    }
}

/// CSV text whose first line is
/// `# schema=<name>/<version> tool_version=… config_hash=… seed=…`.
pub struct CsvTable {
    text: String,
    width: usize,
}

impl CsvTable {
    pub fn new(schema: &str, prov: &Provenance, columns: &[&str]) -> Self {
        Self::with_notes(schema, prov, &[], columns)
    }

    /// Extra `key=value` notes are appended to the header line.
    pub fn with_notes(schema: &str, prov: &Provenance, notes: &[(&str, String)], columns: &[&str]) -> Self {
        let mut text = format!(
            "# schema={schema} tool_version={} config_hash={} seed={}",
            prov.tool_version, prov.config_hash, prov.seed
        );
        for (k, v) in notes {
            let _ = write!(text, " {k}={v}");
        }
        text.push('\n');
        text.push_str(&columns.join(","));
        text.push('\n');
        CsvTable { text, width: columns.len() }
    }

    pub fn row(&mut self, cells: &[String]) {
        assert_eq!(cells.len(), self.width, "row width does not match the header");
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
    }

    pub fn into_string(self) -> String {
        self.text
    }
}

/// Shortest decimal that round-trips to the same `f64`.
pub fn num(v: f64) -> String {
    format!("{v:?}")
}

/// JSON document with the provenance fields first.
pub fn json_document<T: Serialize>(schema: &str, prov: &Provenance, body: &T) -> String {
    #[derive(Serialize)]
    struct Doc<'a, T> {
        schema: &'a str,
        #[serde(flatten)]
        provenance: &'a Provenance,
        #[serde(flatten)]
        body: &'a T,
    }
    let mut s = serde_json::to_string_pretty(&Doc { schema, provenance: prov, body }).expect("report serializes");
    s.push('\n');
    s
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    std::fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

/// Writes the resolved config next to an output, as `<stem>.config.toml`.
pub fn echo_config(dir: &Path, stem: &str, cfg: &ExperimentConfig) -> Result<()> {
    let header = format!("# resolved configuration, config_hash={}\n", cfg.hash());
    write_file(&dir.join(format!("{stem}.config.toml")), &(header + &cfg.to_toml()))
}
