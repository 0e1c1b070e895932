//! CSV formatting, run manifests and atomic file output.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

pub const TOOL_NAME: &str = "weakspin";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// First line of every CSV file: tool, schema version, scenario and config hash.
pub fn csv_header(schema: &str, scenario: &str, config_hash: &str) -> String {
    format!("# {TOOL_NAME} {TOOL_VERSION} schema={schema} scenario={scenario} config_hash={config_hash}\n")
}

/// Full-precision number cell.
pub fn num(x: f64) -> String {
    format!("{x:.15e}")
}

/// Short number cell for residual-like columns.
pub fn short(x: f64) -> String {
    format!("{x:.3e}")
}

#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub scenario: String,
    pub config_hash: String,
    pub tool_version: String,
    pub timestamp: String,
    pub outputs: Vec<PathBuf>,
}

impl RunManifest {
    pub fn new(scenario: &str, config_hash: &str, outputs: Vec<PathBuf>) -> Self {
        RunManifest {
            scenario: scenario.to_string(),
            config_hash: config_hash.to_string(),
            tool_version: TOOL_VERSION.to_string(),
            timestamp: chrono::Utc::now().to_rfc3339(),
            outputs,
        }
    }
}

/// Sidecar path holding the manifest for a given output file.
pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(|s| s.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    out.with_file_name(name)
}

/// Writes through a temporary sibling and renames it into place.
pub fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let mut tmp_name = path.file_name().map(|s| s.to_os_string()).unwrap_or_default();
    tmp_name.push(".tmp");
    let tmp = path.with_file_name(tmp_name);
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}
