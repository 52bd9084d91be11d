//! Run manifests: what was run, with which resolved configuration and seeds.
//!
//! Each subcommand writes one `manifest.json` next to its outputs. The
//! manifest is the only output that carries wall-clock time; everything else
//! is a pure function of the inputs and the manifest's configuration.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::data::write_text;
use crate::error::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timestamps {
    /// Milliseconds since the Unix epoch.
    pub started_unix_ms: u64,
    pub finished_unix_ms: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub tool_version: String,
    pub config_snapshot: serde_json::Value,
    pub seeds: Vec<u64>,
    pub inputs: Vec<PathBuf>,
    /// Output files, relative to the manifest's directory.
    pub outputs: Vec<PathBuf>,
    pub timestamps: Timestamps,
}

fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

impl RunManifest {
    /// Starts a manifest; `config` is the fully resolved configuration.
    pub fn start<C: Serialize>(subcommand: &str, config: &C, inputs: Vec<PathBuf>) -> Result<Self> {
        let config_snapshot = serde_json::to_value(config)
            .map_err(|e| Error::Config(format!("cannot serialize configuration: {e}")))?;
        Ok(Self {
            subcommand: subcommand.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            config_snapshot,
            seeds: Vec::new(),
            inputs,
            outputs: Vec::new(),
            timestamps: Timestamps {
                started_unix_ms: now_ms(),
                finished_unix_ms: None,
            },
        })
    }

    /// Records an output path, stored relative to `out_dir` when inside it.
    pub fn output(&mut self, out_dir: &Path, path: &Path) {
        let rel = path.strip_prefix(out_dir).unwrap_or(path).to_path_buf();
        self.outputs.push(rel);
    }

    /// Stamps the end time and writes `manifest.json` into `out_dir`.
    pub fn finish(mut self, out_dir: &Path) -> Result<PathBuf> {
        self.timestamps.finished_unix_ms = Some(now_ms());
        let path = out_dir.join(MANIFEST_FILE);
        let mut text = serde_json::to_string_pretty(&self)
            .map_err(|e| Error::Config(format!("cannot serialize manifest: {e}")))?;
        text.push('\n');
        write_text(&path, &text)?;
        Ok(path)
    }
}
