use std::path::{Path, PathBuf};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::error::CliResult;

pub const MANIFEST_FORMAT_VERSION: u32 = 1;

/// Record of one invocation, written next to its outputs.
///
/// `config` echoes every flag, so `argv` can be rebuilt from it alone.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub format_version: u32,
    pub command: String,
    pub argv: Vec<String>,
    pub config: serde_json::Value,
    pub seed: Option<u64>,
    pub library_version: String,
    pub started_unix_ms: u128,
    pub wall_clock_ms: f64,
    pub outputs: Vec<PathBuf>,
}

impl RunManifest {
    pub fn new(command: &str, config: serde_json::Value, seed: Option<u64>) -> RunManifest {
        RunManifest {
            format_version: MANIFEST_FORMAT_VERSION,
            command: command.into(),
            argv: std::env::args().collect(),
            config,
            seed,
            library_version: env!("CARGO_PKG_VERSION").into(),
            started_unix_ms: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .unwrap_or(Duration::ZERO)
                .as_millis(),
            wall_clock_ms: 0.0,
            outputs: Vec::new(),
        }
    }

    pub fn finish(&mut self, elapsed: Duration, outputs: Vec<PathBuf>) {
        self.wall_clock_ms = elapsed.as_secs_f64() * 1e3;
        self.outputs = outputs;
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }
}

/// `out.json` -> `out.json.manifest.json`.
pub fn manifest_path(output: &Path) -> PathBuf {
    let mut name = output.file_name().map(|s| s.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    output.with_file_name(name)
}
