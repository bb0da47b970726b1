use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Serialize;

use crate::error::CliError;

/// Written as `manifest.json` next to every command's outputs.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config_path: Option<PathBuf>,
    pub out_dir: PathBuf,
    /// No command draws random numbers; kept for schema stability.
    pub seed: Option<u64>,
    pub version: String,
    pub duration_s: f64,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str, config: Option<&Path>, out: &Path, files: &[PathBuf], elapsed: Duration) -> Self {
        Self {
            command: command.to_string(),
            config_path: config.map(Path::to_path_buf),
            out_dir: out.to_path_buf(),
            seed: None,
            version: env!("CARGO_PKG_VERSION").to_string(),
            duration_s: elapsed.as_secs_f64(),
            outputs: files
                .iter()
                .filter_map(|f| f.file_name().map(|n| n.to_string_lossy().into_owned()))
                .collect(),
        }
    }

    pub fn write(&self, out: &Path) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(out.join("manifest.json"), text + "\n")?;
        Ok(())
    }
}
