use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use taxgan_core::fnv1a64;

use crate::error::CliError;

/// Record of one command run: the fully resolved configuration, every input
/// and output path, and a content hash per written artifact. Re-running the
/// same command from a manifest (`taxgan replay`) reproduces the hashes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub seed: u64,
    pub config: serde_json::Value,
    pub inputs: BTreeMap<String, PathBuf>,
    pub outputs: BTreeMap<String, PathBuf>,
    pub artifact_hashes: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn new(command: &str, seed: u64, config: serde_json::Value) -> Self {
        Self {
            command: command.to_string(),
            seed,
            config,
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
            artifact_hashes: BTreeMap::new(),
        }
    }

    pub fn record_input(&mut self, name: &str, path: &Path) {
        self.inputs.insert(name.to_string(), path.to_path_buf());
    }

    /// Record an output file and fingerprint its bytes.
    pub fn record_output(&mut self, name: &str, path: &Path) -> Result<(), CliError> {
        let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
        self.outputs.insert(name.to_string(), path.to_path_buf());
        self.artifact_hashes
            .insert(name.to_string(), format!("{:016x}", fnv1a64(&bytes)));
        Ok(())
    }

    /// Write the manifest itself as `manifest_<command>.json` in `dir`.
    pub fn save(&self, dir: &Path) -> Result<PathBuf, CliError> {
        let path = dir.join(format!("manifest_{}.json", self.command));
        let text = serde_json::to_string_pretty(self)
            .map_err(|e| CliError::Data(format!("manifest serialize: {e}")))?;
        std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Data(format!("{}: manifest parse: {e}", path.display())))
    }
}

/// Create `dir` (and parents) if missing.
pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::io(path, e))
}
