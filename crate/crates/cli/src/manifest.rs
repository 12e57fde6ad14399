//! Run manifest: resolved config snapshot, input/output SHA-256 digests,
//! and per-window status. Written as pretty JSON with sorted keys so two
//! identical runs produce identical digest maps.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub artifact_version: String,
    pub created_utc: String,
    pub command: String,
    pub config: serde_json::Value,
    /// Input file name -> SHA-256 hex digest.
    pub inputs: BTreeMap<String, String>,
    /// Output file name (relative to the run directory) -> SHA-256 hex.
    pub outputs: BTreeMap<String, String>,
    pub windows: Vec<WindowStatus>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct WindowStatus {
    pub index: usize,
    pub start: String,
    pub end: String,
    pub status: String,
}

pub fn sha256_hex(path: &Path) -> Result<String, CliError> {
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::io(format!("digesting {}", path.display()), e))?;
    let digest = Sha256::digest(&bytes);
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

/// Digests every listed output file (relative to `dir`) and writes
/// manifest.json there.
pub fn write_manifest(
    dir: &Path,
    command: &str,
    config: serde_json::Value,
    inputs: &[(String, String)],
    output_files: &[String],
    windows: Vec<WindowStatus>,
) -> Result<(), CliError> {
    let mut outputs = BTreeMap::new();
    for name in output_files {
        outputs.insert(name.clone(), sha256_hex(&dir.join(name))?);
    }
    let manifest = Manifest {
        artifact_version: env!("CARGO_PKG_VERSION").to_string(),
        created_utc: chrono::Utc::now().to_rfc3339(),
        command: command.to_string(),
        config,
        inputs: inputs.iter().cloned().collect(),
        outputs,
        windows,
    };
    let json = serde_json::to_string_pretty(&manifest)
        .map_err(|e| CliError::Usage(format!("manifest serialization: {e}")))?;
    std::fs::write(dir.join(MANIFEST_FILE), json + "\n")
        .map_err(|e| CliError::io("writing manifest.json", e))?;
    Ok(())
}

pub fn read_manifest(dir: &Path) -> Result<Manifest, CliError> {
    let path = dir.join(MANIFEST_FILE);
    let text = std::fs::read_to_string(&path)
        .map_err(|e| CliError::io(format!("reading {}", path.display()), e))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("manifest {}: {e}", path.display())))
}
