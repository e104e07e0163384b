//! Run manifests: every command that writes artifacts drops a manifest.json
//! beside them recording what ran, a hash of the effective configuration,
//! and the files produced. Output paths are bare file names relative to the
//! manifest's own directory, so a run directory can be moved wholesale.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::errors::CliError;
use crate::io::SCHEMA_VERSION;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema: u32,
    pub command: String,
    /// SHA-256 of the canonical JSON of the effective configuration.
    pub config_hash: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub input_paths: Vec<String>,
    /// File names next to this manifest.
    pub output_paths: Vec<String>,
    pub tool_version: String,
    /// RFC 3339, UTC.
    pub timestamp: String,
}

impl RunManifest {
    pub fn new(
        command: &str,
        config_hash: String,
        seed: Option<u64>,
        input_paths: Vec<String>,
        output_paths: Vec<String>,
    ) -> Self {
        RunManifest {
            schema: SCHEMA_VERSION,
            command: command.to_string(),
            config_hash,
            seed,
            input_paths,
            output_paths,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        }
    }

    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        let body = serde_json::to_string_pretty(self)?;
        std::fs::write(dir.join(MANIFEST_FILE), body + "\n")?;
        Ok(())
    }
}

/// Hash of the serialized configuration; struct field order makes the JSON
/// canonical.
pub fn config_hash<T: Serialize>(config: &T) -> Result<String, CliError> {
    let bytes = serde_json::to_vec(config)?;
    let digest = Sha256::digest(&bytes);
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}
