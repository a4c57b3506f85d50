//! Report envelope shared by every subcommand: config hash, seed, module
//! versions. Serialization is struct-ordered and floats print in shortest
//! round-trip form, so identical runs produce byte-identical files.

use edgeflow_core::Result;
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::path::Path;

#[derive(Debug, Clone, Serialize)]
pub struct Versions {
    pub core: &'static str,
    pub cli: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct Envelope<T: Serialize> {
    pub config_sha256: String,
    pub seed: u64,
    pub versions: Versions,
    pub body: T,
}

pub fn versions() -> Versions {
    Versions {
        core: edgeflow_core_version(),
        cli: env!("CARGO_PKG_VERSION"),
    }
}

fn edgeflow_core_version() -> &'static str {
    // the core crate version travels with this binary's lockstep workspace
    env!("CARGO_PKG_VERSION")
}

pub fn config_hash(raw: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(raw.as_bytes());
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn write_json<T: Serialize>(path: &Path, raw_config: &str, seed: u64, body: T) -> Result<()> {
    let envelope = Envelope {
        config_sha256: config_hash(raw_config),
        seed,
        versions: versions(),
        body,
    };
    let mut text = serde_json::to_string_pretty(&envelope)
        .map_err(|e| edgeflow_core::EdgeflowError::Validation(format!("serialization: {e}")))?;
    text.push('\n');
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, text)?;
    Ok(())
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, text)?;
    Ok(())
}
