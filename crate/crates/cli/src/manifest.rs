//! Run manifests: every command writes `manifest.toml` into its output
//! directory, echoing the full effective configuration (after any seed
//! override) and a SHA-256 content digest of each input file. A manifest
//! plus the tool version is sufficient to re-run the command exactly, and
//! it deliberately excludes anything irrelevant to the outputs (thread
//! counts, timestamps, host details) so re-runs stay byte-identical.

use std::path::Path;

use barter_core::error::{Error, Result};
use barter_core::export::sha256_hex;
use serde::Serialize;

/// One input file: where it was read from and what its bytes hashed to.
#[derive(Debug, Clone, Serialize)]
pub struct InputDigest {
    pub label: String,
    pub path: String,
    pub sha256: String,
}

/// Reads a file both for use and for fingerprinting.
pub fn read_input(label: &str, path: &Path) -> Result<(String, InputDigest)> {
    let text = barter_core::export::read_file(path)?;
    let digest = InputDigest {
        label: label.to_string(),
        path: path.display().to_string(),
        sha256: sha256_hex(text.as_bytes()),
    };
    Ok((text, digest))
}

#[derive(Serialize)]
struct Manifest<'a, C: Serialize> {
    command: &'a str,
    version: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    inputs: &'a [InputDigest],
    config: &'a C,
}

/// Renders the manifest document. The config echo is re-serialized from the
/// parsed struct, so defaulted fields appear with their effective values.
pub fn render<C: Serialize>(
    command: &str,
    config: &C,
    seed: Option<u64>,
    inputs: &[InputDigest],
) -> Result<String> {
    toml::to_string(&Manifest {
        command,
        version: env!("CARGO_PKG_VERSION"),
        seed,
        inputs,
        config,
    })
    .map_err(|e| Error::config(format!("manifest serialization: {e}")))
}
