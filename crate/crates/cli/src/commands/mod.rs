//! The six subcommand pipelines. Each one parses its strict config, runs
//! the corresponding library stage, writes its output tables plus a
//! `manifest.toml` into the output directory, and prints one summary line
//! per artifact. All output is deterministic given config + seed.

pub mod analyze;
pub mod simulate;
pub mod solve;
pub mod solve_het;
pub mod synth;
pub mod verify;

use std::path::{Path, PathBuf};

use barter_core::error::{Error, Result};
use barter_core::export::write_file;

/// Output-directory handle: creates the directory up front and logs every
/// file it writes.
pub struct OutDir {
    dir: PathBuf,
}

impl OutDir {
    pub fn create(dir: &Path) -> Result<OutDir> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
        Ok(OutDir { dir: dir.to_path_buf() })
    }

    pub fn write(&self, name: &str, content: &str) -> Result<()> {
        let path = self.dir.join(name);
        write_file(&path, content)?;
        println!("wrote {}", path.display());
        Ok(())
    }
}

/// Serializes a per-command report struct to TOML.
pub fn toml_string<T: serde::Serialize>(value: &T) -> Result<String> {
    toml::to_string(value).map_err(|e| Error::config(format!("report serialization: {e}")))
}
