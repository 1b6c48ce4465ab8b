//! Output directory handling and the per-run manifest.

use crate::error::CliError;
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub command: String,
    /// First 64 bits of the SHA-256 of the resolved configuration, in hex.
    pub config_hash: String,
    /// Zero for commands that draw no random numbers.
    pub seed: u64,
    /// File names relative to the output directory, in write order.
    pub outputs: Vec<String>,
    pub versions: String,
}

/// 64-bit digest of the canonical JSON form of `config`.
pub fn config_hash<T: Serialize>(config: &T) -> u64 {
    let bytes = serde_json::to_vec(config).expect("resolved configs serialize");
    let digest = Sha256::digest(&bytes);
    let mut head = [0u8; 8];
    head.copy_from_slice(&digest[..8]);
    u64::from_be_bytes(head)
}

pub fn versions() -> String {
    format!("cwdiss {} (cwdiss-core {})", env!("CARGO_PKG_VERSION"), cwdiss_core::VERSION)
}

/// Writes files into one directory and remembers their names.
pub struct OutputDir {
    dir: PathBuf,
    written: Vec<String>,
}

impl OutputDir {
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })?;
        Ok(Self { dir: dir.to_path_buf(), written: Vec::new() })
    }

    pub fn write(&mut self, name: &str, body: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<(), CliError> {
        let path = self.dir.join(name);
        let io_err = |source| CliError::Io { path: path.clone(), source };
        let mut out = BufWriter::new(File::create(&path).map_err(io_err)?);
        body(&mut out).map_err(io_err)?;
        out.flush().map_err(io_err)?;
        self.written.push(name.to_string());
        Ok(())
    }

    /// Writes `<command>_manifest.json` listing everything written so far.
    pub fn finish<T: Serialize>(mut self, command: &str, config: &T, seed: u64) -> Result<RunManifest, CliError> {
        let manifest = RunManifest {
            command: command.to_string(),
            config_hash: format!("{:016x}", config_hash(config)),
            seed,
            outputs: self.written.clone(),
            versions: versions(),
        };
        self.write(&format!("{command}_manifest.json"), |w| cwdiss_core::io::write_json(w, &manifest))?;
        Ok(manifest)
    }
}
