//! Output directory bookkeeping: atomic writes, content hashes, manifest.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

/// Git-style content hash: sha256 over `"blob <len>\0" ++ bytes`.
pub fn content_hash(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", bytes.len()).as_bytes());
    h.update(bytes);
    hex::encode(h.finalize())
}

pub struct Outputs {
    dir: PathBuf,
    files: BTreeMap<String, (String, usize)>,
}

#[derive(Serialize)]
struct FileEntry<'a> {
    path: &'a str,
    sha256: &'a str,
    bytes: usize,
}

#[derive(Serialize)]
struct Manifest<'a> {
    experiment: &'a str,
    /// Hash over all `path sha256` lines in order.
    digest: String,
    config: &'a str,
    files: Vec<FileEntry<'a>>,
}

impl Outputs {
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir)?;
        Ok(Outputs {
            dir: dir.to_path_buf(),
            files: BTreeMap::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let p = self.path(name);
        if let Some(parent) = p.parent() {
            std::fs::create_dir_all(parent)?;
        }
        nsc_core::checkpoint::atomic_write(&p, bytes)?;
        self.files
            .insert(name.to_string(), (content_hash(bytes), bytes.len()));
        Ok(())
    }

    /// Record a file some other component wrote under the output directory.
    pub fn record(&mut self, name: &str) -> Result<(), CliError> {
        let bytes = std::fs::read(self.path(name))?;
        self.files
            .insert(name.to_string(), (content_hash(&bytes), bytes.len()));
        Ok(())
    }

    pub fn write_toml<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let text = toml::to_string(value).map_err(|e| CliError::Output(e.to_string()))?;
        self.write(name, text.as_bytes())
    }

    /// Write `manifest.toml`; returns the digest.
    pub fn finish(self, experiment: &str, config: &str) -> Result<String, CliError> {
        let mut h = Sha256::new();
        for (name, (hash, _)) in &self.files {
            h.update(format!("{name} {hash}\n").as_bytes());
        }
        let digest = hex::encode(h.finalize());
        let m = Manifest {
            experiment,
            digest: digest.clone(),
            config,
            files: self
                .files
                .iter()
                .map(|(p, (s, b))| FileEntry {
                    path: p,
                    sha256: s,
                    bytes: *b,
                })
                .collect(),
        };
        let text = toml::to_string(&m).map_err(|e| CliError::Output(e.to_string()))?;
        nsc_core::checkpoint::atomic_write(&self.dir.join("manifest.toml"), text.as_bytes())?;
        Ok(digest)
    }
}

/// Format a float so that parsing returns the same value.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else {
        format!("{x:e}")
    }
}

pub fn csv_bytes(header: &[&str], rows: &[Vec<String>]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.into_inner().map_err(|e| CliError::Output(e.to_string()))
}
