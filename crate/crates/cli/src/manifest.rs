//! Run manifests and atomic output writing.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use curvecast_core::Error;
use serde::Serialize;
use sha2::{Digest, Sha256};

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Digest of a file, or of every file under a directory (keyed by path).
fn digest_path(path: &Path, out: &mut BTreeMap<String, String>) -> Result<()> {
    if path.is_dir() {
        let mut entries: Vec<PathBuf> = std::fs::read_dir(path)
            .map_err(|e| Error::io(path, e))?
            .map(|e| e.map(|e| e.path()))
            .collect::<std::io::Result<_>>()
            .map_err(|e| Error::io(path, e))?;
        entries.sort();
        for p in entries.iter().filter(|p| p.is_file()) {
            digest_path(p, out)?;
        }
    } else {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        out.insert(path.display().to_string(), sha256_hex(&bytes));
    }
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub argv: Vec<String>,
    pub version: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub workers: usize,
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
    pub duration_ms: u128,
}

/// Collects inputs and outputs of one command run.
pub struct Run {
    command: &'static str,
    started: Instant,
    seed: Option<u64>,
    inputs: BTreeMap<String, String>,
    outputs: BTreeMap<String, String>,
}

impl Run {
    pub fn new(command: &'static str) -> Self {
        Run {
            command,
            started: Instant::now(),
            seed: None,
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
        }
    }

    pub fn seed(&mut self, seed: u64) {
        self.seed = Some(seed);
    }

    pub fn input(&mut self, path: &Path) -> Result<()> {
        digest_path(path, &mut self.inputs)
    }

    /// Writes `bytes` to `path` atomically, or to stdout when `path` is None.
    pub fn emit(&mut self, path: Option<&Path>, bytes: &[u8]) -> Result<()> {
        match path {
            Some(p) => {
                write_atomic(p, bytes)?;
                self.outputs.insert(p.display().to_string(), sha256_hex(bytes));
            }
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(bytes).context("writing to stdout")?;
                out.flush().context("writing to stdout")?;
            }
        }
        Ok(())
    }

    pub fn emit_json<T: Serialize + ?Sized>(&mut self, path: Option<&Path>, value: &T) -> Result<()> {
        let mut bytes = serde_json::to_vec_pretty(value).context("serializing output")?;
        bytes.push(b'\n');
        self.emit(path, &bytes)
    }

    /// Writes the manifest to `path`, if any.
    pub fn finish(self, path: Option<PathBuf>, workers: usize) -> Result<()> {
        let Some(path) = path else { return Ok(()) };
        let manifest = RunManifest {
            command: self.command.to_string(),
            argv: std::env::args().collect(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed: self.seed,
            workers,
            inputs: self.inputs,
            outputs: self.outputs,
            duration_ms: self.started.elapsed().as_millis(),
        };
        let mut bytes = serde_json::to_vec_pretty(&manifest)?;
        bytes.push(b'\n');
        write_atomic(&path, &bytes)
    }
}

/// Default manifest location for a primary output: `<out>.manifest.json`.
pub fn manifest_for(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    out.with_file_name(name)
}

/// Temp file in the destination directory, then rename over the target.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}
