pub mod bench;
pub mod curves;
pub mod data;
pub mod predictor;

use std::path::{Path, PathBuf};

use crate::manifest::manifest_for;

/// Settings that apply to every subcommand.
pub struct Ctx {
    pub manifest: Option<PathBuf>,
    pub workers: usize,
}

impl Ctx {
    /// `--manifest`, else `<out>.manifest.json` when writing to a file.
    pub fn manifest_path(&self, out: Option<&Path>) -> Option<PathBuf> {
        self.manifest.clone().or_else(|| out.map(manifest_for))
    }
}
