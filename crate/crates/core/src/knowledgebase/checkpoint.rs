//! One JSON file per completed unit of work.

use std::path::PathBuf;

use serde::de::DeserializeOwned;
use serde::Serialize;

use super::CellResult;
use crate::error::{Error, Result};
use crate::io::write_atomic;
use crate::seed::sha256_hex;

pub(crate) fn cell_key(corpus_hash: &str, spec_json: &str, config_hash: &str) -> String {
    sha256_hex(format!("cell\n{corpus_hash}\n{spec_json}\n{config_hash}").as_bytes())
}

pub(crate) fn meta_key(corpus_hash: &str, seed: u64, extractor_signature: &str, lexicon_hash: &str) -> String {
    sha256_hex(format!("meta\n{corpus_hash}\n{seed}\n{extractor_signature}\n{lexicon_hash}").as_bytes())
}

/// Checkpoint directory; a store without a directory keeps nothing.
#[derive(Debug, Clone)]
pub struct CheckpointStore {
    dir: Option<PathBuf>,
}

impl CheckpointStore {
    pub fn new(dir: Option<PathBuf>) -> Result<Self> {
        if let Some(d) = &dir {
            std::fs::create_dir_all(d).map_err(|e| Error::io(d, e))?;
        }
        Ok(CheckpointStore { dir })
    }

    fn path(&self, kind: &str, key: &str) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(format!("{kind}-{key}.json")))
    }

    fn load<T: DeserializeOwned>(&self, kind: &str, key: &str) -> Result<Option<T>> {
        let Some(path) = self.path(kind, key) else {
            return Ok(None);
        };
        match std::fs::read(&path) {
            Ok(bytes) => match serde_json::from_slice(&bytes) {
                Ok(v) => Ok(Some(v)),
                Err(e) => {
                    // Writes are atomic, so this is outside interference; recompute.
                    log::warn!("ignoring unreadable checkpoint {}: {e}", path.display());
                    Ok(None)
                }
            },
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(Error::io(path, e)),
        }
    }

    fn save<T: Serialize>(&self, kind: &str, key: &str, value: &T) -> Result<()> {
        match self.path(kind, key) {
            Some(path) => write_atomic(&path, &serde_json::to_vec(value)?),
            None => Ok(()),
        }
    }

    pub fn load_cell(&self, key: &str) -> Result<Option<CellResult>> {
        self.load("cell", key)
    }

    pub fn save_cell(&self, key: &str, cell: &CellResult) -> Result<()> {
        self.save("cell", key, cell)
    }

    pub fn load_meta(&self, key: &str) -> Result<Option<Vec<f64>>> {
        self.load("meta", key)
    }

    pub fn save_meta(&self, key: &str, values: &[f64]) -> Result<()> {
        self.save("meta", key, &values)
    }
}
