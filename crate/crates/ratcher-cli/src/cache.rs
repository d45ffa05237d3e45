//! On-disk result cache.
//!
//! Entries are JSON files named by the SHA-256 of a key string. Writes go to a
//! temporary file in the same directory and are renamed into place, so a
//! reader never sees a half-written entry.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};

/// Bumped whenever a change to the algorithms could alter cached values.
pub const ALGORITHM_STAMP: &str = "grevlex/simplex-cones/3";

pub struct Cache {
    dir: Option<PathBuf>,
}

impl Cache {
    pub fn disabled() -> Self {
        Cache { dir: None }
    }

    /// Resolves the directory: explicit flag, then `RATCHER_CACHE_DIR`, then the user data directory.
    pub fn open(flag: Option<PathBuf>, enabled: bool) -> Self {
        if !enabled {
            return Cache::disabled();
        }
        let dir = flag
            .or_else(|| std::env::var_os("RATCHER_CACHE_DIR").map(PathBuf::from))
            .or_else(default_dir);
        Cache { dir }
    }

    pub fn key(parts: &[&str]) -> String {
        let mut h = Sha256::new();
        h.update(env!("CARGO_PKG_VERSION").as_bytes());
        h.update(b"\0");
        h.update(ALGORITHM_STAMP.as_bytes());
        for p in parts {
            h.update(b"\0");
            h.update(p.as_bytes());
        }
        hex::encode(h.finalize())
    }

    pub fn get<T: DeserializeOwned>(&self, key: &str) -> Option<T> {
        let path = self.dir.as_ref()?.join(format!("{key}.json"));
        let bytes = fs::read(path).ok()?;
        serde_json::from_slice(&bytes).ok()
    }

    /// Stores a value; failures are reported but never fatal to the caller.
    pub fn put<T: Serialize>(&self, key: &str, value: &T) -> Result<()> {
        let Some(dir) = &self.dir else { return Ok(()) };
        fs::create_dir_all(dir).with_context(|| format!("creating cache directory {}", dir.display()))?;
        write_atomic(dir, &format!("{key}.json"), &serde_json::to_vec(value)?)
    }
}

fn default_dir() -> Option<PathBuf> {
    if let Some(x) = std::env::var_os("XDG_DATA_HOME").filter(|x| !x.is_empty()) {
        return Some(PathBuf::from(x).join("ratcher"));
    }
    std::env::var_os("HOME").map(|h| PathBuf::from(h).join(".local/share/ratcher"))
}

pub fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> Result<()> {
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(dir.join(name)).map_err(|e| e.error)?;
    Ok(())
}
