//! Append-only JSON-lines results cache, one record per grid point.

use std::collections::HashMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use log::warn;
use serde::{Deserialize, Serialize};

use crate::{Outcome, CODE_VERSION};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheRecord {
    pub key: String,
    pub version: String,
    pub command: String,
    pub outcome: Outcome,
}

#[derive(Debug)]
pub struct Cache {
    path: PathBuf,
    entries: HashMap<String, Outcome>,
    pending: Vec<CacheRecord>,
    skipped: usize,
}

impl Cache {
    /// Loads `path` if it exists. Unparseable lines are skipped with a
    /// warning; records from another code version are ignored.
    pub fn open(path: &Path) -> io::Result<Cache> {
        let mut cache = Cache {
            path: path.to_path_buf(),
            entries: HashMap::new(),
            pending: Vec::new(),
            skipped: 0,
        };
        let text = match fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(cache),
            Err(e) => return Err(e),
        };
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            match serde_json::from_str::<CacheRecord>(line) {
                Ok(rec) if rec.version == CODE_VERSION => {
                    cache.entries.insert(rec.key, rec.outcome);
                }
                Ok(_) => {}
                Err(e) => {
                    warn!("{}:{}: skipping corrupt cache line ({e})", path.display(), i + 1);
                    cache.skipped += 1;
                }
            }
        }
        Ok(cache)
    }

    pub fn lookup(&self, key: &str) -> Option<&Outcome> {
        self.entries.get(key)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Corrupt lines seen while loading.
    pub fn skipped(&self) -> usize {
        self.skipped
    }

    pub fn insert(&mut self, key: String, command: &str, outcome: Outcome) {
        self.pending.push(CacheRecord {
            key: key.clone(),
            version: CODE_VERSION.to_string(),
            command: command.to_string(),
            outcome: outcome.clone(),
        });
        self.entries.insert(key, outcome);
    }

    /// Appends pending records: the old contents plus new lines go to a
    /// temporary file that is renamed over the cache.
    pub fn flush(&mut self) -> io::Result<()> {
        if self.pending.is_empty() {
            return Ok(());
        }
        let mut bytes = match fs::read(&self.path) {
            Ok(b) => b,
            Err(e) if e.kind() == io::ErrorKind::NotFound => Vec::new(),
            Err(e) => return Err(e),
        };
        if !bytes.is_empty() && !bytes.ends_with(b"\n") {
            bytes.push(b'\n');
        }
        for rec in self.pending.drain(..) {
            bytes.extend(serde_json::to_vec(&rec).map_err(io::Error::other)?);
            bytes.push(b'\n');
        }
        if let Some(dir) = self.path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
        let tmp = self.path.with_extension("tmp");
        fs::write(&tmp, &bytes)?;
        fs::rename(&tmp, &self.path)
    }
}
