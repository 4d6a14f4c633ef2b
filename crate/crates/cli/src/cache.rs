//! A persistent key/value store of computed invariants, kept as one JSON
//! object per line: `{"key": ..., "value": ...}`.
//!
//! Keys are canonical call strings such as `class_number(-23)` or
//! `report(23,107)`. A key is written at most once; a second write with a
//! different value is refused, since every cached quantity is a pure
//! function of its key.

use std::collections::HashMap;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{CliError, CliResult};

#[derive(Debug, thiserror::Error)]
pub enum CacheError {
    #[error(
        "cache integrity error: key {key} holds {stored}, refusing to overwrite with {offered}"
    )]
    Integrity {
        key: String,
        stored: String,
        offered: String,
    },
    #[error("cache entry {key} does not decode: {reason}")]
    Decode { key: String, reason: String },
    #[error("cache i/o on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

#[derive(Serialize, Deserialize)]
struct Entry {
    key: String,
    value: Value,
}

pub struct Cache {
    path: Option<PathBuf>,
    entries: Mutex<HashMap<String, Value>>,
    writer: Mutex<Option<File>>,
}

impl Cache {
    /// A cache that lives only as long as the process.
    pub fn in_memory() -> Self {
        Cache {
            path: None,
            entries: Mutex::new(HashMap::new()),
            writer: Mutex::new(None),
        }
    }

    /// Opens (creating if needed) the cache file at `path`. A file that
    /// cannot be parsed, or that stores two values under one key, is
    /// discarded and started afresh.
    pub fn open(path: &Path) -> Result<Self, CacheError> {
        let io = |source| CacheError::Io {
            path: path.to_path_buf(),
            source,
        };
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(io)?;
        }
        let entries = match Self::load(path) {
            Ok(entries) => entries,
            Err(reason) => {
                log::warn!(
                    "cache file {} is corrupt ({reason}); rebuilding it from scratch",
                    path.display()
                );
                File::create(path).map_err(io)?;
                HashMap::new()
            }
        };
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(io)?;
        Ok(Cache {
            path: Some(path.to_path_buf()),
            entries: Mutex::new(entries),
            writer: Mutex::new(Some(file)),
        })
    }

    fn load(path: &Path) -> Result<HashMap<String, Value>, String> {
        let mut entries = HashMap::new();
        let file = match File::open(path) {
            Ok(f) => f,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(entries),
            Err(e) => return Err(e.to_string()),
        };
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| e.to_string())?;
            if line.trim().is_empty() {
                continue;
            }
            let entry: Entry =
                serde_json::from_str(&line).map_err(|e| format!("line {}: {e}", i + 1))?;
            if let Some(old) = entries.get(&entry.key) {
                if *old != entry.value {
                    return Err(format!(
                        "line {}: conflicting values for {}",
                        i + 1,
                        entry.key
                    ));
                }
            }
            entries.insert(entry.key, entry.value);
        }
        Ok(entries)
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn get(&self, key: &str) -> Option<Value> {
        self.entries.lock().unwrap().get(key).cloned()
    }

    /// Stores `value` under `key`. Storing the value already present is a
    /// no-op; storing a different one is an integrity error.
    pub fn put(&self, key: &str, value: Value) -> Result<(), CacheError> {
        let mut entries = self.entries.lock().unwrap();
        if let Some(old) = entries.get(key) {
            if *old == value {
                return Ok(());
            }
            return Err(CacheError::Integrity {
                key: key.to_string(),
                stored: old.to_string(),
                offered: value.to_string(),
            });
        }
        if let Some(file) = self.writer.lock().unwrap().as_mut() {
            let line = serde_json::to_string(&Entry {
                key: key.to_string(),
                value: value.clone(),
            })
            .expect("cache entries serialize");
            writeln!(file, "{line}")
                .and_then(|_| file.flush())
                .map_err(|source| CacheError::Io {
                    path: self.path.clone().unwrap_or_default(),
                    source,
                })?;
        }
        entries.insert(key.to_string(), value);
        Ok(())
    }

    /// All keys, sorted.
    pub fn keys(&self) -> Vec<String> {
        let mut keys: Vec<String> = self.entries.lock().unwrap().keys().cloned().collect();
        keys.sort();
        keys
    }

    /// Returns the cached value for `key`, computing and storing it on a
    /// miss. The computation runs outside any lock.
    pub fn get_or_compute<T, E>(
        &self,
        key: &str,
        compute: impl FnOnce() -> Result<T, E>,
    ) -> CliResult<T>
    where
        T: Serialize + DeserializeOwned,
        E: Into<CliError>,
    {
        if let Some(v) = self.get(key) {
            return serde_json::from_value(v).map_err(|e| {
                CacheError::Decode {
                    key: key.to_string(),
                    reason: e.to_string(),
                }
                .into()
            });
        }
        let value = compute().map_err(Into::into)?;
        let json = serde_json::to_value(&value).map_err(|e| CacheError::Decode {
            key: key.to_string(),
            reason: e.to_string(),
        })?;
        self.put(key, json)?;
        Ok(value)
    }
}
