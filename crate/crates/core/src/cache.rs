//! JSON-lines result cache keyed by a hash of the canonical run
//! configuration. Each line is `{"key": "<sha256 hex>", "report": …}`.
//! Unreadable lines are skipped with a warning and never trusted.

use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

/// Environment variable naming the directory of the default cache file.
pub const CACHE_DIR_ENV: &str = "QMFCUT_CACHE_DIR";
pub const CACHE_FILE_NAME: &str = "cache.jsonl";

#[derive(Debug, Serialize, Deserialize)]
struct Entry {
    key: String,
    report: Value,
}

/// Hash of a configuration. `serde_json` writes struct fields in
/// declaration order and maps in key order, so equal configurations give
/// equal keys.
pub fn cache_key<T: Serialize>(config: &T) -> String {
    let canonical = serde_json::to_vec(config).expect("configurations serialize");
    hex::encode(Sha256::digest(&canonical))
}

#[derive(Debug, Clone)]
pub struct Cache {
    path: PathBuf,
}

impl Cache {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        Self { path: path.into() }
    }

    /// `$QMFCUT_CACHE_DIR/cache.jsonl` when the variable is set.
    pub fn from_env() -> Option<Self> {
        std::env::var_os(CACHE_DIR_ENV)
            .filter(|v| !v.is_empty())
            .map(|dir| Self::new(Path::new(&dir).join(CACHE_FILE_NAME)))
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Most recent report stored under `key`.
    pub fn lookup(&self, key: &str) -> Option<Value> {
        let file = File::open(&self.path).ok()?;
        let mut found = None;
        for (lineno, line) in BufReader::new(file).lines().enumerate() {
            let Ok(line) = line else {
                log::warn!("{}: unreadable line {}", self.path.display(), lineno + 1);
                continue;
            };
            if line.trim().is_empty() {
                continue;
            }
            match serde_json::from_str::<Entry>(&line) {
                Ok(entry) if entry.key == key => found = Some(entry.report),
                Ok(_) => {}
                Err(e) => log::warn!(
                    "{}: skipping corrupt cache line {}: {e}",
                    self.path.display(),
                    lineno + 1
                ),
            }
        }
        found
    }

    /// Appends one entry; a single `write_all` per line keeps concurrent
    /// appends from interleaving on local filesystems.
    pub fn store(&self, key: &str, report: &Value) -> std::io::Result<()> {
        if let Some(dir) = self.path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
        let entry = Entry {
            key: key.to_string(),
            report: report.clone(),
        };
        let mut line = serde_json::to_string(&entry)?;
        line.push('\n');
        let mut file = OpenOptions::new().create(true).append(true).open(&self.path)?;
        file.write_all(line.as_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn store_then_lookup() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::new(dir.path().join("sub").join("c.jsonl"));
        let key = cache_key(&json!({"command": "qmc", "m": 4, "seed": 1}));
        assert_eq!(cache.lookup(&key), None);
        let report = json!({"qmc": 4});
        cache.store(&key, &report).unwrap();
        assert_eq!(cache.lookup(&key), Some(report));
        let other = cache_key(&json!({"command": "qmc", "m": 4, "seed": 2}));
        assert_ne!(key, other);
        assert_eq!(cache.lookup(&other), None);
    }

    #[test]
    fn corrupt_lines_are_skipped() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.jsonl");
        let key = cache_key(&json!({"a": 1}));
        fs::write(&path, format!("{{not json\n{{\"key\":\"{key}\"\n\n")).unwrap();
        let cache = Cache::new(&path);
        assert_eq!(cache.lookup(&key), None);
        cache.store(&key, &json!(7)).unwrap();
        assert_eq!(cache.lookup(&key), Some(json!(7)));
    }

    #[test]
    fn keys_are_stable_hex() {
        let k = cache_key(&json!({"x": [1, 2]}));
        assert_eq!(k.len(), 64);
        assert_eq!(k, cache_key(&json!({"x": [1, 2]})));
    }
}
