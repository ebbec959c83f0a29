//! Content-addressed cache, checksummed reads and the run manifest.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::hex;
use crate::CliError;

pub const CACHE_ENV: &str = "RANGEWALK_CACHE_DIR";
pub const MANIFEST: &str = "manifest.json";
const INDEX: &str = "index.json";

pub fn sha256(bytes: &[u8]) -> String {
    hex(&Sha256::digest(bytes))
}

pub fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    fs::write(path, bytes).map_err(|e| io_err(path, e))
}

pub fn read_file(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| io_err(path, e))
}

/// Files keyed by a hash of what produced them, with an index of their
/// checksums. A hit whose bytes no longer match the index is an error.
pub struct Cache {
    dir: PathBuf,
    index: Mutex<BTreeMap<String, String>>,
    hits: Mutex<(usize, usize)>,
}

impl Cache {
    pub fn default_dir() -> PathBuf {
        match std::env::var_os(CACHE_ENV) {
            Some(d) => PathBuf::from(d),
            None => std::env::temp_dir().join("rangewalk-cache"),
        }
    }

    pub fn open(dir: PathBuf) -> Result<Self, CliError> {
        fs::create_dir_all(&dir).map_err(|e| io_err(&dir, e))?;
        let path = dir.join(INDEX);
        let index = if path.exists() {
            serde_json::from_slice(&read_file(&path)?)
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?
        } else {
            BTreeMap::new()
        };
        Ok(Self { dir, index: Mutex::new(index), hits: Mutex::new((0, 0)) })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn key(parts: &[&str]) -> String {
        sha256(parts.join("\u{1f}").as_bytes())[..24].to_string()
    }

    /// Cached bytes for `name`, or `make()` stored under it.
    pub fn get_or_insert(
        &self,
        name: &str,
        make: impl FnOnce() -> Result<Vec<u8>, CliError>,
    ) -> Result<Vec<u8>, CliError> {
        let path = self.dir.join(name);
        let known = self.index.lock().unwrap().get(name).cloned();
        if let (Some(sum), true) = (known, path.exists()) {
            let bytes = read_file(&path)?;
            if sha256(&bytes) != sum {
                return Err(CliError::Checksum(path.display().to_string()));
            }
            self.hits.lock().unwrap().0 += 1;
            return Ok(bytes);
        }
        let bytes = make()?;
        write_file(&path, &bytes)?;
        self.index.lock().unwrap().insert(name.to_string(), sha256(&bytes));
        self.hits.lock().unwrap().1 += 1;
        Ok(bytes)
    }

    /// `(hits, misses)` since the cache was opened.
    pub fn counts(&self) -> (usize, usize) {
        *self.hits.lock().unwrap()
    }

    pub fn save(&self) -> Result<(), CliError> {
        let bytes = serde_json::to_vec_pretty(&*self.index.lock().unwrap()).expect("index serializes");
        write_file(&self.dir.join(INDEX), &bytes)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageStatus {
    pub stage: String,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub cache_hits: usize,
    pub cache_misses: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_hash: String,
    pub artifact_version: String,
    pub defaults_applied: Vec<String>,
    pub config: crate::config::ExperimentConfig,
    pub stages: Vec<StageStatus>,
    /// Every file under the output directory except this manifest.
    pub files: Vec<FileEntry>,
}

impl RunManifest {
    pub fn load(out: &Path) -> Result<Option<Self>, CliError> {
        let path = out.join(MANIFEST);
        if !path.exists() {
            return Ok(None);
        }
        serde_json::from_slice(&read_file(&path)?)
            .map(Some)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
    }

    pub fn record(&mut self, status: StageStatus) {
        self.stages.retain(|s| s.stage != status.stage);
        self.stages.push(status);
    }

    /// Rescans the output directory and writes the manifest.
    pub fn save(&mut self, out: &Path) -> Result<(), CliError> {
        self.files = inventory(out)?;
        let bytes = serde_json::to_vec_pretty(self).expect("manifest serializes");
        write_file(&out.join(MANIFEST), &bytes)
    }

    /// Reads `rel` under `out`, checking it against the recorded checksum.
    pub fn read_checked(&self, out: &Path, rel: &str) -> Result<Vec<u8>, CliError> {
        let path = out.join(rel);
        let bytes = read_file(&path)?;
        if let Some(entry) = self.files.iter().find(|f| f.path == rel) {
            if entry.sha256 != sha256(&bytes) {
                return Err(CliError::Checksum(path.display().to_string()));
            }
        }
        Ok(bytes)
    }
}

fn inventory(out: &Path) -> Result<Vec<FileEntry>, CliError> {
    let mut files = Vec::new();
    let mut stack = vec![out.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).map_err(|e| io_err(&dir, e))? {
            let path = entry.map_err(|e| io_err(&dir, e))?.path();
            if path.is_dir() {
                stack.push(path);
                continue;
            }
            let rel = path.strip_prefix(out).unwrap().to_string_lossy().replace('\\', "/");
            if rel == MANIFEST {
                continue;
            }
            let bytes = read_file(&path)?;
            files.push(FileEntry { path: rel, sha256: sha256(&bytes), bytes: bytes.len() as u64 });
        }
    }
    files.sort_by(|a, b| a.path.cmp(&b.path));
    Ok(files)
}
