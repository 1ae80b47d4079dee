//! Content-addressed run directories, their manifest and CSV formatting.

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::CliError;

pub const MANIFEST: &str = "manifest.json";
pub const LOCK: &str = ".lock";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArtifactRecord {
    pub file: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    /// Stage options that change its artifacts, e.g. emitted samples.
    pub options: String,
    pub started_unix: f64,
    pub finished_unix: f64,
    pub exit_code: i32,
    /// Headline numbers echoed on stdout, also when served from cache.
    pub summary: serde_json::Value,
    pub artifacts: Vec<ArtifactRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_digest: String,
    pub tool_version: String,
    pub stages: BTreeMap<String, StageRecord>,
}

pub fn now_unix() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0.0, |d| d.as_secs_f64())
}

pub fn sha256_file(path: &Path) -> Result<String, CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// A run directory held under an exclusive lock file for its lifetime.
#[derive(Debug)]
pub struct RunDir {
    pub path: PathBuf,
    pub manifest: RunManifest,
}

impl RunDir {
    /// Creates or reopens `root/<digest>` and takes its lock.
    pub fn open(root: &Path, digest: &str) -> Result<Self, CliError> {
        let path = root.join(digest);
        fs::create_dir_all(&path).map_err(|e| CliError::io(&path, e))?;
        let lock = path.join(LOCK);
        match OpenOptions::new().write(true).create_new(true).open(&lock) {
            Ok(mut f) => {
                let _ = writeln!(f, "{}", std::process::id());
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                return Err(CliError::Locked { path: lock.display().to_string() });
            }
            Err(e) => return Err(CliError::io(&lock, e)),
        }
        let mut dir = Self {
            path,
            manifest: RunManifest {
                config_digest: digest.to_string(),
                tool_version: TOOL_VERSION.to_string(),
                stages: BTreeMap::new(),
            },
        };
        let mpath = dir.path.join(MANIFEST);
        if mpath.exists() {
            let text = fs::read_to_string(&mpath).map_err(|e| CliError::io(&mpath, e))?;
            // An unreadable manifest is rebuilt rather than trusted.
            if let Ok(m) = serde_json::from_str::<RunManifest>(&text) {
                if m.config_digest == digest {
                    dir.manifest = m;
                }
            }
        }
        Ok(dir)
    }

    pub fn file(&self, name: &str) -> PathBuf {
        self.path.join(name)
    }

    /// The recorded stage, if its options match and every artifact is intact.
    pub fn cached(&self, stage: &str, options: &str) -> Option<&StageRecord> {
        let rec = self.manifest.stages.get(stage)?;
        if rec.options != options {
            return None;
        }
        let intact = rec
            .artifacts
            .iter()
            .all(|a| sha256_file(&self.file(&a.file)).is_ok_and(|d| d == a.sha256));
        intact.then_some(rec)
    }

    pub fn write(&self, name: &str, contents: &[u8]) -> Result<ArtifactRecord, CliError> {
        let p = self.file(name);
        fs::write(&p, contents).map_err(|e| CliError::io(&p, e))?;
        Ok(ArtifactRecord {
            file: name.to_string(),
            sha256: hex::encode(Sha256::digest(contents)),
        })
    }

    pub fn record(&mut self, stage: &str, rec: StageRecord) -> Result<(), CliError> {
        self.manifest.tool_version = TOOL_VERSION.to_string();
        self.manifest.stages.insert(stage.to_string(), rec);
        let text = serde_json::to_string_pretty(&self.manifest).expect("manifest serializes");
        let p = self.file(MANIFEST);
        fs::write(&p, text).map_err(|e| CliError::io(&p, e))
    }
}

impl Drop for RunDir {
    fn drop(&mut self) {
        let _ = fs::remove_file(self.path.join(LOCK));
    }
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn num(x: f64) -> String {
    if x == 0.0 {
        // Keep the sign of negative zero out of the tables.
        return format!("{:.16e}", 0.0);
    }
    format!("{x:.16e}")
}

/// Builds a CSV document from a header and rows of preformatted cells.
pub fn csv(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for r in rows {
        out.push_str(&r.join(","));
        out.push('\n');
    }
    out
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let f = File::open(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_reader(f).map_err(|e| CliError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}
