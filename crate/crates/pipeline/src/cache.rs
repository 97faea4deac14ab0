use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::adapter::Stage;
use crate::error::PipelineError;

/// One cached backend output. `sha256` covers `output` only.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub identity: String,
    pub input: String,
    pub output: String,
    pub sha256: String,
}

/// Content-addressed store: `<dir>/<stage>/<sha256(identity NUL input)>.json`.
#[derive(Debug, Clone)]
pub struct Cache {
    dir: PathBuf,
}

fn hex_digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl Cache {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self, PipelineError> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(|e| PipelineError::io(&dir, e))?;
        Ok(Self { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn key(identity: &str, input: &str) -> String {
        let mut bytes = Vec::with_capacity(identity.len() + input.len() + 1);
        bytes.extend_from_slice(identity.as_bytes());
        bytes.push(0);
        bytes.extend_from_slice(input.as_bytes());
        hex_digest(&bytes)
    }

    pub fn path_for(&self, stage: Stage, identity: &str, input: &str) -> PathBuf {
        self.dir
            .join(stage.name())
            .join(format!("{}.json", Self::key(identity, input)))
    }

    /// `Ok(None)` on a miss. An entry that fails verification is an error,
    /// never a silent miss.
    pub fn get(&self, stage: Stage, identity: &str, input: &str) -> Result<Option<String>, PipelineError> {
        let path = self.path_for(stage, identity, input);
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(PipelineError::io(&path, e)),
        };
        let corrupt = |reason: &str| PipelineError::CacheCorrupt {
            path: path.clone(),
            reason: reason.to_string(),
        };
        let entry: CacheEntry =
            serde_json::from_str(&text).map_err(|e| corrupt(&format!("invalid JSON: {e}")))?;
        if entry.identity != identity {
            return Err(corrupt("identity mismatch"));
        }
        if entry.input != input {
            return Err(corrupt("input mismatch"));
        }
        if entry.sha256 != hex_digest(entry.output.as_bytes()) {
            return Err(corrupt("digest mismatch"));
        }
        Ok(Some(entry.output))
    }

    pub fn put(&self, stage: Stage, identity: &str, input: &str, output: &str) -> Result<(), PipelineError> {
        let path = self.path_for(stage, identity, input);
        let parent = path.parent().expect("cache path has a parent");
        fs::create_dir_all(parent).map_err(|e| PipelineError::io(parent, e))?;
        let entry = CacheEntry {
            identity: identity.to_string(),
            input: input.to_string(),
            output: output.to_string(),
            sha256: hex_digest(output.as_bytes()),
        };
        let json = serde_json::to_string_pretty(&entry).expect("cache entry serializes");
        let tmp = path.with_extension(format!("tmp{}", std::process::id()));
        fs::write(&tmp, json).map_err(|e| PipelineError::io(&tmp, e))?;
        fs::rename(&tmp, &path).map_err(|e| PipelineError::io(&path, e))
    }

    /// Appends a line to `cache.log`.
    pub fn log(&self, line: &str) -> Result<(), PipelineError> {
        let path = self.dir.join("cache.log");
        let mut f = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(|e| PipelineError::io(&path, e))?;
        writeln!(f, "{line}").map_err(|e| PipelineError::io(&path, e))
    }
}
