//! Output directory bookkeeping and the hash manifest.

use std::path::{Path, PathBuf};

use galem_core::discrete::fs1::Snapshot;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliResult;

#[derive(Debug, Serialize)]
struct Entry {
    path: String,
    bytes: usize,
    sha256: String,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    scenario: &'a str,
    command: &'a str,
    exit_code: i32,
    files: &'a [Entry],
}

pub struct Artifacts {
    dir: PathBuf,
    entries: Vec<Entry>,
}

impl Artifacts {
    pub fn create(dir: &Path) -> CliResult<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            entries: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Writes `bytes` to `name` (relative, `/`-separated) and records its hash.
    pub fn write(&mut self, name: &str, bytes: &[u8]) -> CliResult<()> {
        let path = self.dir.join(name);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::write(&path, bytes)?;
        self.entries.retain(|e| e.path != name);
        self.entries.push(Entry {
            path: name.to_string(),
            bytes: bytes.len(),
            sha256: hex::encode(Sha256::digest(bytes)),
        });
        Ok(())
    }

    pub fn text(&mut self, name: &str, s: &str) -> CliResult<()> {
        self.write(name, s.as_bytes())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, v: &T) -> CliResult<()> {
        let mut s = serde_json::to_string_pretty(v).expect("json serializes");
        s.push('\n');
        self.text(name, &s)
    }

    pub fn snapshot(&mut self, name: &str, snap: &Snapshot) -> CliResult<()> {
        let mut buf = Vec::new();
        snap.write(&mut buf)?;
        self.write(name, &buf)
    }

    /// Writes `manifest.json` listing every artifact in path order.
    pub fn finish(mut self, scenario: &str, command: &str, exit_code: i32) -> CliResult<PathBuf> {
        self.entries.sort_by(|a, b| a.path.cmp(&b.path));
        let m = Manifest {
            scenario,
            command,
            exit_code,
            files: &self.entries,
        };
        let mut s = serde_json::to_string_pretty(&m).expect("json serializes");
        s.push('\n');
        let path = self.dir.join("manifest.json");
        std::fs::write(&path, s)?;
        Ok(path)
    }
}
