//! `manifest.json`: what produced the files in an output directory.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const FILE_NAME: &str = "manifest.json";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub tool_version: String,
    pub artifact_version: u32,
    pub command: String,
    pub argv: Vec<String>,
    /// Resolved configuration in `key = value` form.
    pub config: String,
    pub seeds: BTreeMap<String, u64>,
    pub inputs: Vec<InputDigest>,
    pub outputs: Vec<String>,
    pub started_unix: u64,
    pub finished_unix: Option<u64>,
}

fn now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(Sha256::digest(&bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect())
}

/// A manifest in progress. Created (and written) before any output file,
/// then rewritten by [`ManifestWriter::finish`].
pub struct ManifestWriter {
    path: PathBuf,
    manifest: RunManifest,
}

impl ManifestWriter {
    pub fn start(
        out_dir: &Path,
        command: &str,
        config: String,
        seeds: BTreeMap<String, u64>,
        inputs: &[&Path],
    ) -> Result<Self> {
        fs::create_dir_all(out_dir)
            .with_context(|| format!("creating output directory {}", out_dir.display()))?;
        let inputs = inputs
            .iter()
            .map(|p| {
                Ok(InputDigest {
                    path: p.display().to_string(),
                    sha256: sha256_file(p)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let w = Self {
            path: out_dir.join(FILE_NAME),
            manifest: RunManifest {
                tool: "asymgraph".into(),
                tool_version: env!("CARGO_PKG_VERSION").into(),
                artifact_version: asymgraph::model::CHECKPOINT_VERSION,
                command: command.into(),
                argv: std::env::args().collect(),
                config,
                seeds,
                inputs,
                outputs: Vec::new(),
                started_unix: now(),
                finished_unix: None,
            },
        };
        w.write()?;
        Ok(w)
    }

    fn write(&self) -> Result<()> {
        let json = serde_json::to_string_pretty(&self.manifest)?;
        fs::write(&self.path, json + "\n")
            .with_context(|| format!("writing {}", self.path.display()))
    }

    pub fn finish(mut self, outputs: &[&str]) -> Result<()> {
        self.manifest.outputs = outputs.iter().map(|s| s.to_string()).collect();
        self.manifest.finished_unix = Some(now());
        self.write()
    }
}

#[cfg(test)]
pub fn read(dir: &Path) -> Result<RunManifest> {
    let path = dir.join(FILE_NAME);
    let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_of_known_bytes() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x");
        fs::write(&p, b"abc").unwrap();
        assert_eq!(
            sha256_file(&p).unwrap(),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn manifest_written_before_and_after() {
        let dir = tempfile::tempdir().unwrap();
        let w = ManifestWriter::start(dir.path(), "t", "a = 1\n".into(), BTreeMap::new(), &[]).unwrap();
        assert!(read(dir.path()).unwrap().finished_unix.is_none());
        w.finish(&["out.tsv"]).unwrap();
        let m = read(dir.path()).unwrap();
        assert_eq!(m.outputs, vec!["out.tsv"]);
        assert!(m.finished_unix.is_some());
    }
}
