//! Run manifest: config echo, code version, timestamps, stream ids, and a
//! content hash of every data file the run produced. Data files themselves
//! carry no timestamps, so reruns with the same config are byte-identical;
//! the manifest records when, the hashes record what.

use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Serialize)]
pub struct OutputEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Serialize)]
pub struct StreamRange {
    pub base: u64,
    pub count: u64,
    pub scheme: &'static str,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub experiment: String,
    pub version: String,
    pub started_at: String,
    pub finished_at: String,
    pub master_seed: Option<u64>,
    pub streams: Option<StreamRange>,
    pub config: serde_json::Value,
    pub outputs: Vec<OutputEntry>,
}

pub struct ManifestBuilder {
    experiment: String,
    started_at: String,
    master_seed: Option<u64>,
    streams: Option<StreamRange>,
    config: serde_json::Value,
    out_dir: PathBuf,
    outputs: Vec<OutputEntry>,
}

impl ManifestBuilder {
    pub fn new(experiment: &str, config: serde_json::Value, out_dir: &Path) -> Self {
        ManifestBuilder {
            experiment: experiment.to_string(),
            started_at: chrono::Utc::now().to_rfc3339(),
            master_seed: None,
            streams: None,
            config,
            out_dir: out_dir.to_path_buf(),
            outputs: Vec::new(),
        }
    }

    pub fn seed(&mut self, master_seed: u64) {
        self.master_seed = Some(master_seed);
    }

    pub fn streams(&mut self, base: u64, count: u64) {
        self.streams = Some(StreamRange {
            base,
            count,
            scheme: "sequential",
        });
    }

    /// Write a data file into the output directory and record its hash.
    pub fn write_output(&mut self, name: &str, content: &[u8]) -> Result<(), CliError> {
        let path = self.out_dir.join(name);
        std::fs::write(&path, content)
            .map_err(|e| CliError::io(format!("writing {path:?}: {e}")))?;
        let mut hasher = Sha256::new();
        hasher.update(content);
        let digest = hasher.finalize();
        let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        self.outputs.push(OutputEntry {
            path: name.to_string(),
            sha256: hex,
            bytes: content.len() as u64,
        });
        Ok(())
    }

    /// Finish the run: write the manifest atomically (temp file + rename).
    pub fn finish(self) -> Result<(), CliError> {
        let manifest = RunManifest {
            experiment: self.experiment,
            version: env!("CARGO_PKG_VERSION").to_string(),
            started_at: self.started_at,
            finished_at: chrono::Utc::now().to_rfc3339(),
            master_seed: self.master_seed,
            streams: self.streams,
            config: self.config,
            outputs: self.outputs,
        };
        let text = serde_json::to_string_pretty(&manifest)
            .map_err(|e| CliError::io(format!("manifest encoding: {e}")))?;
        let tmp = self.out_dir.join("run_manifest.json.tmp");
        let path = self.out_dir.join("run_manifest.json");
        std::fs::write(&tmp, text).map_err(|e| CliError::io(format!("writing {tmp:?}: {e}")))?;
        std::fs::rename(&tmp, &path)
            .map_err(|e| CliError::io(format!("renaming manifest: {e}")))?;
        Ok(())
    }
}
