use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::ExperimentConfig;
use crate::error::{Error, Result};

pub const MANIFEST_FORMAT_VERSION: u32 = 1;

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputFile {
    /// Relative to the run directory.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

/// Everything needed to reproduce a run and check that it reproduced.
/// Nothing here depends on wall-clock time; stage timings go to a
/// separate file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub format_version: u32,
    pub config: ExperimentConfig,
    pub seeds: BTreeMap<String, u64>,
    /// Hash of each language file used, keyed by role.
    pub languages: BTreeMap<String, String>,
    /// Hash of each model file produced, keyed by role.
    pub models: BTreeMap<String, String>,
    pub outputs: Vec<OutputFile>,
    pub timings_file: String,
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let m: RunManifest = serde_json::from_str(&s)?;
        if m.format_version != MANIFEST_FORMAT_VERSION {
            return Err(Error::FormatVersion {
                found: m.format_version,
                expected: MANIFEST_FORMAT_VERSION,
            });
        }
        Ok(m)
    }

    /// Output files whose hash differs from `other` or that only one side
    /// lists.
    pub fn output_differences(&self, other: &RunManifest) -> Vec<String> {
        let a: BTreeMap<_, _> = self.outputs.iter().map(|o| (&o.path, &o.sha256)).collect();
        let b: BTreeMap<_, _> = other.outputs.iter().map(|o| (&o.path, &o.sha256)).collect();
        let mut diff: Vec<String> = a
            .iter()
            .filter(|(p, h)| b.get(*p) != Some(*h))
            .map(|(p, _)| p.to_string())
            .collect();
        diff.extend(b.keys().filter(|p| !a.contains_key(*p)).map(|p| p.to_string()));
        diff
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTime {
    pub stage: String,
    pub seconds: f64,
}

/// Collects outputs, hashes and timings while a run executes.
#[derive(Debug)]
pub(crate) struct RunRecorder {
    dir: PathBuf,
    seeds: BTreeMap<String, u64>,
    languages: BTreeMap<String, String>,
    models: BTreeMap<String, String>,
    outputs: Vec<OutputFile>,
    timings: Vec<StageTime>,
}

pub(crate) const TIMINGS_FILE: &str = "timings.json";
pub const MANIFEST_FILE: &str = "manifest.json";

impl RunRecorder {
    pub(crate) fn new(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e)).map_err(|e| e.in_stage("write"))?;
        Ok(RunRecorder {
            dir: dir.to_path_buf(),
            seeds: BTreeMap::new(),
            languages: BTreeMap::new(),
            models: BTreeMap::new(),
            outputs: Vec::new(),
            timings: Vec::new(),
        })
    }

    pub(crate) fn seed(&mut self, name: impl Into<String>, seed: u64) {
        self.seeds.insert(name.into(), seed);
    }

    /// Runs `f` as stage `stage`, timing it and tagging its errors.
    pub(crate) fn stage<T>(&mut self, stage: &'static str, f: impl FnOnce() -> Result<T>) -> Result<T> {
        let start = Instant::now();
        let out = f().map_err(|e| e.in_stage(stage));
        self.timings.push(StageTime {
            stage: stage.to_string(),
            seconds: start.elapsed().as_secs_f64(),
        });
        out
    }

    /// Writes `bytes` to `name` inside the run directory.
    pub(crate) fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        std::fs::write(&path, bytes)
            .map_err(|e| Error::io(&path, e))
            .map_err(|e| e.in_stage("write"))?;
        self.outputs.push(OutputFile {
            path: name.to_string(),
            sha256: sha256_hex(bytes),
            bytes: bytes.len() as u64,
        });
        Ok(())
    }

    /// Renders a CSV into memory, then writes it.
    pub(crate) fn write_csv(&mut self, name: &str, render: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<()> {
        let mut buf = Vec::new();
        render(&mut buf).map_err(|e| e.in_stage("write"))?;
        self.write(name, &buf)
    }

    pub(crate) fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let bytes = serde_json::to_vec_pretty(value).map_err(|e| Error::from(e).in_stage("write"))?;
        self.write(name, &bytes)
    }

    pub(crate) fn language(&mut self, role: impl Into<String>, json: &str) {
        self.languages.insert(role.into(), sha256_hex(json.as_bytes()));
    }

    /// Saves a model file and records its hash.
    pub(crate) fn model(&mut self, role: &str, json: &str) -> Result<()> {
        self.models.insert(role.to_string(), sha256_hex(json.as_bytes()));
        self.write(&format!("model_{role}.json"), json.as_bytes())
    }

    pub(crate) fn finish(mut self, config: &ExperimentConfig) -> Result<RunManifest> {
        let timings = serde_json::to_vec_pretty(&self.timings).map_err(|e| Error::from(e).in_stage("write"))?;
        let path = self.dir.join(TIMINGS_FILE);
        std::fs::write(&path, timings)
            .map_err(|e| Error::io(&path, e))
            .map_err(|e| e.in_stage("write"))?;
        self.outputs.sort_by(|a, b| a.path.cmp(&b.path));
        let manifest = RunManifest {
            format_version: MANIFEST_FORMAT_VERSION,
            config: config.clone(),
            seeds: self.seeds,
            languages: self.languages,
            models: self.models,
            outputs: self.outputs,
            timings_file: TIMINGS_FILE.to_string(),
        };
        let bytes = serde_json::to_vec_pretty(&manifest).map_err(|e| Error::from(e).in_stage("write"))?;
        let path = self.dir.join(MANIFEST_FILE);
        std::fs::write(&path, bytes)
            .map_err(|e| Error::io(&path, e))
            .map_err(|e| e.in_stage("write"))?;
        Ok(manifest)
    }
}
