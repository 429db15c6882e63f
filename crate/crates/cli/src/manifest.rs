//! Run manifests: every artifact-writing subcommand leaves a ledger of what
//! it consumed, what it produced, and under which settings and seeds.
//!
//! Digests are plain SHA-256 over file bytes and therefore recomputable by
//! anyone holding the artifacts; [`verify_manifest`] does exactly that.
//! Manifests carry wall-clock timings, so they are the one output class
//! that is not byte-identical across reruns. The artifacts they describe
//! are.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use readmit_core::{Error, Result, SCHEMA_VERSION};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArtifactRef {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: String,
    pub command: String,
    /// SHA-256 of the canonical `key = value` rendering of `config`.
    pub config_digest: String,
    /// Resolved settings the run actually used (flag/file/default merged).
    pub config: BTreeMap<String, String>,
    pub seeds: BTreeMap<String, u64>,
    pub inputs: Vec<ArtifactRef>,
    pub outputs: Vec<ArtifactRef>,
    pub timings_ms: BTreeMap<String, u64>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut hex = String::with_capacity(64);
    for byte in digest.as_slice() {
        hex.push_str(&format!("{byte:02x}"));
    }
    hex
}

pub fn file_digest(path: &Path) -> Result<String> {
    Ok(sha256_hex(&fs::read(path)?))
}

/// The digest preimage: sorted `key = value` lines. Sorting makes the
/// digest independent of insertion order.
fn canonical_config(config: &BTreeMap<String, String>) -> String {
    let mut text = String::new();
    for (key, value) in config {
        text.push_str(key);
        text.push_str(" = ");
        text.push_str(value);
        text.push('\n');
    }
    text
}

pub struct ManifestBuilder {
    manifest: RunManifest,
    started: Instant,
}

impl ManifestBuilder {
    pub fn new(command: &str) -> ManifestBuilder {
        ManifestBuilder {
            manifest: RunManifest {
                schema_version: SCHEMA_VERSION.to_string(),
                command: command.to_string(),
                config_digest: String::new(),
                config: BTreeMap::new(),
                seeds: BTreeMap::new(),
                inputs: Vec::new(),
                outputs: Vec::new(),
                timings_ms: BTreeMap::new(),
            },
            started: Instant::now(),
        }
    }

    pub fn setting(&mut self, key: &str, value: impl Display) -> &mut Self {
        self.manifest.config.insert(key.to_string(), value.to_string());
        self
    }

    pub fn seed(&mut self, name: &str, value: u64) -> &mut Self {
        self.manifest.seeds.insert(name.to_string(), value);
        self
    }

    /// Hashes an input file as it exists now, before the command mutates
    /// anything.
    pub fn input(&mut self, path: &Path) -> Result<&mut Self> {
        let digest = file_digest(path)?;
        self.manifest.inputs.push(ArtifactRef { path: path.display().to_string(), sha256: digest });
        Ok(self)
    }

    /// Hashes a produced file; call after writing it.
    pub fn output(&mut self, path: &Path) -> Result<&mut Self> {
        let digest = file_digest(path)?;
        self.manifest
            .outputs
            .push(ArtifactRef { path: path.display().to_string(), sha256: digest });
        Ok(self)
    }

    pub fn timing_ms(&mut self, stage: &str, elapsed_ms: u64) -> &mut Self {
        self.manifest.timings_ms.insert(stage.to_string(), elapsed_ms);
        self
    }

    /// Seals the manifest (total timing + config digest) and writes it.
    pub fn finish(mut self, path: &Path) -> Result<RunManifest> {
        let total = self.started.elapsed().as_millis() as u64;
        self.manifest.timings_ms.insert("total".to_string(), total);
        self.manifest.config_digest = sha256_hex(canonical_config(&self.manifest.config).as_bytes());
        let mut json = serde_json::to_string_pretty(&self.manifest)?;
        json.push('\n');
        fs::write(path, json)?;
        Ok(self.manifest)
    }
}

/// Manifest file name for a command that writes into a directory.
pub fn dir_manifest_path(out_dir: &Path, command: &str) -> PathBuf {
    out_dir.join(format!("{command}.manifest.json"))
}

/// Manifest file name for a command addressed by a single output file:
/// `cohort.csv` gets `cohort.manifest.json` beside it.
pub fn file_manifest_path(out: &Path) -> PathBuf {
    out.with_extension("manifest.json")
}

/// Reloads a manifest and recomputes every digest. Relative artifact paths
/// are resolved against `base` (the directory the command ran in).
pub fn verify_manifest(manifest_path: &Path, base: &Path) -> Result<RunManifest> {
    let manifest: RunManifest = serde_json::from_str(&fs::read_to_string(manifest_path)?)?;
    if manifest.schema_version != SCHEMA_VERSION {
        return Err(Error::invalid_config(format!(
            "manifest schema version {} not supported (expected {SCHEMA_VERSION})",
            manifest.schema_version
        )));
    }
    let expected = sha256_hex(canonical_config(&manifest.config).as_bytes());
    if expected != manifest.config_digest {
        return Err(Error::invalid_input(format!(
            "manifest config digest mismatch: recorded {}, recomputed {expected}",
            manifest.config_digest
        )));
    }
    for artifact in manifest.inputs.iter().chain(&manifest.outputs) {
        let path = PathBuf::from(&artifact.path);
        let resolved = if path.is_absolute() { path } else { base.join(path) };
        let actual = file_digest(&resolved)?;
        if actual != artifact.sha256 {
            return Err(Error::invalid_input(format!(
                "digest mismatch for {}: recorded {}, recomputed {actual}",
                artifact.path, artifact.sha256
            )));
        }
    }
    Ok(manifest)
}
