//! Deterministic, atomic output files and their manifest.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::RawConfig;
use crate::error::CliError;

/// First 16 hex digits of `sha256(canonical config ‖ seed)`. The output
/// section is left out, so moving the output directory keeps the id.
pub fn run_id(raw: &RawConfig, seed: u64) -> String {
    let mut content = raw.clone();
    content.output = Default::default();
    let canonical = serde_json::to_string(&content).expect("config serializes");
    let mut hasher = Sha256::new();
    hasher.update(canonical.as_bytes());
    hasher.update(b"\nseed=");
    hasher.update(seed.to_string().as_bytes());
    hex::encode(hasher.finalize())[..16].to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub file: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub command: String,
    pub run_id: String,
    pub seed: u64,
    pub files: Vec<ManifestEntry>,
}

/// Collects the files of one run; [`OutputSink::finish`] writes the manifest.
pub struct OutputSink {
    dir: PathBuf,
    manifest: Manifest,
}

impl OutputSink {
    pub fn new(dir: &Path, command: &str, run_id: String, seed: u64) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(OutputSink {
            dir: dir.to_path_buf(),
            manifest: Manifest {
                command: command.to_string(),
                run_id,
                seed,
                files: Vec::new(),
            },
        })
    }

    pub fn stem(&self) -> String {
        format!("{}_{}", self.manifest.command, self.manifest.run_id)
    }

    /// Writes `bytes` to a temporary file in the target directory and renames
    /// it into place, so a failed run never leaves a partial file behind.
    fn write_atomic(&self, name: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
        let path = self.dir.join(name);
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir).map_err(|e| CliError::io(&self.dir, e))?;
        tmp.write_all(bytes)
            .and_then(|_| tmp.as_file().sync_all())
            .map_err(|e| CliError::io(tmp.path(), e))?;
        tmp.persist(&path).map_err(|e| CliError::io(&path, e.error))?;
        Ok(path)
    }

    fn record(&mut self, name: String, bytes: &[u8]) -> Result<PathBuf, CliError> {
        let path = self.write_atomic(&name, bytes)?;
        self.manifest.files.push(ManifestEntry {
            file: name,
            sha256: hex::encode(Sha256::digest(bytes)),
            bytes: bytes.len(),
        });
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&mut self, suffix: &str, value: &T) -> Result<PathBuf, CliError> {
        let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| CliError::Runtime(e.to_string()))?;
        bytes.push(b'\n');
        self.record(format!("{}{suffix}.json", self.stem()), &bytes)
    }

    pub fn write_csv(&mut self, suffix: &str, table: Table) -> Result<PathBuf, CliError> {
        let bytes = table.into_bytes()?;
        self.record(format!("{}{suffix}.csv", self.stem()), &bytes)
    }

    pub fn finish(self) -> Result<Manifest, CliError> {
        let name = format!("{}.manifest.json", self.stem());
        let mut bytes = serde_json::to_vec_pretty(&self.manifest).map_err(|e| CliError::Runtime(e.to_string()))?;
        bytes.push(b'\n');
        self.write_atomic(&name, &bytes)?;
        Ok(self.manifest)
    }
}

/// Full-precision, locale-free float formatting for tables.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{x:.16e}")
    }
}

/// An in-memory CSV table with a fixed header.
pub struct Table {
    writer: csv::Writer<Vec<u8>>,
    width: usize,
}

impl Table {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Result<Self, CliError> {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer
            .write_record(header.iter().map(AsRef::as_ref))
            .map_err(|e| CliError::Runtime(e.to_string()))?;
        Ok(Table {
            writer,
            width: header.len(),
        })
    }

    pub fn row(&mut self, fields: Vec<String>) -> Result<(), CliError> {
        debug_assert_eq!(fields.len(), self.width, "row width");
        self.writer
            .write_record(&fields)
            .map_err(|e| CliError::Runtime(e.to_string()))
    }

    fn into_bytes(self) -> Result<Vec<u8>, CliError> {
        self.writer.into_inner().map_err(|e| CliError::Runtime(e.to_string()))
    }
}

pub fn numbered(prefix: &str, n: usize) -> impl Iterator<Item = String> + '_ {
    (1..=n).map(move |i| format!("{prefix}{i}"))
}
