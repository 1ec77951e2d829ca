//! Atomic artifact writing and run manifests.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{io_err, CliError, Result};

/// Writes `bytes` to `path` through a temporary file in the same directory,
/// then renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err(dir))?;
    tmp.write_all(bytes).map_err(io_err(path))?;
    tmp.as_file().sync_all().map_err(io_err(path))?;
    tmp.persist(path).map_err(|e| CliError::Io {
        path: path.display().to_string(),
        source: e.error,
    })?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|source| CliError::Json {
        context: path.display().to_string(),
        source,
    })?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

/// Serializes rows through the csv writer into memory, then writes atomically.
pub fn write_csv<R: Serialize>(path: &Path, header: &[&str], rows: impl IntoIterator<Item = R>) -> Result<()> {
    let csv_err = |source| CliError::Csv {
        context: path.display().to_string(),
        source,
    };
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.serialize(row).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io {
        path: path.display().to_string(),
        source: e.into_error(),
    })?;
    write_atomic(path, &bytes)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputFile {
    pub path: String,
    pub sha256: String,
}

/// Record of one run: what was asked for, what was written, and a hash of
/// the inputs. Equal `input_hash` values imply byte-identical CSV outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub config: serde_json::Value,
    pub outputs: Vec<OutputFile>,
    pub wall_clock_seconds: f64,
    pub input_hash: String,
    pub version: String,
}

pub const MANIFEST_FILE: &str = "manifest.json";

impl RunManifest {
    /// Hash of the subcommand and the config echo. `serde_json` maps keep
    /// their keys sorted, so the encoding is canonical.
    pub fn input_hash(subcommand: &str, config: &serde_json::Value) -> String {
        let canon = serde_json::json!({ "subcommand": subcommand, "config": config });
        sha256_hex(canon.to_string().as_bytes())
    }

    /// Hashes each output file and writes the manifest into `dir`.
    pub fn write(
        dir: &Path,
        subcommand: &str,
        config: serde_json::Value,
        outputs: &[PathBuf],
        wall_clock: Duration,
    ) -> Result<RunManifest> {
        let mut files = Vec::with_capacity(outputs.len());
        for p in outputs {
            let bytes = std::fs::read(p).map_err(io_err(p))?;
            let name = p.strip_prefix(dir).unwrap_or(p);
            files.push(OutputFile {
                path: name.display().to_string(),
                sha256: sha256_hex(&bytes),
            });
        }
        let manifest = RunManifest {
            subcommand: subcommand.to_string(),
            input_hash: Self::input_hash(subcommand, &config),
            config,
            outputs: files,
            wall_clock_seconds: wall_clock.as_secs_f64(),
            version: env!("CARGO_PKG_VERSION").to_string(),
        };
        write_json(&dir.join(MANIFEST_FILE), &manifest)?;
        Ok(manifest)
    }

    pub fn read(dir: &Path) -> Result<RunManifest> {
        let path = dir.join(MANIFEST_FILE);
        let text = std::fs::read_to_string(&path).map_err(io_err(&path))?;
        serde_json::from_str(&text).map_err(|source| CliError::Json {
            context: path.display().to_string(),
            source,
        })
    }
}
