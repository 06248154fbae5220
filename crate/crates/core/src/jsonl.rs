//! JSON-lines reading and writing with an optional provenance header line.
//!
//! A header is a single object `{"_meta": {...}}` on the first line. Readers
//! accept files with or without one.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

pub const HEADER_KEY: &str = "_meta";

#[derive(Debug, thiserror::Error)]
pub enum JsonlError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: line {line}: {message}")]
    Record {
        path: PathBuf,
        line: usize,
        message: String,
    },
}

/// Provenance attached to every artifact the tool writes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArtifactHeader {
    pub tool: String,
    pub version: String,
    pub kind: String,
    pub render_version: String,
    pub config_hash: String,
    pub config: serde_json::Value,
}

#[derive(Serialize, Deserialize)]
struct HeaderLine {
    #[serde(rename = "_meta")]
    meta: ArtifactHeader,
}

pub fn is_header_line(line: &str) -> bool {
    line.starts_with('{')
        && serde_json::from_str::<serde_json::Map<String, serde_json::Value>>(line)
            .map(|m| m.len() == 1 && m.contains_key(HEADER_KEY))
            .unwrap_or(false)
}

#[derive(Debug, Clone)]
pub struct JsonlFile<T> {
    pub header: Option<ArtifactHeader>,
    pub records: Vec<T>,
}

pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<JsonlFile<T>, JsonlError> {
    let file = File::open(path).map_err(|source| JsonlError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_jsonl_from(BufReader::new(file), path)
}

pub fn read_jsonl_from<T: DeserializeOwned, R: BufRead>(
    reader: R,
    path: &Path,
) -> Result<JsonlFile<T>, JsonlError> {
    let mut header = None;
    let mut records = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|source| JsonlError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let err = |message: String| JsonlError::Record {
            path: path.to_path_buf(),
            line: i + 1,
            message,
        };
        if is_header_line(trimmed) {
            if header.is_some() || !records.is_empty() {
                return Err(err("header line must be the first record".into()));
            }
            let h: HeaderLine = serde_json::from_str(trimmed).map_err(|e| err(e.to_string()))?;
            header = Some(h.meta);
            continue;
        }
        records.push(serde_json::from_str(trimmed).map_err(|e| err(e.to_string()))?);
    }
    Ok(JsonlFile { header, records })
}

pub fn write_jsonl_to<T: Serialize, W: Write>(
    mut writer: W,
    header: Option<&ArtifactHeader>,
    records: &[T],
) -> std::io::Result<()> {
    if let Some(h) = header {
        serde_json::to_writer(&mut writer, &HeaderLine { meta: h.clone() })?;
        writer.write_all(b"\n")?;
    }
    for r in records {
        serde_json::to_writer(&mut writer, r)?;
        writer.write_all(b"\n")?;
    }
    writer.flush()
}

pub fn write_jsonl<T: Serialize>(
    path: &Path,
    header: Option<&ArtifactHeader>,
    records: &[T],
) -> Result<(), JsonlError> {
    let io_err = |source| JsonlError::Io {
        path: path.to_path_buf(),
        source,
    };
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(io_err)?;
    }
    let file = File::create(path).map_err(io_err)?;
    write_jsonl_to(BufWriter::new(file), header, records).map_err(io_err)
}
