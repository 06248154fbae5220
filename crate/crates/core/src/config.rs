//! Run configuration and the provenance header derived from it.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::jsonl::ArtifactHeader;

pub const TOOL_NAME: &str = "tempqa";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Version tag of the prompt layouts produced by [`crate::corpus::render`].
pub const RENDER_VERSION: &str = "reasonqa-v1";

/// Everything that influences an artifact's bytes. Worker count and the
/// output location are not part of it, so the same run written elsewhere or
/// with more threads yields identical files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: String,
    pub seed: u64,
    pub facts: Option<PathBuf>,
    pub templates: Option<PathBuf>,
    pub params: BTreeMap<String, serde_json::Value>,
    pub render_version: String,
    pub strict: bool,
}

impl RunConfig {
    pub fn new(command: impl Into<String>, seed: u64) -> Self {
        Self {
            command: command.into(),
            seed,
            facts: None,
            templates: None,
            params: BTreeMap::new(),
            render_version: RENDER_VERSION.to_string(),
            strict: false,
        }
    }

    pub fn param(mut self, key: &str, value: impl Serialize) -> Self {
        self.params.insert(
            key.to_string(),
            serde_json::to_value(value).expect("serializable parameter"),
        );
        self
    }

    /// First 16 hex digits of the SHA-256 of the canonical JSON encoding.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("config serializes");
        hex::encode(&Sha256::digest(&canonical)[..8])
    }

    pub fn header(&self, kind: &str) -> ArtifactHeader {
        ArtifactHeader {
            tool: TOOL_NAME.to_string(),
            version: TOOL_VERSION.to_string(),
            kind: kind.to_string(),
            render_version: self.render_version.clone(),
            config_hash: self.hash(),
            config: serde_json::to_value(self).expect("config serializes"),
        }
    }
}

/// Location-independent reference to an input file: its name and the first
/// 16 hex digits of the SHA-256 of its contents.
pub fn input_ref(path: &Path) -> std::io::Result<serde_json::Value> {
    let bytes = std::fs::read(path)?;
    Ok(serde_json::json!({
        "name": path.file_name().map(|n| n.to_string_lossy().into_owned()),
        "sha256": hex::encode(&Sha256::digest(&bytes)[..8]),
    }))
}
