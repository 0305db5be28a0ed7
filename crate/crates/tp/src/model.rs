//! Trained model files: configuration with fitted parameters, the training
//! data and a content hash.

use crate::config::StackConfig;
use crate::data::{write_atomic, Series};
use crate::error::{CliError, CliResult};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::Path;
use tp_core::trainer::FitReport;

pub const MODEL_FORMAT: &str = "tp-model/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub format: String,
    /// SHA-256 over the serialized `config` and `data`.
    pub hash: String,
    pub config: StackConfig,
    pub data: Series,
    pub report: FitReport,
}

pub fn content_hash(config: &StackConfig, data: &Series) -> String {
    let bytes = serde_json::to_vec(&(config, data)).expect("model content serializes");
    hex::encode(Sha256::digest(bytes))
}

impl ModelFile {
    pub fn new(config: StackConfig, data: Series, report: FitReport) -> Self {
        let hash = content_hash(&config, &data);
        Self { format: MODEL_FORMAT.into(), hash, config, data, report }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        let m: ModelFile = serde_json::from_str(text).map_err(|e| CliError::Parse(format!("model: {e}")))?;
        if m.format != MODEL_FORMAT {
            return Err(CliError::Validation(format!("unsupported model format `{}`", m.format)));
        }
        let expect = content_hash(&m.config, &m.data);
        if expect != m.hash {
            return Err(CliError::Validation(format!(
                "model hash mismatch: file says {}, content gives {expect}",
                m.hash
            )));
        }
        m.config.stack().validate()?;
        Ok(m)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn save(&self, path: &Path) -> CliResult<()> {
        write_atomic(path, self.to_json().as_bytes())
    }
}
