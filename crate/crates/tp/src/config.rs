//! Stack configuration files.

use crate::error::{CliError, CliResult};
use serde::{Deserialize, Serialize};
use std::path::Path;
use tp_core::cov_layer::CovarianceLayer;
use tp_core::stack::{CopulaLayer, LayerStack};
use tp_core::trainer::TrainConfig;
use tp_core::warpings::MarginalLayer;

/// A stack description plus its training settings. Unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StackConfig {
    #[serde(default)]
    pub copula: Option<CopulaLayer>,
    #[serde(default)]
    pub covariance: Option<CovarianceLayer>,
    #[serde(default)]
    pub marginals: Vec<MarginalLayer>,
    #[serde(default)]
    pub train: TrainConfig,
}

impl StackConfig {
    pub fn from_stack(stack: &LayerStack, train: TrainConfig) -> Self {
        Self {
            copula: stack.copula.clone(),
            covariance: stack.covariance.clone(),
            marginals: stack.marginals.clone(),
            train,
        }
    }

    pub fn stack(&self) -> LayerStack {
        LayerStack::new(self.copula.clone(), self.covariance.clone(), self.marginals.clone())
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        let cfg: StackConfig = serde_json::from_str(text).map_err(|e| CliError::Parse(format!("config: {e}")))?;
        cfg.stack().validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Parse(m) => CliError::Parse(format!("{}: {m}", path.display())),
            other => other,
        })
    }
}
