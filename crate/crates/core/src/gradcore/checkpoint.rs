use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{HiddenActivation, MlpModel, OutputActivation, TrainConfig};
use crate::error::{Error, Result};

pub const CHECKPOINT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Activations {
    pub hidden: HiddenActivation,
    pub output: OutputActivation,
}

/// Self-describing JSON form of an [`MlpModel`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MlpCheckpoint {
    pub schema_version: u32,
    pub layer_sizes: Vec<usize>,
    pub activations: Activations,
    /// Row-major weights then biases, layer by layer.
    pub params: Vec<f64>,
    pub seed: Option<u64>,
    pub train_config: Option<TrainConfig>,
}

impl MlpCheckpoint {
    pub fn from_model(model: &MlpModel, seed: Option<u64>, train_config: Option<TrainConfig>) -> Self {
        Self {
            schema_version: CHECKPOINT_SCHEMA_VERSION,
            layer_sizes: model.layer_sizes().to_vec(),
            activations: Activations {
                hidden: model.hidden_activation(),
                output: model.output_activation(),
            },
            params: model.params().to_vec(),
            seed,
            train_config,
        }
    }

    pub fn to_model(&self) -> Result<MlpModel> {
        if self.schema_version != CHECKPOINT_SCHEMA_VERSION {
            return Err(Error::input(format!(
                "unsupported checkpoint schema version {}",
                self.schema_version
            )));
        }
        MlpModel::from_parts(
            self.layer_sizes.clone(),
            self.activations.hidden,
            self.activations.output,
            self.params.clone(),
        )
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}
