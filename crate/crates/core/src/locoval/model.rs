use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::features::{canonical_frame, canonicalize, displacement_grad_to_points, FeatureLayout};
use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::gradcore::{MlpCheckpoint, MlpModel, OutputActivation, TrainConfig};
use crate::humanoid::ObservableState;
use crate::trajectory::Trajectory;

/// Trained plausibility surrogate. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct LocoValModel {
    net: MlpModel,
    layout: FeatureLayout,
}

impl LocoValModel {
    pub fn new(net: MlpModel, layout: FeatureLayout) -> Result<Self> {
        layout.validate()?;
        if net.input_size() != layout.input_size() {
            return Err(Error::Shape { expected: layout.input_size(), got: net.input_size() });
        }
        if net.output_size() != 1 || net.output_activation() != OutputActivation::Sigmoid {
            return Err(Error::Config("surrogate network must end in a single sigmoid unit".into()));
        }
        Ok(Self { net, layout })
    }

    pub fn net(&self) -> &MlpModel {
        &self.net
    }

    pub fn layout(&self) -> &FeatureLayout {
        &self.layout
    }

    pub fn features(&self, traj: &Trajectory, obs: &ObservableState) -> Result<Vec<f64>> {
        canonicalize(&self.layout, traj, obs)
    }

    /// Plausibility in (0, 1).
    pub fn score(&self, traj: &Trajectory, obs: &ObservableState) -> Result<f64> {
        Ok(self.net.forward(&self.features(traj, obs)?)?[0])
    }

    /// Score plus its gradient with respect to every trajectory point.
    pub fn score_with_grad(&self, traj: &Trajectory, obs: &ObservableState) -> Result<(f64, Vec<Vec2>)> {
        let f = self.features(traj, obs)?;
        let cache = self.net.forward_cached(&f)?;
        let score = cache.output()[0];
        let mut scratch = vec![0.0; self.net.n_params()];
        let dfeat = self.net.backward_into(&cache, &[1.0], &mut scratch)?;
        let (_, heading) = canonical_frame(&self.layout, traj, obs)?;
        Ok((score, displacement_grad_to_points(&dfeat[..2 * self.layout.t_f], heading)))
    }

    pub fn score_batch(&self, candidates: &[Trajectory], obs: &ObservableState) -> Result<Vec<f64>> {
        candidates.iter().map(|c| self.score(c, obs)).collect()
    }

    /// Relu on/off pattern of the surrogate for this input.
    pub fn activation_pattern(&self, traj: &Trajectory, obs: &ObservableState) -> Result<Vec<bool>> {
        self.net.activation_pattern(&self.features(traj, obs)?)
    }

    /// SHA-256 over the layout and the raw parameter bits.
    pub fn checksum(&self) -> String {
        let mut h = Sha256::new();
        h.update(serde_json::to_vec(&self.layout).expect("layout serializes"));
        for s in self.net.layer_sizes() {
            h.update((*s as u64).to_le_bytes());
        }
        for p in self.net.params() {
            h.update(p.to_bits().to_le_bytes());
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn to_checkpoint(&self, seed: Option<u64>, train_config: Option<TrainConfig>) -> LocoValCheckpoint {
        LocoValCheckpoint {
            model: MlpCheckpoint::from_model(&self.net, seed, train_config),
            feature_layout: self.layout.clone(),
        }
    }

    pub fn save(&self, path: &Path, seed: Option<u64>, train_config: Option<TrainConfig>) -> Result<()> {
        let text = serde_json::to_string_pretty(&self.to_checkpoint(seed, train_config))?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let ck: LocoValCheckpoint = serde_json::from_str(&text)?;
        ck.to_model()
    }
}

/// Network checkpoint fields plus the feature layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocoValCheckpoint {
    #[serde(flatten)]
    pub model: MlpCheckpoint,
    pub feature_layout: FeatureLayout,
}

impl LocoValCheckpoint {
    pub fn to_model(&self) -> Result<LocoValModel> {
        LocoValModel::new(self.model.to_model()?, self.feature_layout.clone())
    }
}
