use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::datakit::TrainingInstance;
use crate::error::{Error, Result};
use crate::geometry::{add, heading_of, norm, rotate, sub, Vec2};
use crate::gradcore::{ForwardCache, HiddenActivation, MlpCheckpoint, MlpModel, OutputActivation};
use crate::humanoid::Pose;
use crate::trajectory::Trajectory;

pub const PREDICTOR_SCHEMA_VERSION: u32 = 1;

/// Shapes of the predictor input and output.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredictorLayout {
    pub t_p: usize,
    pub t_f: usize,
    pub include_pose: bool,
    /// Joint order of the pose block; empty without poses.
    pub joint_names: Vec<String>,
}

impl PredictorLayout {
    pub fn input_size(&self) -> usize {
        2 * self.t_p + if self.include_pose { 3 * self.joint_names.len() } else { 0 }
    }

    pub fn output_size(&self) -> usize {
        2 * self.t_f
    }

    pub fn validate(&self) -> Result<()> {
        if self.t_p < 2 || self.t_f < 2 {
            return Err(Error::Config(format!("t_p and t_f must be at least 2, got {} and {}", self.t_p, self.t_f)));
        }
        if self.include_pose && self.joint_names.is_empty() {
            return Err(Error::Config("pose input needs joint names".into()));
        }
        Ok(())
    }
}

/// K candidate futures, each starting after `anchor`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionSet {
    pub anchor: Vec2,
    pub trajectories: Vec<Trajectory>,
}

impl PredictionSet {
    pub fn k(&self) -> usize {
        self.trajectories.len()
    }
}

/// Past window and pose in the frame centred on the last observed point and
/// aligned with the last moving step.
#[derive(Debug, Clone)]
pub(crate) struct EncodedInput {
    pub features: Vec<f64>,
    pub anchor: Vec2,
    pub heading: f64,
}

#[derive(Debug, Clone)]
pub struct PredictorModel {
    layout: PredictorLayout,
    trunk: MlpModel,
    heads: Vec<MlpModel>,
}

fn past_heading(points: &[Vec2]) -> f64 {
    points
        .windows(2)
        .rev()
        .map(|w| sub(w[1], w[0]))
        .find(|d| norm(*d) > 1e-9)
        .map_or(0.0, heading_of)
}

impl PredictorModel {
    /// Trunk `[input, hidden...]` with relu throughout, and `k` linear heads
    /// drawn one after another from `rng`, so every head starts differently.
    pub fn new<R: Rng + ?Sized>(layout: PredictorLayout, hidden: &[usize], k: usize, rng: &mut R) -> Result<Self> {
        layout.validate()?;
        if k == 0 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        if hidden.is_empty() {
            return Err(Error::Config("the trunk needs at least one hidden layer".into()));
        }
        let mut sizes = vec![layout.input_size()];
        sizes.extend_from_slice(hidden);
        let trunk = MlpModel::new(&sizes, HiddenActivation::Relu, OutputActivation::Relu, rng)?;
        let width = *hidden.last().unwrap();
        let heads = (0..k)
            .map(|_| MlpModel::new(&[width, layout.output_size()], HiddenActivation::Relu, OutputActivation::Identity, rng))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { layout, trunk, heads })
    }

    pub fn from_parts(layout: PredictorLayout, trunk: MlpModel, heads: Vec<MlpModel>) -> Result<Self> {
        layout.validate()?;
        if trunk.input_size() != layout.input_size() {
            return Err(Error::Shape { expected: layout.input_size(), got: trunk.input_size() });
        }
        if heads.is_empty() {
            return Err(Error::Config("k must be at least 1".into()));
        }
        for h in &heads {
            if h.input_size() != trunk.output_size() {
                return Err(Error::Shape { expected: trunk.output_size(), got: h.input_size() });
            }
            if h.output_size() != layout.output_size() {
                return Err(Error::Shape { expected: layout.output_size(), got: h.output_size() });
            }
        }
        Ok(Self { layout, trunk, heads })
    }

    pub fn layout(&self) -> &PredictorLayout {
        &self.layout
    }

    pub fn k(&self) -> usize {
        self.heads.len()
    }

    pub fn trunk(&self) -> &MlpModel {
        &self.trunk
    }

    pub fn heads(&self) -> &[MlpModel] {
        &self.heads
    }

    pub(crate) fn trunk_mut(&mut self) -> &mut MlpModel {
        &mut self.trunk
    }

    pub(crate) fn heads_mut(&mut self) -> &mut [MlpModel] {
        &mut self.heads
    }

    pub fn n_params(&self) -> usize {
        self.trunk.n_params() + self.heads.iter().map(MlpModel::n_params).sum::<usize>()
    }

    pub(crate) fn encode(&self, past: &Trajectory, pose: Option<&Pose>) -> Result<EncodedInput> {
        if past.len() != self.layout.t_p {
            return Err(Error::Shape { expected: self.layout.t_p, got: past.len() });
        }
        let anchor = past.last();
        let heading = past_heading(past.points());
        let mut features = Vec::with_capacity(self.layout.input_size());
        for &p in past.points() {
            features.extend_from_slice(&rotate(sub(p, anchor), -heading));
        }
        if self.layout.include_pose {
            let pose = pose.ok_or_else(|| Error::input("predictor expects a pose for the last observed frame"))?;
            if !pose.names().eq(self.layout.joint_names.iter().map(String::as_str)) {
                return Err(Error::input("pose joints do not match the predictor layout"));
            }
            for (_, j) in pose.iter() {
                let r = rotate(sub([j[0], j[1]], anchor), -heading);
                features.extend_from_slice(&[r[0], r[1], j[2]]);
            }
        }
        Ok(EncodedInput { features, anchor, heading })
    }

    /// Turns canonical head displacements into world points by rotating back
    /// and summing from the anchor.
    pub(crate) fn decode(&self, out: &[f64], input: &EncodedInput, dt: f64) -> Result<Trajectory> {
        let mut p = input.anchor;
        let pts = out
            .chunks_exact(2)
            .map(|d| {
                p = add(p, rotate([d[0], d[1]], input.heading));
                p
            })
            .collect();
        Trajectory::new(pts, dt)
    }

    pub(crate) fn forward_cached(&self, input: &EncodedInput) -> Result<(ForwardCache, Vec<ForwardCache>)> {
        let trunk = self.trunk.forward_cached(&input.features)?;
        let heads = self
            .heads
            .iter()
            .map(|h| h.forward_cached(trunk.output()))
            .collect::<Result<Vec<_>>>()?;
        Ok((trunk, heads))
    }

    /// K futures of `t_f` points from a past window and, when the layout uses
    /// poses, the pose at the last observed frame.
    pub fn predict(&self, past: &Trajectory, pose: Option<&Pose>) -> Result<PredictionSet> {
        let input = self.encode(past, pose)?;
        let z = self.trunk.forward(&input.features)?;
        let trajectories = self
            .heads
            .iter()
            .map(|h| self.decode(&h.forward(&z)?, &input, past.dt()))
            .collect::<Result<Vec<_>>>()?;
        Ok(PredictionSet { anchor: input.anchor, trajectories })
    }

    pub fn predict_instance(&self, inst: &TrainingInstance) -> Result<PredictionSet> {
        self.predict(&inst.past, inst.observable.joints.as_ref())
    }

    /// Relu on/off pattern of the trunk for this input.
    pub fn activation_pattern(&self, past: &Trajectory, pose: Option<&Pose>) -> Result<Vec<bool>> {
        self.trunk.activation_pattern(&self.encode(past, pose)?.features)
    }

    pub fn to_checkpoint(&self, alpha: f64, locoval_checksum: Option<String>, seed: Option<u64>) -> PredictorCheckpoint {
        PredictorCheckpoint {
            schema_version: PREDICTOR_SCHEMA_VERSION,
            layout: self.layout.clone(),
            k: self.k(),
            alpha,
            locoval_checksum,
            trunk: MlpCheckpoint::from_model(&self.trunk, seed, None),
            heads: self.heads.iter().map(|h| MlpCheckpoint::from_model(h, seed, None)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredictorCheckpoint {
    pub schema_version: u32,
    pub layout: PredictorLayout,
    pub k: usize,
    /// Plausibility-loss weight the model was trained with.
    pub alpha: f64,
    /// Checksum of the surrogate used during training, if any.
    pub locoval_checksum: Option<String>,
    pub trunk: MlpCheckpoint,
    pub heads: Vec<MlpCheckpoint>,
}

impl PredictorCheckpoint {
    pub fn to_model(&self) -> Result<PredictorModel> {
        if self.schema_version != PREDICTOR_SCHEMA_VERSION {
            return Err(Error::Config(format!("unsupported predictor schema version {}", self.schema_version)));
        }
        if self.heads.len() != self.k {
            return Err(Error::Shape { expected: self.k, got: self.heads.len() });
        }
        let heads = self.heads.iter().map(MlpCheckpoint::to_model).collect::<Result<Vec<_>>>()?;
        PredictorModel::from_parts(self.layout.clone(), self.trunk.to_model()?, heads)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string(self)?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}
