use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::datakit::ScenarioConfig;
use crate::error::{Error, Result};
use crate::filter::DEFAULT_LAMBDA;
use crate::locoval::LocoValConfig;
use crate::oracle::OracleParams;
use crate::predictor::PredictorConfig;

/// Environment variable naming the default output directory.
pub const OUT_ENV: &str = "TRAJPLAUS_OUT";
pub const DEFAULT_OUT: &str = "runs";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DataConfig {
    pub n_train_tracks: usize,
    pub n_eval_tracks: usize,
    pub n_poses: usize,
    /// Walking speeds depicted by the pose bank, m/s.
    pub pose_speed_range: (f64, f64),
    pub n_plausible: usize,
    pub n_implausible: usize,
    /// Window stride when cutting tracks into surrogate training trajectories.
    pub bank_stride: usize,
    /// Window stride for predictor training instances.
    pub train_stride: usize,
    /// Window stride for evaluation instances.
    pub eval_stride: usize,
    pub scenario: ScenarioConfig,
}

impl Default for DataConfig {
    fn default() -> Self {
        Self {
            n_train_tracks: 200,
            n_eval_tracks: 50,
            n_poses: 200,
            pose_speed_range: (0.6, 1.8),
            n_plausible: 2000,
            n_implausible: 2000,
            bank_stride: 4,
            train_stride: 2,
            eval_stride: 4,
            scenario: ScenarioConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalConfig {
    /// Threshold for the plausibility filter; `None` evaluates every candidate.
    pub lambda: Option<f64>,
    /// Score bins for the plausibility/error table.
    pub n_bins: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self { lambda: None, n_bins: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub lambdas: Vec<f64>,
    pub alphas: Vec<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self { lambdas: vec![0.5, 0.6, 0.65, DEFAULT_LAMBDA, 0.75, 0.8, 0.85, 0.9], alphas: vec![0.0, 1.0, 10.0, 100.0] }
    }
}

/// Every tunable of the pipeline. Sub-seeds are derived from `seed`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: u64,
    pub out_dir: Option<PathBuf>,
    pub data: DataConfig,
    pub oracle: OracleParams,
    pub locoval: LocoValConfig,
    pub predictor: PredictorConfig,
    pub eval: EvalConfig,
    pub sweep: SweepConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            out_dir: None,
            data: DataConfig::default(),
            oracle: OracleParams::default(),
            locoval: LocoValConfig::default(),
            predictor: PredictorConfig::default(),
            eval: EvalConfig::default(),
            sweep: SweepConfig::default(),
        }
    }
}

/// Offsets added to the master seed for each random stream.
pub(crate) mod stream {
    pub const TRAIN_TRACKS: u64 = 0;
    pub const EVAL_TRACKS: u64 = 1;
    pub const POSE_BANK: u64 = 2;
    pub const PAIRS: u64 = 3;
    pub const TRAIN_INSTANCES: u64 = 4;
    pub const EVAL_INSTANCES: u64 = 5;
    pub const LOCOVAL: u64 = 6;
    pub const PREDICTOR: u64 = 7;
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn sub_seed(&self, stream: u64) -> u64 {
        self.seed.wrapping_mul(1000).wrapping_add(stream)
    }

    /// Copies the derived seeds into the nested training configs so the
    /// echoed config shows the values actually used.
    pub fn resolve_seeds(&mut self) {
        self.locoval.train.seed = self.sub_seed(stream::LOCOVAL);
        self.predictor.train.seed = self.sub_seed(stream::PREDICTOR);
    }

    pub fn validate(&self) -> Result<()> {
        self.oracle.validate()?;
        self.data.scenario.validate().map_err(|e| Error::Config(e.to_string()))?;
        self.predictor.validate()?;
        let d = &self.data;
        if d.n_train_tracks == 0 || d.n_eval_tracks == 0 || d.n_poses == 0 {
            return Err(Error::Config("track and pose counts must be positive".into()));
        }
        if d.n_plausible + d.n_implausible == 0 {
            return Err(Error::Config("the plausibility dataset needs at least one pair".into()));
        }
        if let Some(l) = self.eval.lambda {
            check_lambda(l)?;
        }
        for &l in &self.sweep.lambdas {
            check_lambda(l)?;
        }
        if self.sweep.alphas.iter().any(|a| !(*a >= 0.0)) {
            return Err(Error::Config("sweep alphas must be non-negative".into()));
        }
        if self.eval.n_bins == 0 {
            return Err(Error::Config("n_bins must be positive".into()));
        }
        Ok(())
    }

    /// Output directory: the config value, else the environment variable,
    /// else `runs`.
    pub fn output_dir(&self) -> PathBuf {
        self.out_dir
            .clone()
            .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
    }
}

fn check_lambda(l: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&l) {
        return Err(Error::Config(format!("lambda must lie in [0, 1], got {l}")));
    }
    Ok(())
}
