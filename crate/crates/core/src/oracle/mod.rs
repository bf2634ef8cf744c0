//! Kinematic locomotion oracle: a capped point-mass walker that tries to
//! follow a trajectory and reports a normalized discounted reward.

mod dataset;
mod pairs;
mod walker;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use dataset::{
    build_plausibility_dataset, read_plausibility_csv, write_plausibility_csv, DatasetStats,
    PairLabel, PlausibilitySample,
};
pub use pairs::{
    align_to_pose, sample_implausible_pair, sample_plausible_pair, Perturbation, SamplingStats,
};
pub use walker::{rollout, rollout_trace, WalkerStep};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleParams {
    /// Speed cap, m/s.
    pub v_max: f64,
    /// Acceleration cap on the velocity vector, m/s^2.
    pub a_max: f64,
    /// Heading turn-rate cap, rad/s.
    pub turn_rate_max: f64,
    pub gamma: f64,
    pub w_follow: f64,
    pub w_energy: f64,
    /// Length scale of the tracking reward, m.
    pub follow_scale: f64,
}

impl Default for OracleParams {
    fn default() -> Self {
        Self {
            v_max: 2.5,
            a_max: 2.0,
            turn_rate_max: 2.0,
            gamma: 0.95,
            w_follow: 1.0,
            w_energy: 0.25,
            follow_scale: 0.5,
        }
    }
}

impl OracleParams {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !positive(self.v_max) || !positive(self.a_max) || !positive(self.turn_rate_max) {
            return Err(Error::Config("v_max, a_max and turn_rate_max must be positive".into()));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(Error::Config(format!("gamma must lie in (0, 1], got {}", self.gamma)));
        }
        if !(self.w_follow >= 0.0 && self.w_energy >= 0.0 && self.w_follow + self.w_energy > 0.0) {
            return Err(Error::Config("reward weights must be non-negative with a positive sum".into()));
        }
        if !positive(self.follow_scale) {
            return Err(Error::Config("follow_scale must be positive".into()));
        }
        Ok(())
    }
}
