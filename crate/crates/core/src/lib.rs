//! Trajectory plausibility toolkit.
//!
//! A kinematic locomotion oracle scores how well a walker starting from a
//! given humanoid state can follow a trajectory. A differentiable surrogate
//! of that score is learned, used as a regularizer when training multi-head
//! trajectory predictors, and used at inference to reject implausible
//! candidate trajectories.

pub mod cli;
pub mod datakit;
pub mod error;
pub mod filter;
pub mod geometry;
pub mod gradcore;
pub mod humanoid;
pub mod locoval;
pub mod metrics;
pub mod oracle;
pub mod predictor;
pub mod trajectory;

pub use error::{Error, Result};
pub use humanoid::{HumanoidState, ObservableState, Pose, REQUIRED_JOINTS};
pub use trajectory::{Trajectory, DEFAULT_DT};
