//! Differentiable surrogate of the locomotion oracle: input canonicalization,
//! regression onto oracle rewards and plausibility scoring.

mod features;
mod model;
mod train;

pub use features::{canonical_frame, canonical_inputs, canonicalize, FeatureLayout};
pub use model::{LocoValCheckpoint, LocoValModel};
pub use train::{train_locoval, CurvePoint, LocoValConfig, LocoValReport};
