//! Minimal differentiable layer: feed-forward networks, optimizers, schedules
//! and gradient verification.

mod checkpoint;
mod gradcheck;
mod mlp;
mod optim;

pub use checkpoint::{MlpCheckpoint, CHECKPOINT_SCHEMA_VERSION};
pub use gradcheck::{central_difference, grad_check, relative_error, GradCheckReport};
pub use mlp::{Backprop, ForwardCache, HiddenActivation, MlpModel, OutputActivation};
pub use optim::{cosine_lr, AdamW, Schedule, TrainConfig};
