//! Multi-head trajectory predictor: a shared MLP trunk with K linear heads,
//! trained on displacement losses plus an optional plausibility term from a
//! frozen surrogate.

mod losses;
mod model;
mod train;

pub use losses::{
    loss_emloco, loss_emloco_with_grad, loss_mean_mse, loss_minmse, loss_mse, loss_total, trajectory_mse,
    EmLocoForm,
};
pub use model::{PredictionSet, PredictorCheckpoint, PredictorLayout, PredictorModel, PREDICTOR_SCHEMA_VERSION};
pub use train::{
    instance_loss_and_grads, train_predictor, EpochLog, LossParts, PredictorConfig, PredictorGrads, TrajectoryLoss,
};
