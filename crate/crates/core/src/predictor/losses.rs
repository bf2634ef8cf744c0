use serde::{Deserialize, Serialize};

use super::model::PredictionSet;
use crate::error::{Error, Result};
use crate::geometry::{scale, Vec2};
use crate::humanoid::ObservableState;
use crate::locoval::LocoValModel;
use crate::trajectory::Trajectory;

/// How surrogate scores become a loss.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmLocoForm {
    /// Mean of (score - 1)^2 over heads.
    #[default]
    SigmoidTarget,
    /// Mean of -score over heads.
    NegativeScore,
}

/// Mean over frames and coordinates of the squared error.
pub fn trajectory_mse(pred: &Trajectory, gt: &Trajectory) -> Result<f64> {
    if pred.len() != gt.len() {
        return Err(Error::Shape { expected: gt.len(), got: pred.len() });
    }
    let s: f64 = pred
        .points()
        .iter()
        .zip(gt.points())
        .map(|(p, g)| (p[0] - g[0]).powi(2) + (p[1] - g[1]).powi(2))
        .sum();
    Ok(s / (2 * gt.len()) as f64)
}

/// Squared-error loss of a single-head prediction.
pub fn loss_mse(pred: &PredictionSet, gt: &Trajectory) -> Result<f64> {
    if pred.k() != 1 {
        return Err(Error::input(format!("plain MSE expects one head, got {}", pred.k())));
    }
    trajectory_mse(&pred.trajectories[0], gt)
}

/// Smallest per-head MSE and the head achieving it, lowest index on ties.
pub fn loss_minmse(pred: &PredictionSet, gt: &Trajectory) -> Result<(f64, usize)> {
    if pred.k() == 0 {
        return Err(Error::input("prediction set is empty"));
    }
    let mut best = (f64::INFINITY, 0);
    for (k, t) in pred.trajectories.iter().enumerate() {
        let l = trajectory_mse(t, gt)?;
        if l < best.0 {
            best = (l, k);
        }
    }
    Ok(best)
}

/// Per-head MSE averaged over heads.
pub fn loss_mean_mse(pred: &PredictionSet, gt: &Trajectory) -> Result<f64> {
    if pred.k() == 0 {
        return Err(Error::input("prediction set is empty"));
    }
    let mut s = 0.0;
    for t in &pred.trajectories {
        s += trajectory_mse(t, gt)?;
    }
    Ok(s / pred.k() as f64)
}

fn emloco_term(form: EmLocoForm, score: f64) -> (f64, f64) {
    match form {
        EmLocoForm::SigmoidTarget => ((score - 1.0).powi(2), 2.0 * (score - 1.0)),
        EmLocoForm::NegativeScore => (-score, -1.0),
    }
}

/// Plausibility loss averaged over all heads.
pub fn loss_emloco(locoval: &LocoValModel, pred: &PredictionSet, obs: &ObservableState, form: EmLocoForm) -> Result<f64> {
    if pred.k() == 0 {
        return Err(Error::input("prediction set is empty"));
    }
    let mut s = 0.0;
    for t in &pred.trajectories {
        s += emloco_term(form, locoval.score(t, obs)?).0;
    }
    Ok(s / pred.k() as f64)
}

/// Plausibility loss plus its gradient with respect to every point of every head.
pub fn loss_emloco_with_grad(
    locoval: &LocoValModel,
    pred: &PredictionSet,
    obs: &ObservableState,
    form: EmLocoForm,
) -> Result<(f64, Vec<Vec<Vec2>>)> {
    if pred.k() == 0 {
        return Err(Error::input("prediction set is empty"));
    }
    let k = pred.k() as f64;
    let mut loss = 0.0;
    let mut grads = Vec::with_capacity(pred.k());
    for t in &pred.trajectories {
        let (score, g) = locoval.score_with_grad(t, obs)?;
        let (l, dl) = emloco_term(form, score);
        loss += l;
        grads.push(g.into_iter().map(|v| scale(v, dl / k)).collect());
    }
    Ok((loss / k, grads))
}

pub fn loss_total(l_t: f64, l_e: f64, alpha: f64) -> f64 {
    l_t + alpha * l_e
}
