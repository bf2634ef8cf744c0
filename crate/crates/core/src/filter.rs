//! Inference-time rejection of candidate trajectories whose plausibility
//! score falls below a threshold, keeping the best candidate when none pass.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::datakit::TrainingInstance;
use crate::error::{Error, Result};
use crate::humanoid::ObservableState;
use crate::locoval::LocoValModel;
use crate::metrics::{evaluate, EvalCase, MetricsReport};
use crate::predictor::{PredictionSet, PredictorModel};
use crate::trajectory::Trajectory;

pub const DEFAULT_LAMBDA: f64 = 0.7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredCandidate {
    pub head: usize,
    pub trajectory: Trajectory,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterResult {
    pub kept: Vec<ScoredCandidate>,
    pub rejected: Vec<ScoredCandidate>,
    pub fallback_used: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeadScore {
    pub head: usize,
    pub score: f64,
}

/// Compact filter outcome without the trajectories.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterReport {
    pub lambda: f64,
    pub kept: Vec<HeadScore>,
    pub rejected: Vec<HeadScore>,
    pub fallback_used: bool,
}

impl FilterResult {
    pub fn report(&self, lambda: f64) -> FilterReport {
        let hs = |v: &[ScoredCandidate]| v.iter().map(|c| HeadScore { head: c.head, score: c.score }).collect();
        FilterReport { lambda, kept: hs(&self.kept), rejected: hs(&self.rejected), fallback_used: self.fallback_used }
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::Config(format!("lambda must lie in [0, 1], got {lambda}")));
    }
    Ok(())
}

/// Head indices kept at `lambda` and whether the argmax fallback fired.
/// Ties in the fallback go to the lowest index.
pub fn threshold_indices(scores: &[f64], lambda: f64) -> (Vec<usize>, bool) {
    let kept: Vec<usize> = (0..scores.len()).filter(|&i| scores[i] >= lambda).collect();
    if !kept.is_empty() || scores.is_empty() {
        return (kept, false);
    }
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = i;
        }
    }
    (vec![best], true)
}

/// Splits already-scored candidates at `lambda`.
pub fn filter_scored(candidates: &[Trajectory], scores: &[f64], lambda: f64) -> Result<FilterResult> {
    check_lambda(lambda)?;
    if candidates.is_empty() {
        return Err(Error::input("no candidates to filter"));
    }
    if scores.len() != candidates.len() {
        return Err(Error::Shape { expected: candidates.len(), got: scores.len() });
    }
    let (keep, fallback_used) = threshold_indices(scores, lambda);
    let mut kept = Vec::with_capacity(keep.len());
    let mut rejected = Vec::with_capacity(candidates.len() - keep.len());
    for (i, (t, &s)) in candidates.iter().zip(scores).enumerate() {
        let c = ScoredCandidate { head: i, trajectory: t.clone(), score: s };
        if keep.contains(&i) {
            kept.push(c);
        } else {
            rejected.push(c);
        }
    }
    Ok(FilterResult { kept, rejected, fallback_used })
}

/// Scores every candidate with the surrogate and keeps those at or above
/// `lambda`, or the single best one when none qualify.
pub fn locoval_filter(
    locoval: &LocoValModel,
    candidates: &PredictionSet,
    obs: &ObservableState,
    lambda: f64,
) -> Result<FilterResult> {
    check_lambda(lambda)?;
    if candidates.trajectories.is_empty() {
        return Err(Error::input("no candidates to filter"));
    }
    let scores = locoval.score_batch(&candidates.trajectories, obs)?;
    filter_scored(&candidates.trajectories, &scores, lambda)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaSweepRow {
    pub lambda: f64,
    pub kept: MetricsReport,
    /// Absent when nothing was rejected.
    pub rejected: Option<MetricsReport>,
    pub rejection_rate: f64,
    pub fallback_rate: f64,
}

/// Predictions and surrogate scores for every evaluation instance.
#[derive(Debug, Clone)]
pub struct ScoredEvalSet {
    pub cases: Vec<(PredictionSet, Vec<f64>, Trajectory)>,
}

pub fn score_eval_set(locoval: &LocoValModel, predictor: &PredictorModel, eval_set: &[TrainingInstance]) -> Result<ScoredEvalSet> {
    let cases = eval_set
        .par_iter()
        .map(|inst| {
            let set = predictor.predict_instance(inst)?;
            let scores = locoval.score_batch(&set.trajectories, &inst.observable)?;
            Ok((set, scores, inst.future.clone()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ScoredEvalSet { cases })
}

/// Metrics of kept and rejected candidates at one threshold.
pub fn evaluate_at_lambda(scored: &ScoredEvalSet, lambda: f64) -> Result<LambdaSweepRow> {
    check_lambda(lambda)?;
    let mut kept_cases = Vec::new();
    let mut rejected_cases = Vec::new();
    let (mut n_rej, mut n_all, mut n_fallback) = (0usize, 0usize, 0usize);
    for (set, scores, gt) in &scored.cases {
        let r = filter_scored(&set.trajectories, scores, lambda)?;
        n_all += scores.len();
        n_rej += r.rejected.len();
        n_fallback += r.fallback_used as usize;
        let take = |v: Vec<ScoredCandidate>| v.into_iter().map(|c| c.trajectory).collect::<Vec<_>>();
        if !r.rejected.is_empty() {
            rejected_cases.push(EvalCase { anchor: set.anchor, preds: take(r.rejected), gt: gt.clone() });
        }
        kept_cases.push(EvalCase { anchor: set.anchor, preds: take(r.kept), gt: gt.clone() });
    }
    if n_all == 0 {
        return Err(Error::input("evaluation set is empty"));
    }
    Ok(LambdaSweepRow {
        lambda,
        kept: evaluate(&kept_cases)?,
        rejected: if rejected_cases.is_empty() { None } else { Some(evaluate(&rejected_cases)?) },
        rejection_rate: n_rej as f64 / n_all as f64,
        fallback_rate: n_fallback as f64 / scored.cases.len() as f64,
    })
}

/// Kept/rejected metrics for each threshold in `lambdas`.
pub fn sweep_lambda(
    locoval: &LocoValModel,
    eval_set: &[TrainingInstance],
    predictor: &PredictorModel,
    lambdas: &[f64],
) -> Result<Vec<LambdaSweepRow>> {
    for &l in lambdas {
        check_lambda(l)?;
    }
    let scored = score_eval_set(locoval, predictor, eval_set)?;
    lambdas.iter().map(|&l| evaluate_at_lambda(&scored, l)).collect()
}
