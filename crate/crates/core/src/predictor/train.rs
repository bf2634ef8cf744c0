use log::{info, warn};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::losses::{loss_emloco_with_grad, trajectory_mse, EmLocoForm};
use super::model::{PredictionSet, PredictorLayout, PredictorModel};
use crate::datakit::TrainingInstance;
use crate::error::{Error, Result};
use crate::geometry::{add, rotate, scale, sub, Vec2};
use crate::gradcore::{AdamW, TrainConfig};
use crate::locoval::LocoValModel;

/// Displacement loss for multi-head models; a single head always uses plain MSE.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrajectoryLoss {
    /// Only the head closest to the ground truth is supervised.
    #[default]
    MinMse,
    /// Every head is supervised equally.
    MeanMse,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PredictorConfig {
    pub t_p: usize,
    pub t_f: usize,
    pub k: usize,
    pub hidden_layers: Vec<usize>,
    pub include_pose: bool,
    /// Weight of the plausibility loss; 0 disables it entirely.
    pub alpha: f64,
    pub trajectory_loss: TrajectoryLoss,
    pub emloco_form: EmLocoForm,
    /// When false only the plausibility loss is optimized.
    pub use_gt_loss: bool,
    pub epochs: usize,
    /// `total_steps` is recomputed from the epoch count and dataset size.
    pub train: TrainConfig,
}

impl Default for PredictorConfig {
    fn default() -> Self {
        let train = TrainConfig::default();
        Self {
            t_p: 8,
            t_f: 12,
            k: 20,
            hidden_layers: vec![256, 256],
            include_pose: true,
            alpha: 100.0,
            trajectory_loss: TrajectoryLoss::MinMse,
            emloco_form: EmLocoForm::SigmoidTarget,
            use_gt_loss: true,
            epochs: 30,
            train,
        }
    }
}

impl PredictorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(Error::Config(format!("alpha must be non-negative, got {}", self.alpha)));
        }
        if self.epochs == 0 {
            return Err(Error::Config("epochs must be at least 1".into()));
        }
        if !self.use_gt_loss && self.alpha == 0.0 {
            return Err(Error::Config("without the ground-truth loss alpha must be positive".into()));
        }
        if self.hidden_layers.is_empty() {
            return Err(Error::Config("the trunk needs at least one hidden layer".into()));
        }
        let mut t = self.train.clone();
        t.total_steps = t.total_steps.max(1);
        t.validate()
    }

    fn uses_locoval(&self) -> bool {
        self.alpha > 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossParts {
    pub l_t: f64,
    /// Absent when the plausibility term is disabled.
    pub l_e: Option<f64>,
    pub total: f64,
    /// Supervised head under the min-of-K loss.
    pub argmin: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredictorGrads {
    pub trunk: Vec<f64>,
    pub heads: Vec<Vec<f64>>,
}

impl PredictorGrads {
    fn zeros(model: &PredictorModel) -> Self {
        Self {
            trunk: vec![0.0; model.trunk().n_params()],
            heads: model.heads().iter().map(|h| vec![0.0; h.n_params()]).collect(),
        }
    }

    fn add_assign(&mut self, other: &PredictorGrads) {
        for (a, b) in self.trunk.iter_mut().zip(&other.trunk) {
            *a += b;
        }
        for (ha, hb) in self.heads.iter_mut().zip(&other.heads) {
            for (a, b) in ha.iter_mut().zip(hb) {
                *a += b;
            }
        }
    }

    fn scale(&mut self, k: f64) {
        self.trunk.iter_mut().for_each(|g| *g *= k);
        self.heads.iter_mut().flatten().for_each(|g| *g *= k);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochLog {
    pub epoch: usize,
    pub lr: f64,
    pub l_t: f64,
    pub l_e: Option<f64>,
    /// alpha * L_E / L_T.
    pub weighted_ratio: Option<f64>,
}

fn mse_point_grads(pred: &[Vec2], gt: &[Vec2], weight: f64) -> Vec<Vec2> {
    let k = weight / gt.len() as f64;
    pred.iter().zip(gt).map(|(&p, &g)| scale(sub(p, g), k)).collect()
}

/// Loss of one instance and the gradient of its total with respect to every
/// trunk and head parameter.
pub fn instance_loss_and_grads(
    model: &PredictorModel,
    inst: &TrainingInstance,
    locoval: Option<&LocoValModel>,
    cfg: &PredictorConfig,
) -> Result<(LossParts, PredictorGrads)> {
    let input = model.encode(&inst.past, inst.observable.joints.as_ref())?;
    let (trunk_cache, head_caches) = model.forward_cached(&input)?;
    let trajectories = head_caches
        .iter()
        .map(|c| model.decode(c.output(), &input, inst.future.dt()))
        .collect::<Result<Vec<_>>>()?;
    let k = trajectories.len();
    let t_f = inst.future.len();
    let mut point_grads: Vec<Vec<Vec2>> = vec![vec![[0.0, 0.0]; t_f]; k];

    let mut l_t = 0.0;
    let mut argmin = None;
    if cfg.use_gt_loss {
        let gt = inst.future.points();
        if k == 1 || cfg.trajectory_loss == TrajectoryLoss::MinMse {
            let mut best = (f64::INFINITY, 0);
            for (h, t) in trajectories.iter().enumerate() {
                let l = trajectory_mse(t, &inst.future)?;
                if l < best.0 {
                    best = (l, h);
                }
            }
            l_t = best.0;
            argmin = Some(best.1);
            point_grads[best.1] = mse_point_grads(trajectories[best.1].points(), gt, 1.0);
        } else {
            for (h, t) in trajectories.iter().enumerate() {
                l_t += trajectory_mse(t, &inst.future)? / k as f64;
                point_grads[h] = mse_point_grads(t.points(), gt, 1.0 / k as f64);
            }
        }
    }

    let mut l_e = None;
    if cfg.uses_locoval() {
        let lv = locoval.ok_or_else(|| Error::Config("a positive alpha needs a plausibility model".into()))?;
        let set = PredictionSet { anchor: input.anchor, trajectories };
        let (le, g) = loss_emloco_with_grad(lv, &set, &inst.observable, cfg.emloco_form)?;
        for (pg, eg) in point_grads.iter_mut().zip(g) {
            for (a, b) in pg.iter_mut().zip(eg) {
                *a = add(*a, scale(b, cfg.alpha));
            }
        }
        l_e = Some(le);
    }
    let total = l_t + l_e.map_or(0.0, |e| cfg.alpha * e);
    if !total.is_finite() {
        return Err(Error::Numeric(format!("non-finite predictor loss {total}")));
    }

    let mut grads = PredictorGrads::zeros(model);
    let mut d_trunk = vec![0.0; model.trunk().output_size()];
    for (h, pg) in point_grads.iter().enumerate() {
        if pg.iter().all(|g| g[0] == 0.0 && g[1] == 0.0) {
            continue;
        }
        // Point t is the sum of displacements 0..=t, so displacement s
        // collects the gradients of every later point.
        let mut upstream = vec![0.0; 2 * t_f];
        let mut acc = [0.0, 0.0];
        for s in (0..t_f).rev() {
            acc = add(acc, pg[s]);
            let c = rotate(acc, -input.heading);
            upstream[2 * s] = c[0];
            upstream[2 * s + 1] = c[1];
        }
        let dz = model.heads()[h].backward_into(&head_caches[h], &upstream, &mut grads.heads[h])?;
        for (a, b) in d_trunk.iter_mut().zip(dz) {
            *a += b;
        }
    }
    model.trunk().backward_into(&trunk_cache, &d_trunk, &mut grads.trunk)?;
    Ok((LossParts { l_t, l_e, total, argmin }, grads))
}

fn check_compat(data: &[TrainingInstance], locoval: Option<&LocoValModel>, cfg: &PredictorConfig) -> Result<PredictorLayout> {
    let first = data.first().ok_or_else(|| Error::input("training set is empty"))?;
    if first.past.len() != cfg.t_p || first.future.len() != cfg.t_f {
        return Err(Error::Config(format!(
            "instances have {}/{} past/future points, config expects {}/{}",
            first.past.len(),
            first.future.len(),
            cfg.t_p,
            cfg.t_f
        )));
    }
    let joint_names: Vec<String> = if cfg.include_pose {
        first
            .observable
            .joints
            .as_ref()
            .ok_or_else(|| Error::Config("pose input requested but instances carry no pose".into()))?
            .names()
            .map(str::to_string)
            .collect()
    } else {
        Vec::new()
    };
    if cfg.uses_locoval() {
        let lv = locoval.ok_or_else(|| Error::Config("a positive alpha needs a plausibility model".into()))?;
        if lv.layout().t_f != cfg.t_f {
            return Err(Error::Config(format!(
                "plausibility model scores {} future points, predictor emits {}",
                lv.layout().t_f,
                cfg.t_f
            )));
        }
        if lv.layout().include_pose && first.observable.joints.is_none() {
            return Err(Error::Config("plausibility model needs poses but instances carry none".into()));
        }
    }
    Ok(PredictorLayout { t_p: cfg.t_p, t_f: cfg.t_f, include_pose: cfg.include_pose, joint_names })
}

/// Trains a K-head predictor with Adam(W) on the displacement loss plus
/// alpha times the plausibility loss. The plausibility model stays fixed.
/// Per-instance gradients are computed in parallel and summed in order, so
/// results depend only on the seed.
pub fn train_predictor(
    data: &[TrainingInstance],
    locoval: Option<&LocoValModel>,
    cfg: &PredictorConfig,
) -> Result<(PredictorModel, Vec<EpochLog>)> {
    cfg.validate()?;
    let layout = check_compat(data, locoval, cfg)?;
    let batch = cfg.train.batch_size.min(data.len());
    let batches_per_epoch = data.len().div_ceil(batch);
    let mut tcfg = cfg.train.clone();
    tcfg.total_steps = cfg.epochs * batches_per_epoch;
    tcfg.validate()?;

    let mut init_rng = ChaCha8Rng::seed_from_u64(tcfg.seed);
    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(tcfg.seed.wrapping_add(0x9e37_79b9_7f4a_7c15));
    let mut model = PredictorModel::new(layout, &cfg.hidden_layers, cfg.k, &mut init_rng)?;
    let mut trunk_opt = AdamW::new(model.trunk().n_params(), &tcfg);
    let mut head_opts: Vec<AdamW> = model.heads().iter().map(|h| AdamW::new(h.n_params(), &tcfg)).collect();

    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut logs = Vec::with_capacity(cfg.epochs);
    let mut step = 0usize;
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut shuffle_rng);
        let mut sum_t = 0.0;
        let mut sum_e = 0.0;
        let lr_epoch = tcfg.lr_at(step);
        for chunk in order.chunks(batch) {
            let results: Vec<(LossParts, PredictorGrads)> = chunk
                .par_iter()
                .map(|&i| instance_loss_and_grads(&model, &data[i], locoval, cfg))
                .collect::<Result<_>>()?;
            let mut total = PredictorGrads::zeros(&model);
            for (parts, g) in &results {
                sum_t += parts.l_t;
                sum_e += parts.l_e.unwrap_or(0.0);
                total.add_assign(g);
            }
            total.scale(1.0 / chunk.len() as f64);
            let lr = tcfg.lr_at(step);
            step += 1;
            trunk_opt.step(model.trunk_mut().params_mut(), &total.trunk, lr, step as u64)?;
            for ((head, opt), g) in model.heads_mut().iter_mut().zip(&mut head_opts).zip(&total.heads) {
                opt.step(head.params_mut(), g, lr, step as u64)?;
            }
        }
        let n = data.len() as f64;
        let l_t = sum_t / n;
        let l_e = cfg.uses_locoval().then_some(sum_e / n);
        let weighted_ratio = l_e.filter(|_| l_t > 0.0).map(|e| cfg.alpha * e / l_t);
        if let Some(e) = l_e {
            if cfg.use_gt_loss && cfg.alpha * e > l_t {
                warn!("epoch {epoch}: weighted plausibility loss {:.4} exceeds trajectory loss {l_t:.4}", cfg.alpha * e);
            }
        }
        info!("epoch {epoch}: lr {lr_epoch:.2e} L_T {l_t:.5} L_E {l_e:?}");
        logs.push(EpochLog { epoch, lr: lr_epoch, l_t, l_e, weighted_ratio });
    }
    if !model.trunk().all_finite() || !model.heads().iter().all(|h| h.all_finite()) {
        return Err(Error::Numeric("predictor parameters became non-finite".into()));
    }
    Ok((model, logs))
}
