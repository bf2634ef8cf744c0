use log::{debug, info};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{FeatureLayout, LocoValModel};
use crate::error::{Error, Result};
use crate::gradcore::{AdamW, HiddenActivation, MlpModel, OutputActivation, TrainConfig};
use crate::metrics::pearson;
use crate::oracle::PlausibilitySample;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LocoValConfig {
    pub hidden_layers: Vec<usize>,
    pub hidden_activation: HiddenActivation,
    pub include_pose: bool,
    pub include_velocity: bool,
    pub holdout_fraction: f64,
    /// Held-out evaluation period in optimizer steps.
    pub eval_every: usize,
    pub train: TrainConfig,
}

impl Default for LocoValConfig {
    fn default() -> Self {
        Self {
            hidden_layers: vec![128, 128, 128],
            hidden_activation: HiddenActivation::Relu,
            include_pose: true,
            include_velocity: true,
            holdout_fraction: 0.1,
            eval_every: 100,
            train: TrainConfig { total_steps: 4000, ..TrainConfig::default() },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub step: usize,
    pub lr: f64,
    pub train_mse: f64,
    pub holdout_mse: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocoValReport {
    pub curve: Vec<CurvePoint>,
    pub best_step: usize,
    pub best_selection_mse: f64,
    pub n_train: usize,
    pub n_holdout: usize,
    pub holdout_pearson: Option<f64>,
}

fn layout_for(data: &[PlausibilitySample], cfg: &LocoValConfig) -> Result<FeatureLayout> {
    let first = data.first().ok_or_else(|| Error::input("surrogate training set is empty"))?;
    let t_f = first.trajectory.len();
    let joint_names: Vec<String> = if cfg.include_pose {
        first
            .observable
            .joints
            .as_ref()
            .ok_or_else(|| Error::input("pose-consuming surrogate needs samples with poses"))?
            .names()
            .map(String::from)
            .collect()
    } else {
        Vec::new()
    };
    for (i, s) in data.iter().enumerate() {
        if s.trajectory.len() != t_f {
            return Err(Error::input(format!("sample {i}: trajectory length {} != {t_f}", s.trajectory.len())));
        }
        if cfg.include_pose {
            let same = s
                .observable
                .joints
                .as_ref()
                .is_some_and(|p| p.names().eq(joint_names.iter().map(String::as_str)));
            if !same {
                return Err(Error::input(format!("sample {i}: joint set differs from the first sample")));
            }
        }
    }
    Ok(FeatureLayout {
        t_f,
        joint_names,
        include_pose: cfg.include_pose,
        include_velocity: cfg.include_velocity,
    })
}

fn mse(net: &MlpModel, x: &[Vec<f64>], y: &[f64], idx: &[usize]) -> Result<f64> {
    let mut s = 0.0;
    for &i in idx {
        let p = net.forward(&x[i])?[0];
        s += (p - y[i]).powi(2);
    }
    Ok(s / idx.len() as f64)
}

/// Regresses the surrogate onto oracle rewards with mean squared error and
/// returns the checkpoint with the lowest held-out error.
pub fn train_locoval(data: &[PlausibilitySample], cfg: &LocoValConfig) -> Result<(LocoValModel, LocoValReport)> {
    cfg.train.validate()?;
    if !(0.0..1.0).contains(&cfg.holdout_fraction) {
        return Err(Error::Config("holdout_fraction must lie in [0, 1)".into()));
    }
    let layout = layout_for(data, cfg)?;
    let x: Vec<Vec<f64>> = data
        .iter()
        .map(|s| super::canonicalize(&layout, &s.trajectory, &s.observable))
        .collect::<Result<_>>()?;
    let y: Vec<f64> = data.iter().map(|s| s.reward).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.train.seed);
    let mut order: Vec<usize> = (0..data.len()).collect();
    order.shuffle(&mut rng);
    let n_holdout = (data.len() as f64 * cfg.holdout_fraction).floor() as usize;
    let (holdout, train) = order.split_at(n_holdout);
    let (holdout, mut train) = (holdout.to_vec(), train.to_vec());
    let selection = if holdout.is_empty() { train.clone() } else { holdout.clone() };

    let mut sizes = vec![layout.input_size()];
    sizes.extend_from_slice(&cfg.hidden_layers);
    sizes.push(1);
    let mut net = MlpModel::new(&sizes, cfg.hidden_activation, OutputActivation::Sigmoid, &mut rng)?;
    let mut opt = AdamW::new(net.n_params(), &cfg.train);

    let mut best = (0usize, mse(&net, &x, &y, &selection)?, net.clone());
    let mut curve = Vec::new();
    let mut grads = vec![0.0; net.n_params()];
    let mut cursor = train.len();
    let mut running = 0.0;
    let mut running_n = 0usize;
    let eval_every = cfg.eval_every.max(1);

    for step in 0..cfg.train.total_steps {
        grads.iter_mut().for_each(|g| *g = 0.0);
        let mut batch_loss = 0.0;
        let bs = cfg.train.batch_size.min(train.len());
        for _ in 0..bs {
            if cursor >= train.len() {
                train.shuffle(&mut rng);
                cursor = 0;
            }
            let i = train[cursor];
            cursor += 1;
            let cache = net.forward_cached(&x[i])?;
            let err = cache.output()[0] - y[i];
            batch_loss += err * err;
            net.backward_into(&cache, &[2.0 * err / bs as f64], &mut grads)?;
        }
        let lr = cfg.train.lr_at(step);
        opt.step(net.params_mut(), &grads, lr, step as u64 + 1)?;
        running += batch_loss / bs as f64;
        running_n += 1;

        let last = step + 1 == cfg.train.total_steps;
        if (step + 1) % eval_every == 0 || last {
            let sel = mse(&net, &x, &y, &selection)?;
            let holdout_mse = (!holdout.is_empty()).then_some(sel);
            curve.push(CurvePoint { step: step + 1, lr, train_mse: running / running_n as f64, holdout_mse });
            debug!("surrogate step {} train {:.5} selection {:.5}", step + 1, running / running_n as f64, sel);
            running = 0.0;
            running_n = 0;
            if sel < best.1 {
                best = (step + 1, sel, net.clone());
            }
        }
    }

    let (best_step, best_mse, best_net) = best;
    let holdout_pearson = if holdout.len() >= 2 {
        let pred: Vec<f64> = holdout.iter().map(|&i| best_net.forward(&x[i]).map(|v| v[0])).collect::<Result<_>>()?;
        let truth: Vec<f64> = holdout.iter().map(|&i| y[i]).collect();
        pearson(&pred, &truth)
    } else {
        None
    };
    info!("surrogate best step {best_step}, selection mse {best_mse:.5}, held-out r {holdout_pearson:?}");
    let model = LocoValModel::new(best_net, layout)?;
    Ok((
        model,
        LocoValReport {
            curve,
            best_step,
            best_selection_mse: best_mse,
            n_train: train.len(),
            n_holdout: holdout.len(),
            holdout_pearson,
        },
    ))
}
