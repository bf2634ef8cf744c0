use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Schedule {
    Constant,
    Cosine,
}

fn default_beta1() -> f64 {
    0.9
}
fn default_beta2() -> f64 {
    0.999
}
fn default_eps() -> f64 {
    1e-8
}

/// Optimizer and schedule settings. Missing keys in a config file take the
/// values of `TrainConfig::default()`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub total_steps: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub schedule: Schedule,
    pub min_learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            weight_decay: 1e-4,
            total_steps: 1000,
            batch_size: 32,
            seed: 0,
            schedule: Schedule::Cosine,
            min_learning_rate: 1e-5,
            beta1: default_beta1(),
            beta2: default_beta2(),
            eps: default_eps(),
        }
    }
}

impl TrainConfig {
    pub fn new(learning_rate: f64, total_steps: usize, batch_size: usize, seed: u64) -> Self {
        Self {
            learning_rate,
            weight_decay: 0.0,
            total_steps,
            batch_size,
            seed,
            schedule: Schedule::Constant,
            min_learning_rate: 0.0,
            beta1: default_beta1(),
            beta2: default_beta2(),
            eps: default_eps(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!(
                "learning_rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if !(self.weight_decay >= 0.0) {
            return Err(Error::Config("weight_decay must be non-negative".into()));
        }
        if self.total_steps == 0 {
            return Err(Error::Config("total_steps must be at least 1".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return Err(Error::Config("betas must lie in [0, 1)".into()));
        }
        if !(self.min_learning_rate >= 0.0 && self.min_learning_rate <= self.learning_rate) {
            return Err(Error::Config("min_learning_rate must lie in [0, learning_rate]".into()));
        }
        Ok(())
    }

    /// Learning rate at optimizer step `step` (0-based).
    pub fn lr_at(&self, step: usize) -> f64 {
        match self.schedule {
            Schedule::Constant => self.learning_rate,
            Schedule::Cosine => {
                cosine_lr(self.learning_rate, step, self.total_steps, self.min_learning_rate)
            }
        }
    }
}

/// Cosine annealing from `base_lr` at step 0 to `min_lr` at `total_steps`.
/// Steps past the end stay at `min_lr`.
pub fn cosine_lr(base_lr: f64, step: usize, total_steps: usize, min_lr: f64) -> f64 {
    if total_steps == 0 || step >= total_steps {
        return min_lr;
    }
    let progress = step as f64 / total_steps as f64;
    min_lr + 0.5 * (base_lr - min_lr) * (1.0 + (PI * progress).cos())
}

/// Adam with decoupled weight decay.
#[derive(Debug, Clone)]
pub struct AdamW {
    m: Vec<f64>,
    v: Vec<f64>,
    beta1: f64,
    beta2: f64,
    eps: f64,
    weight_decay: f64,
}

impl AdamW {
    pub fn new(n_params: usize, config: &TrainConfig) -> Self {
        Self {
            m: vec![0.0; n_params],
            v: vec![0.0; n_params],
            beta1: config.beta1,
            beta2: config.beta2,
            eps: config.eps,
            weight_decay: config.weight_decay,
        }
    }

    pub fn first_moment(&self) -> &[f64] {
        &self.m
    }

    pub fn second_moment(&self) -> &[f64] {
        &self.v
    }

    /// One update with bias correction for `step_index` (1-based).
    pub fn step(&mut self, params: &mut [f64], grads: &[f64], lr: f64, step_index: u64) -> Result<()> {
        if step_index == 0 {
            return Err(Error::input("optimizer step index is 1-based"));
        }
        if params.len() != self.m.len() {
            return Err(Error::Shape { expected: self.m.len(), got: params.len() });
        }
        if grads.len() != params.len() {
            return Err(Error::Shape { expected: params.len(), got: grads.len() });
        }
        let t = step_index as i32;
        let bc1 = 1.0 - self.beta1.powi(t);
        let bc2 = 1.0 - self.beta2.powi(t);
        for (((p, &g), m), v) in params.iter_mut().zip(grads).zip(&mut self.m).zip(&mut self.v) {
            *m = self.beta1 * *m + (1.0 - self.beta1) * g;
            *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
            let m_hat = *m / bc1;
            let v_hat = *v / bc2;
            *p -= lr * (m_hat / (v_hat.sqrt() + self.eps) + self.weight_decay * *p);
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::Numeric("optimizer produced non-finite parameters".into()));
        }
        Ok(())
    }
}
