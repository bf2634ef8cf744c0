use std::cell::RefCell;

use serde::Serialize;

use super::MlpModel;
use crate::error::Result;

/// Relative error with an absolute floor so that two near-zero values compare as equal.
pub fn relative_error(a: f64, b: f64) -> f64 {
    let denom = a.abs().max(b.abs()).max(1e-8);
    (a - b).abs() / denom
}

/// Central-difference gradient of a scalar function.
pub fn central_difference(f: impl Fn(&[f64]) -> f64, x: &[f64], epsilon: f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            let orig = probe[i];
            probe[i] = orig + epsilon;
            let up = f(&probe);
            probe[i] = orig - epsilon;
            let down = f(&probe);
            probe[i] = orig;
            (up - down) / (2.0 * epsilon)
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct GradCheckReport {
    pub max_relative_error: f64,
    pub worst_param: usize,
    pub n_params: usize,
    pub tolerance: f64,
    pub passed: bool,
}

/// Compares back-propagated parameter gradients with central finite differences.
///
/// `loss_fn` maps the network output to `(loss, dloss/doutput)`.
pub fn grad_check(
    model: &MlpModel,
    loss_fn: impl Fn(&[f64]) -> (f64, Vec<f64>),
    input: &[f64],
    epsilon: f64,
    tolerance: f64,
) -> Result<GradCheckReport> {
    let cache = model.forward_cached(input)?;
    let (_, upstream) = loss_fn(cache.output());
    let analytic = model.backward_cached(&cache, &upstream)?.params;

    let probe = RefCell::new(model.clone());
    let numeric = central_difference(
        |p| {
            let mut m = probe.borrow_mut();
            m.params_mut().copy_from_slice(p);
            let out = m.forward(input).expect("input length already validated");
            loss_fn(&out).0
        },
        model.params(),
        epsilon,
    );

    let (worst_param, max_relative_error) = analytic
        .iter()
        .zip(&numeric)
        .map(|(&a, &n)| relative_error(a, n))
        .enumerate()
        .fold((0, 0.0_f64), |acc, (i, e)| if e > acc.1 { (i, e) } else { acc });

    Ok(GradCheckReport {
        max_relative_error,
        worst_param,
        n_params: model.n_params(),
        tolerance,
        passed: max_relative_error <= tolerance,
    })
}
