use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HiddenActivation {
    Relu,
    Tanh,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputActivation {
    Identity,
    Sigmoid,
    Relu,
}

#[inline]
fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

impl HiddenActivation {
    #[inline]
    fn apply(self, z: f64) -> f64 {
        match self {
            HiddenActivation::Relu => z.max(0.0),
            HiddenActivation::Tanh => z.tanh(),
        }
    }

    /// Derivative expressed through pre-activation `z` and output `a`.
    #[inline]
    fn derivative(self, z: f64, a: f64) -> f64 {
        match self {
            HiddenActivation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            HiddenActivation::Tanh => 1.0 - a * a,
        }
    }
}

impl OutputActivation {
    #[inline]
    fn apply(self, z: f64) -> f64 {
        match self {
            OutputActivation::Identity => z,
            OutputActivation::Sigmoid => sigmoid(z),
            OutputActivation::Relu => z.max(0.0),
        }
    }

    #[inline]
    fn derivative(self, z: f64, a: f64) -> f64 {
        match self {
            OutputActivation::Identity => 1.0,
            OutputActivation::Sigmoid => a * (1.0 - a),
            OutputActivation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// A fully connected feed-forward network with all parameters in one flat
/// buffer. Layer `l` stores its weight matrix (`out x in`, row-major)
/// followed by its bias vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    layer_sizes: Vec<usize>,
    hidden_activation: HiddenActivation,
    output_activation: OutputActivation,
    params: Vec<f64>,
}

/// Intermediate values of one forward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    /// `activations[0]` is the input, `activations[l + 1]` the output of layer `l`.
    pub activations: Vec<Vec<f64>>,
    pub pre_activations: Vec<Vec<f64>>,
}

impl ForwardCache {
    pub fn output(&self) -> &[f64] {
        self.activations.last().expect("cache always holds the input")
    }
}

/// Result of back-propagating one upstream gradient.
#[derive(Debug, Clone)]
pub struct Backprop {
    pub params: Vec<f64>,
    pub input: Vec<f64>,
}

fn param_count(sizes: &[usize]) -> usize {
    sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
}

impl MlpModel {
    /// Glorot-uniform weights, zero biases.
    pub fn new<R: Rng + ?Sized>(
        layer_sizes: &[usize],
        hidden_activation: HiddenActivation,
        output_activation: OutputActivation,
        rng: &mut R,
    ) -> Result<Self> {
        let mut model = Self::zeros(layer_sizes, hidden_activation, output_activation)?;
        let mut offset = 0;
        for w in layer_sizes.windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            for p in &mut model.params[offset..offset + fan_in * fan_out] {
                *p = rng.random_range(-limit..=limit);
            }
            offset += fan_in * fan_out + fan_out;
        }
        Ok(model)
    }

    pub fn zeros(
        layer_sizes: &[usize],
        hidden_activation: HiddenActivation,
        output_activation: OutputActivation,
    ) -> Result<Self> {
        if layer_sizes.len() < 2 {
            return Err(Error::Config("an MLP needs at least an input and an output size".into()));
        }
        if layer_sizes.contains(&0) {
            return Err(Error::Config("layer sizes must be positive".into()));
        }
        Ok(Self {
            layer_sizes: layer_sizes.to_vec(),
            hidden_activation,
            output_activation,
            params: vec![0.0; param_count(layer_sizes)],
        })
    }

    pub fn from_parts(
        layer_sizes: Vec<usize>,
        hidden_activation: HiddenActivation,
        output_activation: OutputActivation,
        params: Vec<f64>,
    ) -> Result<Self> {
        let mut model = Self::zeros(&layer_sizes, hidden_activation, output_activation)?;
        if params.len() != model.params.len() {
            return Err(Error::Shape { expected: model.params.len(), got: params.len() });
        }
        if let Some(i) = params.iter().position(|p| !p.is_finite()) {
            return Err(Error::NonFinite { layer: model.layer_of_param(i) });
        }
        model.params = params;
        Ok(model)
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn input_size(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn output_size(&self) -> usize {
        *self.layer_sizes.last().unwrap()
    }

    pub fn n_layers(&self) -> usize {
        self.layer_sizes.len() - 1
    }

    pub fn hidden_activation(&self) -> HiddenActivation {
        self.hidden_activation
    }

    pub fn output_activation(&self) -> OutputActivation {
        self.output_activation
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn n_params(&self) -> usize {
        self.params.len()
    }

    /// Offsets of (weights, biases) for layer `l`.
    fn layer_offsets(&self, l: usize) -> (usize, usize) {
        let w = param_count(&self.layer_sizes[..=l]);
        (w, w + self.layer_sizes[l] * self.layer_sizes[l + 1])
    }

    pub(crate) fn layer_of_param(&self, index: usize) -> usize {
        let mut offset = 0;
        for (l, w) in self.layer_sizes.windows(2).enumerate() {
            offset += w[0] * w[1] + w[1];
            if index < offset {
                return l;
            }
        }
        self.n_layers() - 1
    }

    fn check_input(&self, input: &[f64]) -> Result<()> {
        if input.len() != self.input_size() {
            return Err(Error::Shape { expected: self.input_size(), got: input.len() });
        }
        Ok(())
    }

    fn affine(&self, l: usize, x: &[f64]) -> Vec<f64> {
        let (n_in, n_out) = (self.layer_sizes[l], self.layer_sizes[l + 1]);
        let (w_off, b_off) = self.layer_offsets(l);
        let w = &self.params[w_off..w_off + n_in * n_out];
        let b = &self.params[b_off..b_off + n_out];
        w.chunks_exact(n_in)
            .zip(b)
            .map(|(row, &bias)| bias + row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>())
            .collect()
    }

    fn activate(&self, l: usize, z: &[f64]) -> Vec<f64> {
        if l + 1 == self.n_layers() {
            z.iter().map(|&v| self.output_activation.apply(v)).collect()
        } else {
            z.iter().map(|&v| self.hidden_activation.apply(v)).collect()
        }
    }

    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        self.check_input(input)?;
        let mut x = input.to_vec();
        for l in 0..self.n_layers() {
            let z = self.affine(l, &x);
            x = self.activate(l, &z);
        }
        Ok(x)
    }

    pub fn forward_cached(&self, input: &[f64]) -> Result<ForwardCache> {
        self.check_input(input)?;
        let mut activations = Vec::with_capacity(self.n_layers() + 1);
        let mut pre_activations = Vec::with_capacity(self.n_layers());
        activations.push(input.to_vec());
        for l in 0..self.n_layers() {
            let z = self.affine(l, &activations[l]);
            let a = self.activate(l, &z);
            pre_activations.push(z);
            activations.push(a);
        }
        Ok(ForwardCache { activations, pre_activations })
    }

    /// Which hidden/output units are on the positive side of a relu kink.
    /// Used by gradient checks to detect finite-difference steps that cross a kink.
    pub fn activation_pattern(&self, input: &[f64]) -> Result<Vec<bool>> {
        let cache = self.forward_cached(input)?;
        Ok(cache.pre_activations.iter().flatten().map(|&z| z > 0.0).collect())
    }

    /// Recomputes the forward pass for `input` and returns parameter gradients.
    pub fn backward(&self, input: &[f64], upstream: &[f64]) -> Result<Vec<f64>> {
        let cache = self.forward_cached(input)?;
        let mut grads = vec![0.0; self.n_params()];
        self.backward_into(&cache, upstream, &mut grads)?;
        Ok(grads)
    }

    pub fn backward_cached(&self, cache: &ForwardCache, upstream: &[f64]) -> Result<Backprop> {
        let mut params = vec![0.0; self.n_params()];
        let input = self.backward_into(cache, upstream, &mut params)?;
        Ok(Backprop { params, input })
    }

    /// Adds the parameter gradient into `grads` and returns the gradient with
    /// respect to the network input.
    pub fn backward_into(
        &self,
        cache: &ForwardCache,
        upstream: &[f64],
        grads: &mut [f64],
    ) -> Result<Vec<f64>> {
        if upstream.len() != self.output_size() {
            return Err(Error::Shape { expected: self.output_size(), got: upstream.len() });
        }
        if grads.len() != self.n_params() {
            return Err(Error::Shape { expected: self.n_params(), got: grads.len() });
        }
        let last = self.n_layers() - 1;
        let mut delta: Vec<f64> = upstream
            .iter()
            .zip(&cache.pre_activations[last])
            .zip(&cache.activations[last + 1])
            .map(|((&g, &z), &a)| g * self.output_activation.derivative(z, a))
            .collect();

        for l in (0..self.n_layers()).rev() {
            let (n_in, n_out) = (self.layer_sizes[l], self.layer_sizes[l + 1]);
            let (w_off, b_off) = self.layer_offsets(l);
            let x = &cache.activations[l];
            let mut dx = vec![0.0; n_in];
            for o in 0..n_out {
                let d = delta[o];
                if d == 0.0 {
                    continue;
                }
                grads[b_off + o] += d;
                let row = w_off + o * n_in;
                let gw = &mut grads[row..row + n_in];
                for (g, &xi) in gw.iter_mut().zip(x) {
                    *g += d * xi;
                }
                let w = &self.params[row..row + n_in];
                for (acc, &wi) in dx.iter_mut().zip(w) {
                    *acc += d * wi;
                }
            }
            if grads[w_off..b_off + n_out].iter().any(|g| !g.is_finite()) {
                return Err(Error::NonFinite { layer: l });
            }
            if l == 0 {
                return Ok(dx);
            }
            delta = dx
                .iter()
                .zip(&cache.pre_activations[l - 1])
                .zip(&cache.activations[l])
                .map(|((&g, &z), &a)| g * self.hidden_activation.derivative(z, a))
                .collect();
        }
        unreachable!("loop returns at layer 0")
    }

    pub fn all_finite(&self) -> bool {
        self.params.iter().all(|p| p.is_finite())
    }
}
