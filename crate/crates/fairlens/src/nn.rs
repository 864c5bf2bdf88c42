//! Minimal dense feed-forward network engine: seeded init, batched
//! forward/backward, Adam. Everything is `f64` and deterministic under a seed.
//!
//! `backward` implements the exact chain rule for the computed function; the
//! caller supplies `dL/d(output)` with whatever normalization its loss uses.

use crate::{Error, Result};
use ndarray::{Array1, Array2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Per-layer nonlinearity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Relu,
    Identity,
}

impl Activation {
    #[inline]
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    z
                } else {
                    0.0
                }
            }
            Activation::Identity => z,
        }
    }

    /// Derivative expressed through the post-activation value. For relu,
    /// `y > 0` iff `z > 0`, so the output is enough.
    #[inline]
    fn grad_from_output(self, y: f64) -> f64 {
        match self {
            Activation::Relu => {
                if y > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Identity => 1.0,
        }
    }
}

#[derive(Debug, Clone)]
struct DenseLayer {
    /// `[out_dim × in_dim]`, row-major.
    weights: Array2<f64>,
    bias: Array1<f64>,
    activation: Activation,
}

impl DenseLayer {
    fn in_dim(&self) -> usize {
        self.weights.ncols()
    }

    fn out_dim(&self) -> usize {
        self.weights.nrows()
    }
}

/// A stack of dense layers with fixed activations.
#[derive(Debug, Clone)]
pub struct DenseNet {
    layers: Vec<DenseLayer>,
    input_dim: usize,
    output_dim: usize,
}

/// Post-activation values of every layer for one forward pass, plus the input.
/// Consumed by [`DenseNet::backward`]; the cache is only valid for the net
/// that produced it.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    /// `activations[0]` is the input batch; `activations[i+1]` is layer i's output.
    activations: Vec<Array2<f64>>,
}

impl ForwardCache {
    /// Final layer output.
    pub fn output(&self) -> &Array2<f64> {
        self.activations
            .last()
            .expect("cache holds the input at least")
    }
}

/// Parameter gradients shaped exactly like a net's parameters.
#[derive(Debug, Clone)]
pub struct GradSet {
    pub d_weights: Vec<Array2<f64>>,
    pub d_bias: Vec<Array1<f64>>,
}

impl GradSet {
    /// All-zero gradients for `net`.
    pub fn zeros_like(net: &DenseNet) -> Self {
        Self {
            d_weights: net
                .layers
                .iter()
                .map(|l| Array2::zeros((l.out_dim(), l.in_dim())))
                .collect(),
            d_bias: net
                .layers
                .iter()
                .map(|l| Array1::zeros(l.out_dim()))
                .collect(),
        }
    }

    /// Element-wise accumulate `other` into `self`.
    pub fn add_assign(&mut self, other: &GradSet) {
        for (a, b) in self.d_weights.iter_mut().zip(&other.d_weights) {
            *a += b;
        }
        for (a, b) in self.d_bias.iter_mut().zip(&other.d_bias) {
            *a += b;
        }
    }

    /// Flatten in the same layer-major order as [`DenseNet::params_flat`].
    pub fn flat(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for (w, b) in self.d_weights.iter().zip(&self.d_bias) {
            out.extend(w.iter().copied());
            out.extend(b.iter().copied());
        }
        out
    }
}

fn check_finite(batch: &Array2<f64>, what: &str) -> Result<()> {
    if batch.iter().any(|v| !v.is_finite()) {
        return Err(Error::Data(format!("{what} contains a non-finite value")));
    }
    Ok(())
}

impl DenseNet {
    /// Build a net of `layer_dims.len() - 1` dense layers. Hidden layers use
    /// `hidden_activation`; the final layer is linear. Weights are uniform in
    /// `±sqrt(6 / (fan_in + fan_out))` drawn from a ChaCha stream seeded with
    /// `seed`; biases are zero. Same seed, same parameters, bit for bit.
    pub fn new(layer_dims: &[usize], hidden_activation: Activation, seed: u64) -> Result<Self> {
        if layer_dims.len() < 2 {
            return Err(Error::Config(format!(
                "need at least input and output dims, got {layer_dims:?}"
            )));
        }
        let n_layers = layer_dims.len() - 1;
        let mut activations = vec![hidden_activation; n_layers];
        activations[n_layers - 1] = Activation::Identity;
        Self::with_activations(layer_dims, &activations, seed)
    }

    /// Like [`DenseNet::new`] but with an explicit activation per layer.
    pub fn with_activations(
        layer_dims: &[usize],
        activations: &[Activation],
        seed: u64,
    ) -> Result<Self> {
        if layer_dims.len() < 2 {
            return Err(Error::Config(format!(
                "need at least input and output dims, got {layer_dims:?}"
            )));
        }
        if layer_dims.contains(&0) {
            return Err(Error::Config(format!(
                "layer dims must be positive, got {layer_dims:?}"
            )));
        }
        if activations.len() != layer_dims.len() - 1 {
            return Err(Error::Config(format!(
                "expected {} activations, got {}",
                layer_dims.len() - 1,
                activations.len()
            )));
        }

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut layers = Vec::with_capacity(layer_dims.len() - 1);
        for (i, win) in layer_dims.windows(2).enumerate() {
            let (fan_in, fan_out) = (win[0], win[1]);
            let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
            let weights =
                Array2::from_shape_fn((fan_out, fan_in), |_| rng.gen_range(-bound..bound));
            layers.push(DenseLayer {
                weights,
                bias: Array1::zeros(fan_out),
                activation: activations[i],
            });
        }

        Ok(Self {
            input_dim: layer_dims[0],
            output_dim: *layer_dims.last().unwrap(),
            layers,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.output_dim
    }

    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }

    pub fn num_params(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.out_dim() * l.in_dim() + l.out_dim())
            .sum()
    }

    /// Parameters flattened layer by layer: each layer's weights (row-major)
    /// then its bias. The layout is the contract for [`DenseNet::set_params_flat`].
    pub fn params_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_params());
        for l in &self.layers {
            out.extend(l.weights.iter().copied());
            out.extend(l.bias.iter().copied());
        }
        out
    }

    /// Overwrite all parameters from a flat slice in [`DenseNet::params_flat`] order.
    pub fn set_params_flat(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.num_params() {
            return Err(Error::Dimension(format!(
                "expected {} parameters, got {}",
                self.num_params(),
                params.len()
            )));
        }
        let mut off = 0;
        for l in &mut self.layers {
            for w in l.weights.iter_mut() {
                *w = params[off];
                off += 1;
            }
            for b in l.bias.iter_mut() {
                *b = params[off];
                off += 1;
            }
        }
        Ok(())
    }

    /// Batched forward pass. `batch` is `[k × input_dim]`; returns the
    /// `[k × output_dim]` output along with the cache backprop needs.
    pub fn forward(&self, batch: &Array2<f64>) -> Result<(Array2<f64>, ForwardCache)> {
        if batch.ncols() != self.input_dim {
            return Err(Error::Dimension(format!(
                "batch has {} columns, net expects {}",
                batch.ncols(),
                self.input_dim
            )));
        }
        check_finite(batch, "input batch")?;

        let mut activations = Vec::with_capacity(self.layers.len() + 1);
        activations.push(batch.clone());
        for layer in &self.layers {
            let prev = activations.last().unwrap();
            let mut z = prev.dot(&layer.weights.t());
            z += &layer.bias;
            z.mapv_inplace(|v| layer.activation.apply(v));
            activations.push(z);
        }
        let output = activations.last().unwrap().clone();
        Ok((output, ForwardCache { activations }))
    }

    /// Exact gradients for the function computed by `forward`, given
    /// `dL/d(output)`. Returns parameter gradients and `dL/d(input)`.
    pub fn backward(
        &self,
        cache: &ForwardCache,
        d_output: &Array2<f64>,
    ) -> Result<(GradSet, Array2<f64>)> {
        if cache.activations.len() != self.layers.len() + 1 {
            return Err(Error::Dimension(format!(
                "cache has {} activations, net with {} layers expects {}",
                cache.activations.len(),
                self.layers.len(),
                self.layers.len() + 1
            )));
        }
        let k = cache.activations[0].nrows();
        if d_output.dim() != (k, self.output_dim) {
            return Err(Error::Dimension(format!(
                "output gradient is {:?}, expected ({k}, {})",
                d_output.dim(),
                self.output_dim
            )));
        }
        for (i, layer) in self.layers.iter().enumerate() {
            if cache.activations[i + 1].dim() != (k, layer.out_dim()) {
                return Err(Error::Dimension(format!(
                    "cache activation {} is {:?}, expected ({k}, {}); cache does not match this net",
                    i + 1,
                    cache.activations[i + 1].dim(),
                    layer.out_dim()
                )));
            }
        }

        let mut grads = GradSet::zeros_like(self);
        let mut d_out = d_output.clone();
        for (i, layer) in self.layers.iter().enumerate().rev() {
            let y = &cache.activations[i + 1];
            let x = &cache.activations[i];
            // dZ = dY ∘ act'(y)
            let mut d_z = d_out;
            d_z.zip_mut_with(y, |g, &yv| *g *= layer.activation.grad_from_output(yv));
            grads.d_weights[i] = d_z.t().dot(x);
            grads.d_bias[i] = d_z.sum_axis(Axis(0));
            d_out = d_z.dot(&layer.weights);
        }
        Ok((grads, d_out))
    }
}

/// Adam accumulators shaped like one net's parameters, plus hyperparameters.
#[derive(Debug, Clone)]
pub struct AdamState {
    m_weights: Vec<Array2<f64>>,
    v_weights: Vec<Array2<f64>>,
    m_bias: Vec<Array1<f64>>,
    v_bias: Vec<Array1<f64>>,
    step: u64,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamState {
    /// Zeroed accumulators for `net` with β1 = 0.9, β2 = 0.999, ε = 1e-8.
    pub fn new(net: &DenseNet, learning_rate: f64) -> Self {
        Self {
            m_weights: net
                .layers
                .iter()
                .map(|l| Array2::zeros((l.out_dim(), l.in_dim())))
                .collect(),
            v_weights: net
                .layers
                .iter()
                .map(|l| Array2::zeros((l.out_dim(), l.in_dim())))
                .collect(),
            m_bias: net
                .layers
                .iter()
                .map(|l| Array1::zeros(l.out_dim()))
                .collect(),
            v_bias: net
                .layers
                .iter()
                .map(|l| Array1::zeros(l.out_dim()))
                .collect(),
            step: 0,
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }
}

#[inline]
fn adam_update(p: &mut f64, m: &mut f64, v: &mut f64, g: f64, s: &AdamScalars) {
    *m = s.beta1 * *m + (1.0 - s.beta1) * g;
    *v = s.beta2 * *v + (1.0 - s.beta2) * g * g;
    let m_hat = *m / s.bias1;
    let v_hat = *v / s.bias2;
    *p -= s.learning_rate * m_hat / (v_hat.sqrt() + s.epsilon);
}

struct AdamScalars {
    learning_rate: f64,
    beta1: f64,
    beta2: f64,
    epsilon: f64,
    bias1: f64,
    bias2: f64,
}

/// One Adam step with bias correction. Mutates `net` in place and increments
/// the step counter.
pub fn adam_step(net: &mut DenseNet, state: &mut AdamState, grads: &GradSet) -> Result<()> {
    if grads.d_weights.len() != net.layers.len() || grads.d_bias.len() != net.layers.len() {
        return Err(Error::Dimension(format!(
            "gradient set has {} layers, net has {}",
            grads.d_weights.len(),
            net.layers.len()
        )));
    }
    for (i, layer) in net.layers.iter().enumerate() {
        if grads.d_weights[i].dim() != layer.weights.dim()
            || grads.d_bias[i].len() != layer.bias.len()
        {
            return Err(Error::Dimension(format!(
                "gradient shapes for layer {i} do not match the parameters"
            )));
        }
    }

    state.step += 1;
    let t = state.step as i32;
    let scalars = AdamScalars {
        learning_rate: state.learning_rate,
        beta1: state.beta1,
        beta2: state.beta2,
        epsilon: state.epsilon,
        bias1: 1.0 - state.beta1.powi(t),
        bias2: 1.0 - state.beta2.powi(t),
    };

    for (i, layer) in net.layers.iter_mut().enumerate() {
        for (((p, m), v), &g) in layer
            .weights
            .iter_mut()
            .zip(state.m_weights[i].iter_mut())
            .zip(state.v_weights[i].iter_mut())
            .zip(grads.d_weights[i].iter())
        {
            adam_update(p, m, v, g, &scalars);
        }
        for (((p, m), v), &g) in layer
            .bias
            .iter_mut()
            .zip(state.m_bias[i].iter_mut())
            .zip(state.v_bias[i].iter_mut())
            .zip(grads.d_bias[i].iter())
        {
            adam_update(p, m, v, g, &scalars);
        }
    }
    Ok(())
}

/// One-hot encode integer labels into an `[n × num_classes]` matrix.
pub fn one_hot(labels: &[u32], num_classes: usize) -> Result<Array2<f64>> {
    let mut out = Array2::zeros((labels.len(), num_classes));
    for (i, &l) in labels.iter().enumerate() {
        if l as usize >= num_classes {
            return Err(Error::Data(format!(
                "label {l} at row {i} is out of range for {num_classes} classes"
            )));
        }
        out[(i, l as usize)] = 1.0;
    }
    Ok(out)
}
