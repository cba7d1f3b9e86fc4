//! Fully-connected binary classifier trained with mini-batch SGD.
//!
//! Parameters are stored as `f32`. Pre-activations, activations on the
//! training path, the loss and all gradient sums are carried in `f64`, so a
//! fixed (spec, seed, data, hyperparameters) tuple reproduces every output
//! bit-for-bit.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Clamp applied to probabilities before taking logs.
pub const PROB_EPSILON: f64 = 1e-7;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NnError {
    #[error("dim mismatch {0}≠{1}")]
    DimMismatch(usize, usize),
    #[error("invalid layer spec: {0}")]
    InvalidSpec(String),
    #[error("shape error: {0}")]
    Shape(String),
    #[error("non-finite input at row {row}, column {col}")]
    NonFiniteInput { row: usize, col: usize },
    #[error("incompatible architecture: expected layout {expected:#018x} with {expected_len} values, got {found:#018x} with {found_len}")]
    IncompatibleArchitecture {
        expected: u64,
        expected_len: usize,
        found: u64,
        found_len: usize,
    },
    #[error("invalid hyperparameters: {0}")]
    InvalidHyperparams(String),
    #[error("empty training shard")]
    EmptyShard,
    #[error("training diverged at epoch {epoch}, batch {batch}")]
    Diverged { epoch: usize, batch: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Sigmoid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub in_dim: usize,
    pub out_dim: usize,
    pub activation: Activation,
}

impl LayerSpec {
    pub fn new(in_dim: usize, out_dim: usize, activation: Activation) -> Self {
        Self {
            in_dim,
            out_dim,
            activation,
        }
    }
}

/// `input_dim → hidden[0] → … → 1`, ReLU on hidden layers and a sigmoid head.
pub fn mlp_spec(input_dim: usize, hidden: &[usize]) -> Vec<LayerSpec> {
    let mut specs = Vec::with_capacity(hidden.len() + 1);
    let mut prev = input_dim;
    for &width in hidden {
        specs.push(LayerSpec::new(prev, width, Activation::Relu));
        prev = width;
    }
    specs.push(LayerSpec::new(prev, 1, Activation::Sigmoid));
    specs
}

/// Default detector: two hidden layers of 256 units.
pub fn default_spec(input_dim: usize) -> Vec<LayerSpec> {
    mlp_spec(input_dim, &[256, 256])
}

/// Σ (in·out + out) over the layers.
pub fn param_count(specs: &[LayerSpec]) -> usize {
    specs.iter().map(|s| s.in_dim * s.out_dim + s.out_dim).sum()
}

/// FNV-1a over the layer dimensions and activations, in forward order.
pub fn layout_digest(specs: &[LayerSpec]) -> u64 {
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    let mut feed = |v: u64| {
        for byte in v.to_le_bytes() {
            hash ^= u64::from(byte);
            hash = hash.wrapping_mul(PRIME);
        }
    };
    for s in specs {
        feed(s.in_dim as u64);
        feed(s.out_dim as u64);
        feed(match s.activation {
            Activation::Relu => 0,
            Activation::Sigmoid => 1,
        });
    }
    hash
}

fn validate_specs(specs: &[LayerSpec]) -> Result<(), NnError> {
    if specs.is_empty() {
        return Err(NnError::InvalidSpec("no layers".into()));
    }
    for (k, s) in specs.iter().enumerate() {
        if s.in_dim == 0 || s.out_dim == 0 {
            return Err(NnError::InvalidSpec(format!("layer {k} has a zero dimension")));
        }
    }
    for pair in specs.windows(2) {
        if pair[0].out_dim != pair[1].in_dim {
            return Err(NnError::DimMismatch(pair[0].out_dim, pair[1].in_dim));
        }
    }
    let last = specs[specs.len() - 1];
    if last.out_dim != 1 || last.activation != Activation::Sigmoid {
        return Err(NnError::InvalidSpec(
            "final layer must be a single sigmoid unit".into(),
        ));
    }
    Ok(())
}

/// The flattened trainable weights of one model.
///
/// Layout: for each layer in forward order, the weight matrix row-major
/// (one row per output unit) followed by the bias vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamVector {
    values: Vec<f32>,
    layout_digest: u64,
}

impl ParamVector {
    pub fn new(values: Vec<f32>, layout_digest: u64) -> Self {
        Self {
            values,
            layout_digest,
        }
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f32> {
        self.values
    }

    pub fn layout_digest(&self) -> u64 {
        self.layout_digest
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

/// One gradient entry per trainable parameter, in [`ParamVector`] layout.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    values: Vec<f64>,
    layout_digest: u64,
}

impl Gradients {
    pub fn new(values: Vec<f64>, layout_digest: u64) -> Self {
        Self {
            values,
            layout_digest,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn layout_digest(&self) -> u64 {
        self.layout_digest
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Hyperparams {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub local_epochs: usize,
    pub classification_threshold: f64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Self {
            learning_rate: 0.01,
            batch_size: 512,
            local_epochs: 1,
            classification_threshold: 0.5,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<(), NnError> {
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(NnError::InvalidHyperparams(format!(
                "learning_rate must be > 0, got {}",
                self.learning_rate
            )));
        }
        if self.batch_size == 0 {
            return Err(NnError::InvalidHyperparams("batch_size must be ≥ 1".into()));
        }
        if self.local_epochs == 0 {
            return Err(NnError::InvalidHyperparams("local_epochs must be ≥ 1".into()));
        }
        let t = self.classification_threshold;
        if !(t > 0.0 && t < 1.0) {
            return Err(NnError::InvalidHyperparams(format!(
                "classification_threshold must lie in (0, 1), got {t}"
            )));
        }
        Ok(())
    }
}

/// Borrowed view of a labelled sample matrix.
#[derive(Debug, Clone, Copy)]
pub struct Samples<'a> {
    pub features: &'a [f32],
    pub labels: &'a [u8],
    pub dim: usize,
}

impl<'a> Samples<'a> {
    pub fn new(features: &'a [f32], labels: &'a [u8], dim: usize) -> Self {
        Self {
            features,
            labels,
            dim,
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Dense {
    spec: LayerSpec,
    weights: Vec<f32>,
    bias: Vec<f32>,
}

impl Dense {
    fn param_len(&self) -> usize {
        self.weights.len() + self.bias.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    layers: Vec<Dense>,
    seed: u64,
    digest: u64,
}

/// Glorot-uniform weights, zero biases.
pub fn init_model(specs: &[LayerSpec], seed: u64) -> Result<Model, NnError> {
    validate_specs(specs)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let layers = specs
        .iter()
        .map(|&spec| {
            let limit = (6.0 / (spec.in_dim + spec.out_dim) as f64).sqrt() as f32;
            let weights = (0..spec.in_dim * spec.out_dim)
                .map(|_| rng.random_range(-limit..=limit))
                .collect();
            Dense {
                spec,
                weights,
                bias: vec![0.0; spec.out_dim],
            }
        })
        .collect();
    Ok(Model {
        layers,
        seed,
        digest: layout_digest(specs),
    })
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

fn activate(activation: Activation, z: f64) -> f64 {
    match activation {
        Activation::Relu => z.max(0.0),
        Activation::Sigmoid => sigmoid(z),
    }
}

impl Model {
    pub fn specs(&self) -> Vec<LayerSpec> {
        self.layers.iter().map(|l| l.spec).collect()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn layout_digest(&self) -> u64 {
        self.digest
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].spec.in_dim
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(Dense::param_len).sum()
    }

    pub fn get_params(&self) -> ParamVector {
        let mut values = Vec::with_capacity(self.param_count());
        for layer in &self.layers {
            values.extend_from_slice(&layer.weights);
            values.extend_from_slice(&layer.bias);
        }
        ParamVector::new(values, self.digest)
    }

    pub fn set_params(&mut self, params: &ParamVector) -> Result<(), NnError> {
        if params.layout_digest() != self.digest || params.len() != self.param_count() {
            return Err(NnError::IncompatibleArchitecture {
                expected: self.digest,
                expected_len: self.param_count(),
                found: params.layout_digest(),
                found_len: params.len(),
            });
        }
        let mut rest = params.values();
        for layer in &mut self.layers {
            let (w, tail) = rest.split_at(layer.weights.len());
            let (b, tail) = tail.split_at(layer.bias.len());
            layer.weights.copy_from_slice(w);
            layer.bias.copy_from_slice(b);
            rest = tail;
        }
        Ok(())
    }

    /// Functional form of [`Model::set_params`].
    pub fn with_params(&self, params: &ParamVector) -> Result<Model, NnError> {
        let mut model = self.clone();
        model.set_params(params)?;
        Ok(model)
    }

    fn check_inputs(&self, inputs: &[f32], cols: usize) -> Result<usize, NnError> {
        if cols != self.input_dim() {
            return Err(NnError::Shape(format!(
                "batch has {cols} columns, model expects {}",
                self.input_dim()
            )));
        }
        if !inputs.len().is_multiple_of(cols) {
            return Err(NnError::Shape(format!(
                "{} values do not form rows of {cols}",
                inputs.len()
            )));
        }
        if let Some(pos) = inputs.iter().position(|v| !v.is_finite()) {
            return Err(NnError::NonFiniteInput {
                row: pos / cols,
                col: pos % cols,
            });
        }
        Ok(inputs.len() / cols)
    }

    /// Activations of every layer, input included, in `f64`.
    fn activations(&self, inputs: &[f32], rows: usize) -> Vec<Vec<f64>> {
        let mut acts = Vec::with_capacity(self.layers.len() + 1);
        acts.push(inputs.iter().map(|&v| f64::from(v)).collect::<Vec<f64>>());
        for layer in &self.layers {
            let prev = acts.last().expect("input activations present");
            let (n_in, n_out) = (layer.spec.in_dim, layer.spec.out_dim);
            let mut out = vec![0.0f64; rows * n_out];
            for r in 0..rows {
                let a = &prev[r * n_in..(r + 1) * n_in];
                let z_row = &mut out[r * n_out..(r + 1) * n_out];
                for (o, z) in z_row.iter_mut().enumerate() {
                    let w = &layer.weights[o * n_in..(o + 1) * n_in];
                    let dot: f64 = w.iter().zip(a).map(|(&w, &x)| f64::from(w) * x).sum();
                    *z = activate(layer.spec.activation, dot + f64::from(layer.bias[o]));
                }
            }
            acts.push(out);
        }
        acts
    }

    /// Row-wise probabilities for a row-major `rows × cols` batch.
    pub fn forward(&self, inputs: &[f32], cols: usize) -> Result<Vec<f32>, NnError> {
        let rows = self.check_inputs(inputs, cols)?;
        let acts = self.activations(inputs, rows);
        Ok(acts
            .last()
            .expect("output activations present")
            .iter()
            .map(|&p| p as f32)
            .collect())
    }

    /// Mean binary cross-entropy of the model on `samples`.
    pub fn loss(&self, samples: Samples<'_>) -> Result<f64, NnError> {
        let probs = self.forward(samples.features, samples.dim)?;
        bce_loss(&probs, samples.labels)
    }

    /// Loss and exact gradient of the mean BCE over the batch.
    pub fn loss_and_gradients(&self, samples: Samples<'_>) -> Result<(f64, Gradients), NnError> {
        let rows = self.check_inputs(samples.features, samples.dim)?;
        if rows != samples.labels.len() {
            return Err(NnError::Shape(format!(
                "{rows} rows but {} labels",
                samples.labels.len()
            )));
        }
        if rows == 0 {
            return Err(NnError::Shape("empty batch".into()));
        }
        let acts = self.activations(samples.features, rows);
        let probs = acts.last().expect("output activations present");
        let loss = bce_from_f64(probs, samples.labels);

        let inv_n = 1.0 / rows as f64;
        // dL/dz at the sigmoid head. Inside the clamp this is the exact
        // derivative; saturated rows keep their p − y signal.
        let mut delta: Vec<f64> = probs
            .iter()
            .zip(samples.labels)
            .map(|(&p, &y)| (p - f64::from(y)) * inv_n)
            .collect();

        let mut grad_layers: Vec<Vec<f64>> = Vec::with_capacity(self.layers.len());
        for (k, layer) in self.layers.iter().enumerate().rev() {
            let (n_in, n_out) = (layer.spec.in_dim, layer.spec.out_dim);
            let a_prev = &acts[k];
            let mut grad = vec![0.0f64; n_in * n_out + n_out];
            let (gw, gb) = grad.split_at_mut(n_in * n_out);
            for r in 0..rows {
                let a = &a_prev[r * n_in..(r + 1) * n_in];
                for o in 0..n_out {
                    let d = delta[r * n_out + o];
                    if d == 0.0 {
                        continue;
                    }
                    gb[o] += d;
                    for (g, &x) in gw[o * n_in..(o + 1) * n_in].iter_mut().zip(a) {
                        *g += d * x;
                    }
                }
            }
            grad_layers.push(grad);

            if k > 0 {
                let prev_act = self.layers[k - 1].spec.activation;
                let mut next = vec![0.0f64; rows * n_in];
                for r in 0..rows {
                    let a = &a_prev[r * n_in..(r + 1) * n_in];
                    let out = &mut next[r * n_in..(r + 1) * n_in];
                    for o in 0..n_out {
                        let d = delta[r * n_out + o];
                        if d == 0.0 {
                            continue;
                        }
                        let w = &layer.weights[o * n_in..(o + 1) * n_in];
                        for (acc, &w) in out.iter_mut().zip(w) {
                            *acc += d * f64::from(w);
                        }
                    }
                    for (acc, &x) in out.iter_mut().zip(a) {
                        *acc *= match prev_act {
                            Activation::Relu => {
                                if x > 0.0 {
                                    1.0
                                } else {
                                    0.0
                                }
                            }
                            Activation::Sigmoid => x * (1.0 - x),
                        };
                    }
                }
                delta = next;
            }
        }
        grad_layers.reverse();
        let values = grad_layers.into_iter().flatten().collect();
        Ok((loss, Gradients::new(values, self.digest)))
    }

    pub fn backward(&self, samples: Samples<'_>) -> Result<Gradients, NnError> {
        self.loss_and_gradients(samples).map(|(_, g)| g)
    }

    /// `p ← p − lr·g` for every parameter.
    pub fn sgd_step(&mut self, grads: &Gradients, learning_rate: f64) -> Result<(), NnError> {
        if grads.layout_digest() != self.digest || grads.values().len() != self.param_count() {
            return Err(NnError::IncompatibleArchitecture {
                expected: self.digest,
                expected_len: self.param_count(),
                found: grads.layout_digest(),
                found_len: grads.values().len(),
            });
        }
        if !(learning_rate.is_finite() && learning_rate >= 0.0) {
            return Err(NnError::InvalidHyperparams(format!(
                "learning rate {learning_rate}"
            )));
        }
        let mut g = grads.values().iter();
        for layer in &mut self.layers {
            for p in layer.weights.iter_mut().chain(layer.bias.iter_mut()) {
                let step = learning_rate * g.next().expect("length checked");
                *p = (f64::from(*p) - step) as f32;
            }
        }
        Ok(())
    }
}

fn bce_from_f64(probs: &[f64], labels: &[u8]) -> f64 {
    let total: f64 = probs
        .iter()
        .zip(labels)
        .map(|(&p, &y)| {
            let p = p.clamp(PROB_EPSILON, 1.0 - PROB_EPSILON);
            if y == 1 {
                -p.ln()
            } else {
                -(1.0 - p).ln()
            }
        })
        .sum();
    total / probs.len() as f64
}

/// `−mean(y·ln p + (1−y)·ln(1−p))` with `p` clamped to `[ε, 1−ε]`.
pub fn bce_loss(probs: &[f32], labels: &[u8]) -> Result<f64, NnError> {
    if probs.len() != labels.len() {
        return Err(NnError::Shape(format!(
            "{} probabilities but {} labels",
            probs.len(),
            labels.len()
        )));
    }
    if probs.is_empty() {
        return Err(NnError::Shape("empty batch".into()));
    }
    let probs: Vec<f64> = probs.iter().map(|&p| f64::from(p)).collect();
    Ok(bce_from_f64(&probs, labels))
}

/// Where the per-epoch shuffle stream starts.
///
/// Epoch `k` of a schedule always uses the same permutation, so training in
/// blocks (`first_epoch = 0, e, 2e, …`) replays one long run exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BatchSchedule {
    pub seed: u64,
    pub first_epoch: u64,
}

impl BatchSchedule {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            first_epoch: 0,
        }
    }

    pub fn starting_at(seed: u64, first_epoch: u64) -> Self {
        Self { seed, first_epoch }
    }
}

pub(crate) fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub(crate) fn derive_seed(seed: u64, stream: u64) -> u64 {
    splitmix64(seed ^ splitmix64(stream))
}

/// Runs `hp.local_epochs` epochs of shuffled mini-batch SGD in place and
/// returns the mean training loss of each epoch.
pub fn train_epochs(
    model: &mut Model,
    samples: Samples<'_>,
    hp: &Hyperparams,
    schedule: BatchSchedule,
) -> Result<Vec<f64>, NnError> {
    hp.validate()?;
    if samples.is_empty() {
        return Err(NnError::EmptyShard);
    }
    if samples.dim != model.input_dim() {
        return Err(NnError::Shape(format!(
            "shard has {} features, model expects {}",
            samples.dim,
            model.input_dim()
        )));
    }
    if samples.features.len() != samples.len() * samples.dim {
        return Err(NnError::Shape("feature matrix does not match label count".into()));
    }

    let n = samples.len();
    let dim = samples.dim;
    let mut order: Vec<usize> = (0..n).collect();
    let mut batch_x: Vec<f32> = Vec::with_capacity(hp.batch_size.min(n) * dim);
    let mut batch_y: Vec<u8> = Vec::with_capacity(hp.batch_size.min(n));
    let mut epoch_losses = Vec::with_capacity(hp.local_epochs);

    for local_epoch in 0..hp.local_epochs {
        let epoch = schedule.first_epoch + local_epoch as u64;
        order.iter_mut().enumerate().for_each(|(i, o)| *o = i);
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(schedule.seed, epoch));
        order.shuffle(&mut rng);

        let mut loss_sum = 0.0f64;
        for (b, chunk) in order.chunks(hp.batch_size).enumerate() {
            batch_x.clear();
            batch_y.clear();
            for &i in chunk {
                batch_x.extend_from_slice(&samples.features[i * dim..(i + 1) * dim]);
                batch_y.push(samples.labels[i]);
            }
            let (loss, grads) =
                model.loss_and_gradients(Samples::new(&batch_x, &batch_y, dim))?;
            let diverged = || NnError::Diverged {
                epoch: epoch as usize,
                batch: b,
            };
            if !loss.is_finite() || grads.values().iter().any(|g| !g.is_finite()) {
                return Err(diverged());
            }
            model.sgd_step(&grads, hp.learning_rate)?;
            if model.layers.iter().any(|l| l.weights.iter().chain(&l.bias).any(|p| !p.is_finite())) {
                return Err(diverged());
            }
            loss_sum += loss * chunk.len() as f64;
        }
        epoch_losses.push(loss_sum / n as f64);
    }
    Ok(epoch_losses)
}
