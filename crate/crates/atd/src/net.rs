//! Feed-forward embedding network with an L2-normalized output.
//!
//! The network is a stack of dense layers (`out = act(W x + b)`) whose final
//! output is projected onto the unit sphere; every embedding it produces has
//! norm 1, so downstream cosine similarities reduce to dot products.
//! [`forward`] records a [`ForwardTrace`] with everything [`backward`] needs
//! to produce exact analytic gradients, including the Jacobian of the
//! normalization, `(I - zz^T) / |z_pre|`. Parameters are updated in place by
//! [`adam_step`].
//!
//! Everything here is deterministic: the same parameters and input give
//! bitwise identical outputs, and initialization draws only from the caller's
//! seeded generator.

use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::NORM_FLOOR;

/// Elementwise nonlinearity applied after a dense layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Identity,
}

impl Activation {
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Relu => x.max(0.0),
            Activation::Identity => x,
        }
    }

    /// Derivative as a function of the pre-activation (relu uses 0 at 0).
    fn derivative(self, pre: f64) -> f64 {
        match self {
            Activation::Relu => {
                if pre > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Identity => 1.0,
        }
    }

    /// Stable name used by the model file format.
    pub fn name(self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::Identity => "identity",
        }
    }

    /// Inverse of [`Activation::name`].
    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "relu" => Some(Activation::Relu),
            "identity" => Some(Activation::Identity),
            _ => None,
        }
    }
}

/// One dense layer: row-major `out_dim x in_dim` weights plus a bias vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    weights: Vec<f64>,
    bias: Vec<f64>,
    activation: Activation,
    in_dim: usize,
    out_dim: usize,
}

impl Layer {
    /// Build a layer from raw parts, checking shapes and finiteness.
    pub fn new(
        weights: Vec<f64>,
        bias: Vec<f64>,
        activation: Activation,
        in_dim: usize,
        out_dim: usize,
    ) -> Result<Self> {
        if weights.len() != in_dim * out_dim || bias.len() != out_dim {
            return Err(Error::InvalidArgument(format!(
                "layer shape mismatch: {} weights and {} biases for {in_dim} -> {out_dim}",
                weights.len(),
                bias.len()
            )));
        }
        if weights.iter().chain(&bias).any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument(
                "layer parameters contain non-finite values".into(),
            ));
        }
        Ok(Layer {
            weights,
            bias,
            activation,
            in_dim,
            out_dim,
        })
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    /// Row-major `out_dim x in_dim` weight matrix.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weights_mut(&mut self) -> &mut [f64] {
        &mut self.weights
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn bias_mut(&mut self) -> &mut [f64] {
        &mut self.bias
    }
}

/// All weights and biases of the embedding network.
///
/// Layers chain: the input dimension of each layer equals the output
/// dimension of the previous one, and the final layer's output dimension is
/// the embedding dimension. The L2 normalization applied after the last
/// layer has no parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkParameters {
    layers: Vec<Layer>,
}

impl NetworkParameters {
    /// Assemble a network from layers, checking that shapes chain.
    pub fn from_layers(layers: Vec<Layer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::InvalidArgument("network needs at least one layer".into()));
        }
        for pair in layers.windows(2) {
            if pair[0].out_dim != pair[1].in_dim {
                return Err(Error::DimensionMismatch {
                    left: pair[0].out_dim,
                    right: pair[1].in_dim,
                });
            }
        }
        Ok(NetworkParameters { layers })
    }

    /// Initialize a network `input -> hidden... -> embedding`, followed by
    /// the implicit L2 normalization. Hidden layers are relu; the embedding
    /// layer is linear.
    ///
    /// A linear head matters for two reasons. An all-relu head confines
    /// embeddings to the non-negative orthant, capping the angular distance
    /// between any two outputs at 0.5 and making the full-rotation target
    /// unreachable. Worse, ordinal encodings map the all-minimum row to the
    /// exact zero vector, whose embedding survives only through biases; the
    /// triplet objective's sparsity pressure eventually sinks an all-relu
    /// head into a degenerate (all zero) output for that row. With a linear
    /// head the output is at worst the final bias vector, which stays away
    /// from zero.
    ///
    /// Weights are scaled-uniform with the relu gain,
    /// `U(-sqrt(6 / fan_in), sqrt(6 / fan_in))`; biases start at a small
    /// positive constant so every relu unit is initially alive for every
    /// input and the head stays nonzero even when a whole hidden layer goes
    /// dark. All randomness comes from `rng`.
    pub fn init(
        input_dim: usize,
        hidden: &[usize],
        embedding_dim: usize,
        rng: &mut impl Rng,
    ) -> Result<Self> {
        if input_dim == 0 {
            return Err(Error::InvalidArgument("input dimension is zero".into()));
        }
        if embedding_dim < 2 {
            return Err(Error::InvalidArgument(format!(
                "embedding dimension must be >= 2, got {embedding_dim}"
            )));
        }
        let mut dims = vec![input_dim];
        dims.extend_from_slice(hidden);
        dims.push(embedding_dim);
        if dims.iter().any(|&d| d == 0) {
            return Err(Error::InvalidArgument("hidden layer of width zero".into()));
        }

        let mut layers = Vec::with_capacity(dims.len() - 1);
        for (index, pair) in dims.windows(2).enumerate() {
            let (fan_in, fan_out) = (pair[0], pair[1]);
            let last = index == dims.len() - 2;
            let limit = (6.0 / fan_in as f64).sqrt();
            let weights = (0..fan_in * fan_out)
                .map(|_| rng.random_range(-limit..limit))
                .collect();
            layers.push(Layer::new(
                weights,
                vec![0.01; fan_out],
                if last {
                    Activation::Identity
                } else {
                    Activation::Relu
                },
                fan_in,
                fan_out,
            )?);
        }
        NetworkParameters::from_layers(layers)
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    /// Input dimension of the first layer.
    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim
    }

    /// Output dimension of the last layer, `|Z|`.
    pub fn embedding_dim(&self) -> usize {
        self.layers.last().expect("at least one layer").out_dim
    }

    /// Total number of scalar parameters.
    pub fn parameter_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.bias.len())
            .sum()
    }
}

/// Everything the backward pass needs from one forward evaluation.
#[derive(Debug, Clone)]
pub struct ForwardTrace {
    /// `activations[0]` is the input; `activations[l + 1]` the output of
    /// layer `l`. The last entry is the pre-normalization output.
    activations: Vec<Vec<f64>>,
    /// Pre-activation values `W x + b` per layer.
    pre_activations: Vec<Vec<f64>>,
    /// Norm of the pre-normalization output.
    norm: f64,
}

impl ForwardTrace {
    /// Pre-normalization network output.
    pub fn pre_norm_output(&self) -> &[f64] {
        self.activations.last().expect("nonempty trace")
    }

    /// Norm of the pre-normalization output.
    pub fn pre_norm_norm(&self) -> f64 {
        self.norm
    }

    fn layer_count(&self) -> usize {
        self.pre_activations.len()
    }
}

/// Gradients shaped exactly like [`NetworkParameters`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    layers: Vec<LayerGradient>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerGradient {
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Gradients {
    /// All-zero gradients matching the parameter shapes.
    pub fn zeros_like(params: &NetworkParameters) -> Self {
        Gradients {
            layers: params
                .layers
                .iter()
                .map(|l| LayerGradient {
                    weights: vec![0.0; l.weights.len()],
                    bias: vec![0.0; l.bias.len()],
                })
                .collect(),
        }
    }

    pub fn layers(&self) -> &[LayerGradient] {
        &self.layers
    }

    /// Accumulate `other`, entry by entry.
    pub fn add_assign(&mut self, other: &Gradients) -> Result<()> {
        if self.layers.len() != other.layers.len() {
            return Err(Error::DimensionMismatch {
                left: self.layers.len(),
                right: other.layers.len(),
            });
        }
        for (mine, theirs) in self.layers.iter_mut().zip(&other.layers) {
            if mine.weights.len() != theirs.weights.len()
                || mine.bias.len() != theirs.bias.len()
            {
                return Err(Error::DimensionMismatch {
                    left: mine.weights.len(),
                    right: theirs.weights.len(),
                });
            }
            for (a, b) in mine.weights.iter_mut().zip(&theirs.weights) {
                *a += b;
            }
            for (a, b) in mine.bias.iter_mut().zip(&theirs.bias) {
                *a += b;
            }
        }
        Ok(())
    }

    /// Multiply every entry by `factor`.
    pub fn scale(&mut self, factor: f64) {
        for layer in &mut self.layers {
            layer.weights.iter_mut().for_each(|g| *g *= factor);
            layer.bias.iter_mut().for_each(|g| *g *= factor);
        }
    }

    /// True if any entry is NaN or infinite.
    pub fn has_non_finite(&self) -> bool {
        self.layers
            .iter()
            .any(|l| l.weights.iter().chain(&l.bias).any(|g| !g.is_finite()))
    }
}

/// Run the network on one input.
///
/// Returns the unit-norm embedding together with the trace for [`backward`].
/// Errors if the input dimension does not match the first layer or if the
/// pre-normalization output degenerates to (near) zero — with an all-relu
/// head that means every unit died, which is a configuration bug worth
/// failing loudly on.
pub fn forward(params: &NetworkParameters, input: &[f64]) -> Result<(Vec<f64>, ForwardTrace)> {
    if input.len() != params.input_dim() {
        return Err(Error::DimensionMismatch {
            left: input.len(),
            right: params.input_dim(),
        });
    }

    let mut activations = Vec::with_capacity(params.layers.len() + 1);
    let mut pre_activations = Vec::with_capacity(params.layers.len());
    activations.push(input.to_vec());

    for layer in &params.layers {
        let x = activations.last().expect("input pushed above");
        let mut pre = layer.bias.clone();
        for (o, pre_o) in pre.iter_mut().enumerate() {
            let row = &layer.weights[o * layer.in_dim..(o + 1) * layer.in_dim];
            *pre_o += crate::geometry::dot(row, x);
        }
        let act: Vec<f64> = pre.iter().map(|&p| layer.activation.apply(p)).collect();
        pre_activations.push(pre);
        activations.push(act);
    }

    let pre_norm = activations.last().expect("at least one layer");
    let norm = crate::geometry::norm(pre_norm);
    if !norm.is_finite() {
        return Err(Error::InvalidArgument(
            "network produced a non-finite output".into(),
        ));
    }
    if norm < NORM_FLOOR {
        return Err(Error::DegenerateOutput {
            context: "forward".into(),
            norm,
        });
    }
    let embedding = pre_norm.iter().map(|&x| x / norm).collect();

    Ok((
        embedding,
        ForwardTrace {
            activations,
            pre_activations,
            norm,
        },
    ))
}

/// Embedding only, when the trace is not needed.
pub fn embed(params: &NetworkParameters, input: &[f64]) -> Result<Vec<f64>> {
    forward(params, input).map(|(z, _)| z)
}

/// Backpropagate a gradient w.r.t. the pre-normalization output through the
/// dense layers only, skipping the normalization Jacobian.
///
/// [`backward`] is the normal entry point; this one exists for callers (and
/// tests) that handle the normalization themselves.
pub fn backward_unnormalized(
    params: &NetworkParameters,
    trace: &ForwardTrace,
    grad_pre_norm: &[f64],
) -> Result<Gradients> {
    if trace.layer_count() != params.layers.len() {
        return Err(Error::InvalidArgument(format!(
            "trace has {} layers, parameters have {}",
            trace.layer_count(),
            params.layers.len()
        )));
    }
    if grad_pre_norm.len() != params.embedding_dim() {
        return Err(Error::DimensionMismatch {
            left: grad_pre_norm.len(),
            right: params.embedding_dim(),
        });
    }
    for (layer, act) in params.layers.iter().zip(&trace.activations) {
        if layer.in_dim != act.len() {
            return Err(Error::DimensionMismatch {
                left: layer.in_dim,
                right: act.len(),
            });
        }
    }

    let mut grads = Gradients::zeros_like(params);
    let mut grad_out = grad_pre_norm.to_vec();
    for (l, layer) in params.layers.iter().enumerate().rev() {
        let pre = &trace.pre_activations[l];
        let input = &trace.activations[l];
        let grad_pre: Vec<f64> = grad_out
            .iter()
            .zip(pre)
            .map(|(&g, &p)| g * layer.activation.derivative(p))
            .collect();

        let layer_grad = &mut grads.layers[l];
        for (o, &gp) in grad_pre.iter().enumerate() {
            layer_grad.bias[o] = gp;
            let row = &mut layer_grad.weights[o * layer.in_dim..(o + 1) * layer.in_dim];
            for (w, &x) in row.iter_mut().zip(input) {
                *w = gp * x;
            }
        }

        if l > 0 {
            let mut grad_in = vec![0.0; layer.in_dim];
            for (o, &gp) in grad_pre.iter().enumerate() {
                let row = &layer.weights[o * layer.in_dim..(o + 1) * layer.in_dim];
                for (gi, &w) in grad_in.iter_mut().zip(row) {
                    *gi += gp * w;
                }
            }
            grad_out = grad_in;
        }
    }
    Ok(grads)
}

/// Gradient of the L2 normalization: maps a gradient w.r.t. the unit output
/// `z` to a gradient w.r.t. the pre-normalization vector.
///
/// Computes `(grad - z (z . grad)) / |pre|`, i.e. `(I - zz^T) / |pre|`
/// applied to `grad`; the result is orthogonal to `z`.
pub fn l2_normalize_backward(pre_norm: &[f64], grad_embedding: &[f64]) -> Result<Vec<f64>> {
    if pre_norm.len() != grad_embedding.len() {
        return Err(Error::DimensionMismatch {
            left: pre_norm.len(),
            right: grad_embedding.len(),
        });
    }
    let norm = crate::geometry::norm(pre_norm);
    if norm < NORM_FLOOR {
        return Err(Error::DegenerateVector {
            norm,
            floor: NORM_FLOOR,
        });
    }
    let unit: Vec<f64> = pre_norm.iter().map(|&x| x / norm).collect();
    let along = crate::geometry::dot(&unit, grad_embedding);
    Ok(unit
        .iter()
        .zip(grad_embedding)
        .map(|(&z, &g)| (g - z * along) / norm)
        .collect())
}

/// Backpropagate a gradient w.r.t. the unit embedding through the
/// normalization and all dense layers.
///
/// With `grad_embedding = 0` every parameter gradient is exactly zero.
pub fn backward(
    params: &NetworkParameters,
    trace: &ForwardTrace,
    grad_embedding: &[f64],
) -> Result<Gradients> {
    if grad_embedding.len() != params.embedding_dim() {
        return Err(Error::DimensionMismatch {
            left: grad_embedding.len(),
            right: params.embedding_dim(),
        });
    }
    let grad_pre_norm = l2_normalize_backward(trace.pre_norm_output(), grad_embedding)?;
    backward_unnormalized(params, trace, &grad_pre_norm)
}

/// Adam hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamConfig {
    /// Standard defaults with the given learning rate.
    pub fn with_learning_rate(learning_rate: f64) -> Self {
        AdamConfig {
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig::with_learning_rate(1e-4)
    }
}

/// First/second moment accumulators plus the step counter.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState {
    first_moment: Gradients,
    second_moment: Gradients,
    step: u64,
    config: AdamConfig,
}

impl OptimizerState {
    /// Fresh state (zero moments, step 0) shaped like `params`.
    pub fn new(params: &NetworkParameters, config: AdamConfig) -> Self {
        OptimizerState {
            first_moment: Gradients::zeros_like(params),
            second_moment: Gradients::zeros_like(params),
            step: 0,
            config,
        }
    }

    /// Number of updates applied so far.
    pub fn step_count(&self) -> u64 {
        self.step
    }

    pub fn config(&self) -> AdamConfig {
        self.config
    }
}

/// One bias-corrected Adam update, in place.
///
/// `m <- b1 m + (1-b1) g`, `v <- b2 v + (1-b2) g^2`, then
/// `p <- p - lr * m_hat / (sqrt(v_hat) + eps)` with the usual `1 - b^t`
/// corrections. All-zero gradients leave the parameters unchanged.
pub fn adam_step(
    params: &mut NetworkParameters,
    grads: &Gradients,
    state: &mut OptimizerState,
) -> Result<()> {
    if grads.layers.len() != params.layers.len() {
        return Err(Error::DimensionMismatch {
            left: grads.layers.len(),
            right: params.layers.len(),
        });
    }
    state.step += 1;
    let t = state.step as i32;
    let AdamConfig {
        learning_rate,
        beta1,
        beta2,
        epsilon,
    } = state.config;
    let correction1 = 1.0 - beta1.powi(t);
    let correction2 = 1.0 - beta2.powi(t);

    for (l, layer) in params.layers.iter_mut().enumerate() {
        let grad = &grads.layers[l];
        if grad.weights.len() != layer.weights.len() || grad.bias.len() != layer.bias.len() {
            return Err(Error::DimensionMismatch {
                left: grad.weights.len(),
                right: layer.weights.len(),
            });
        }
        let m = &mut state.first_moment.layers[l];
        let v = &mut state.second_moment.layers[l];
        let update = |p: &mut f64, g: f64, m: &mut f64, v: &mut f64| {
            *m = beta1 * *m + (1.0 - beta1) * g;
            *v = beta2 * *v + (1.0 - beta2) * g * g;
            let m_hat = *m / correction1;
            let v_hat = *v / correction2;
            *p -= learning_rate * m_hat / (v_hat.sqrt() + epsilon);
        };
        for ((p, &g), (m, v)) in layer
            .weights
            .iter_mut()
            .zip(&grad.weights)
            .zip(m.weights.iter_mut().zip(v.weights.iter_mut()))
        {
            update(p, g, m, v);
        }
        for ((p, &g), (m, v)) in layer
            .bias
            .iter_mut()
            .zip(&grad.bias)
            .zip(m.bias.iter_mut().zip(v.bias.iter_mut()))
        {
            update(p, g, m, v);
        }
    }
    Ok(())
}
