//! Ordinal triplet training.
//!
//! Each step draws a batch of triples `(x_i, x_j, x_k)` with target angular
//! distances `(y_ij, y_jk)`, runs all three inputs through the one shared
//! embedding network, predicts the two pairwise angular distances from the
//! embeddings, and minimizes the mean squared error
//! `(y_ij - yhat_ij)^2 + (y_jk - yhat_jk)^2` by backpropagation and Adam.
//! After every epoch the model is scored by leave-one-out K-NN accuracy on
//! the validation set; the parameters from the best epoch win, earliest epoch
//! on ties.
//!
//! The arccos in the prediction has an unbounded derivative at cosine +-1,
//! which is exactly where inner triplets (same category, target 0) are pushed.
//! The cosine is therefore clamped to `[-1 + guard, 1 - guard]` inside the
//! loss path, bounding the gradient and turning fully collapsed pairs into a
//! flat plateau instead of an overflow.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::data::OrdinalDataset;
use crate::error::{Error, Result};
use crate::eval::knn_accuracy;
use crate::geometry::dot;
use crate::net::{
    adam_step, backward, forward, AdamConfig, Gradients, NetworkParameters, OptimizerState,
};
use crate::targets::{sample_triplet_batch, triplet_templates, TripletBatch};

/// Largest accepted arccos guard.
pub const MAX_ARCCOS_GUARD: f64 = 1e-3;

/// Deviation from unit norm tolerated by the embedding-gradient path.
const UNIT_NORM_TOLERANCE: f64 = 1e-6;

/// Training-loop configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    /// Number of epochs; zero epochs is a no-op returning the initial
    /// parameters.
    pub epochs: usize,
    /// Triples per batch.
    pub batch_size: usize,
    /// Batches per epoch; `None` covers the training set once,
    /// `ceil(N / batch_size)`.
    pub batches_per_epoch: Option<usize>,
    /// Adam learning rate.
    pub learning_rate: f64,
    /// Cosine clamp inside the loss gradient, in `(0, 1e-3]`.
    pub arccos_guard: f64,
    /// Seed driving batch sampling.
    pub seed: u64,
    /// K for the validation K-NN accuracy.
    pub validation_k: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 50,
            batch_size: 64,
            batches_per_epoch: None,
            learning_rate: 1e-4,
            arccos_guard: 1e-7,
            seed: 0,
            validation_k: 3,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::Config {
                field: "batch_size".into(),
                message: "must be at least 1".into(),
            });
        }
        if self.batches_per_epoch == Some(0) {
            return Err(Error::Config {
                field: "batches_per_epoch".into(),
                message: "must be at least 1 when given".into(),
            });
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::Config {
                field: "learning_rate".into(),
                message: format!("must be positive, got {}", self.learning_rate),
            });
        }
        if !(self.arccos_guard > 0.0 && self.arccos_guard <= MAX_ARCCOS_GUARD) {
            return Err(Error::Config {
                field: "arccos_guard".into(),
                message: format!("must lie in (0, {MAX_ARCCOS_GUARD}], got {}", self.arccos_guard),
            });
        }
        if self.validation_k == 0 {
            return Err(Error::Config {
                field: "validation_k".into(),
                message: "must be at least 1".into(),
            });
        }
        Ok(())
    }
}

/// One epoch's summary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub mean_loss: f64,
    pub validation_accuracy: f64,
}

/// Per-epoch records plus the selected epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainHistory {
    pub epochs: Vec<EpochRecord>,
    /// Epoch whose parameters were returned; `None` when no epoch ran.
    pub best_epoch: Option<usize>,
}

/// Training result: the parameters of the best validation epoch and the
/// full history.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub parameters: NetworkParameters,
    pub history: TrainHistory,
}

/// Mean squared error over aligned prediction/target pairs:
/// `(1/T) sum_t [(y_ij - yhat_ij)^2 + (y_jk - yhat_jk)^2]`.
pub fn compute_loss(predicted: &[(f64, f64)], targets: &[(f64, f64)]) -> Result<f64> {
    if predicted.is_empty() {
        return Err(Error::InvalidArgument("loss over an empty batch".into()));
    }
    if predicted.len() != targets.len() {
        return Err(Error::DimensionMismatch {
            left: predicted.len(),
            right: targets.len(),
        });
    }
    let total: f64 = predicted
        .iter()
        .zip(targets)
        .map(|(&(p1, p2), &(t1, t2))| (t1 - p1).powi(2) + (t2 - p2).powi(2))
        .sum();
    Ok(total / predicted.len() as f64)
}

/// Predicted angular distance between two embeddings with the cosine clamped
/// to `[-1 + guard, 1 - guard]`.
///
/// With `guard = 0` this is exactly the angular distance.
pub fn predicted_distance(a: &[f64], b: &[f64], guard: f64) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let (na2, nb2) = (dot(a, a), dot(b, b));
    let u = (dot(a, b) / (na2 * nb2).sqrt()).clamp(-1.0 + guard, 1.0 - guard);
    Ok(u.acos() / std::f64::consts::PI)
}

fn check_unit(z: &[f64]) -> Result<()> {
    let deviation = (dot(z, z).sqrt() - 1.0).abs();
    if deviation > UNIT_NORM_TOLERANCE {
        return Err(Error::NonUnitEmbedding { deviation });
    }
    Ok(())
}

/// Gradient of one pair's squared error w.r.t. both embeddings.
///
/// Loss term: `(y - acos(clamp(u, -1 + guard, 1 - guard)) / pi)^2` with
/// `u` the cosine similarity. Outside the clamp interval the derivative is
/// zero (the plateau that keeps collapsed same-category pairs finite).
fn pair_gradient(
    a: &[f64],
    b: &[f64],
    target: f64,
    guard: f64,
) -> (Vec<f64>, Vec<f64>) {
    let (na2, nb2) = (dot(a, a), dot(b, b));
    let denom = (na2 * nb2).sqrt();
    let u = dot(a, b) / denom;
    let clamped = u.clamp(-1.0 + guard, 1.0 - guard);
    let predicted = clamped.acos() / std::f64::consts::PI;

    if u <= -1.0 + guard || u >= 1.0 - guard {
        return (vec![0.0; a.len()], vec![0.0; b.len()]);
    }
    // dL/dyhat = -2 (y - yhat); dyhat/du = -1 / (pi sqrt(1 - u^2)).
    let dl_dyhat = -2.0 * (target - predicted);
    let dyhat_du = -1.0 / (std::f64::consts::PI * (1.0 - clamped * clamped).sqrt());
    let coeff = dl_dyhat * dyhat_du;

    let grad_a = a
        .iter()
        .zip(b)
        .map(|(&ai, &bi)| coeff * (bi / denom - u * ai / na2))
        .collect();
    let grad_b = a
        .iter()
        .zip(b)
        .map(|(&ai, &bi)| coeff * (ai / denom - u * bi / nb2))
        .collect();
    (grad_a, grad_b)
}

/// Analytic gradient of one triple's loss w.r.t. the three unit embeddings.
///
/// The middle embedding accumulates contributions from both distance terms.
/// Inputs must be unit-norm within `1e-6`.
pub fn loss_gradient_wrt_embeddings(
    z_i: &[f64],
    z_j: &[f64],
    z_k: &[f64],
    targets: (f64, f64),
    guard: f64,
) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    for z in [z_i, z_j, z_k] {
        check_unit(z)?;
    }
    for (name, y) in [("y_ij", targets.0), ("y_jk", targets.1)] {
        if !(0.0..=1.0).contains(&y) {
            return Err(Error::InvalidArgument(format!(
                "target {name} = {y} outside [0, 1]"
            )));
        }
    }
    if !(guard > 0.0 && guard <= MAX_ARCCOS_GUARD) {
        return Err(Error::InvalidArgument(format!(
            "arccos guard {guard} outside (0, {MAX_ARCCOS_GUARD}]"
        )));
    }

    let (grad_i, mut grad_j) = pair_gradient(z_i, z_j, targets.0, guard);
    let (grad_j2, grad_k) = pair_gradient(z_j, z_k, targets.1, guard);
    for (g, extra) in grad_j.iter_mut().zip(&grad_j2) {
        *g += extra;
    }
    Ok((grad_i, grad_j, grad_k))
}

/// Predictions `(yhat_ij, yhat_jk)` for every triple of a batch.
pub fn predict_batch(
    params: &NetworkParameters,
    dataset: &OrdinalDataset,
    batch: &TripletBatch,
    guard: f64,
) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::with_capacity(batch.len());
    for t in 0..batch.len() {
        let (xi, xj, xk) = batch.rows(dataset, t);
        let (zi, _) = forward(params, xi)?;
        let (zj, _) = forward(params, xj)?;
        let (zk, _) = forward(params, xk)?;
        out.push((
            predicted_distance(&zi, &zj, guard)?,
            predicted_distance(&zj, &zk, guard)?,
        ));
    }
    Ok(out)
}

/// Mean loss of a batch under the current parameters, without updating.
pub fn batch_loss(
    params: &NetworkParameters,
    dataset: &OrdinalDataset,
    batch: &TripletBatch,
    guard: f64,
) -> Result<f64> {
    compute_loss(&predict_batch(params, dataset, batch, guard)?, &batch.targets)
}

/// Forward/backward over one batch, mean the gradients, apply one Adam step.
/// Returns the batch's mean loss (measured before the update).
fn run_batch(
    params: &mut NetworkParameters,
    optimizer: &mut OptimizerState,
    dataset: &OrdinalDataset,
    batch: &TripletBatch,
    guard: f64,
) -> Result<f64> {
    let mut accumulated = Gradients::zeros_like(params);
    let mut loss_sum = 0.0;
    for t in 0..batch.len() {
        let (xi, xj, xk) = batch.rows(dataset, t);
        let (zi, trace_i) = forward(params, xi)?;
        let (zj, trace_j) = forward(params, xj)?;
        let (zk, trace_k) = forward(params, xk)?;

        let (y_ij, y_jk) = batch.target(t);
        let yhat_ij = predicted_distance(&zi, &zj, guard)?;
        let yhat_jk = predicted_distance(&zj, &zk, guard)?;
        loss_sum += (y_ij - yhat_ij).powi(2) + (y_jk - yhat_jk).powi(2);

        let (gi, gj, gk) = loss_gradient_wrt_embeddings(&zi, &zj, &zk, (y_ij, y_jk), guard)?;
        accumulated.add_assign(&backward(params, &trace_i, &gi)?)?;
        accumulated.add_assign(&backward(params, &trace_j, &gj)?)?;
        accumulated.add_assign(&backward(params, &trace_k, &gk)?)?;
    }
    accumulated.scale(1.0 / batch.len() as f64);
    adam_step(params, &accumulated, optimizer)?;
    Ok(loss_sum / batch.len() as f64)
}

/// Embed every row of a dataset.
pub fn embed_dataset(params: &NetworkParameters, dataset: &OrdinalDataset) -> Result<Vec<Vec<f64>>> {
    (0..dataset.len())
        .map(|i| forward(params, dataset.row(i)).map(|(z, _)| z))
        .collect()
}

/// Run the training loop and return the best-validation parameters.
///
/// Both datasets must share the feature dimension (matching the network
/// input) and the category count, and every category must be present in the
/// training set. Identical inputs, configuration, and seed reproduce the
/// history bitwise. `progress` fires once per epoch.
pub fn train(
    train_set: &OrdinalDataset,
    val_set: &OrdinalDataset,
    initial: NetworkParameters,
    config: &TrainConfig,
    mut progress: impl FnMut(&EpochRecord),
) -> Result<TrainOutcome> {
    config.validate()?;
    if train_set.dim() != val_set.dim() {
        return Err(Error::DimensionMismatch {
            left: train_set.dim(),
            right: val_set.dim(),
        });
    }
    if train_set.category_count() != val_set.category_count() {
        return Err(Error::InvalidArgument(format!(
            "category counts differ: train {} vs val {}",
            train_set.category_count(),
            val_set.category_count()
        )));
    }
    if train_set.dim() != initial.input_dim() {
        return Err(Error::DimensionMismatch {
            left: train_set.dim(),
            right: initial.input_dim(),
        });
    }
    if config.validation_k >= val_set.len() {
        return Err(Error::Config {
            field: "validation_k".into(),
            message: format!(
                "k = {} needs a validation set larger than k, got {}",
                config.validation_k,
                val_set.len()
            ),
        });
    }
    for rank in 0..train_set.category_count() {
        if train_set.indices_of(rank).is_empty() {
            return Err(Error::MissingCategory { rank });
        }
    }

    let templates = triplet_templates(train_set.category_count())?;
    let batches_per_epoch = config
        .batches_per_epoch
        .unwrap_or_else(|| train_set.len().div_ceil(config.batch_size));

    let mut params = initial;
    let mut optimizer = OptimizerState::new(
        &params,
        AdamConfig::with_learning_rate(config.learning_rate),
    );
    let mut rng = ChaCha12Rng::seed_from_u64(config.seed);

    let mut history = TrainHistory {
        epochs: Vec::with_capacity(config.epochs),
        best_epoch: None,
    };
    let mut best: Option<(f64, NetworkParameters)> = None;

    for epoch in 0..config.epochs {
        let mut epoch_loss = 0.0;
        for batch_idx in 0..batches_per_epoch {
            let batch =
                sample_triplet_batch(train_set, &templates, config.batch_size, &mut rng)?;
            epoch_loss += run_batch(&mut params, &mut optimizer, train_set, &batch, config.arccos_guard)
                .map_err(|e| locate(e, epoch, batch_idx))?;
        }
        let mean_loss = epoch_loss / batches_per_epoch as f64;

        let val_embeddings = embed_dataset(&params, val_set)
            .map_err(|e| locate(e, epoch, batches_per_epoch))?;
        let validation_accuracy =
            knn_accuracy(&val_embeddings, val_set.labels(), config.validation_k)?;

        let record = EpochRecord {
            epoch,
            mean_loss,
            validation_accuracy,
        };
        history.epochs.push(record);
        progress(&record);

        let improved = match &best {
            None => true,
            Some((best_acc, _)) => validation_accuracy > *best_acc,
        };
        if improved {
            best = Some((validation_accuracy, params.clone()));
            history.best_epoch = Some(epoch);
        }
    }

    let parameters = best.map(|(_, p)| p).unwrap_or(params);
    Ok(TrainOutcome {
        parameters,
        history,
    })
}

/// Attach epoch/batch coordinates to degenerate-output failures.
fn locate(error: Error, epoch: usize, batch: usize) -> Error {
    match error {
        Error::DegenerateOutput { context, norm } => Error::DegenerateOutput {
            context: format!("{context}, epoch {epoch}, batch {batch}"),
            norm,
        },
        other => other,
    }
}
