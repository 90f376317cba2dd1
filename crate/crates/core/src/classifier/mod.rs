//! Multinomial log-linear classifier trained on cross-entropy.
//!
//! This is the smallest model in which the cross-entropy upper bound on
//! `H(F|C)` is exercised end to end: on one-hot channel features it can
//! represent the Bayes posterior exactly, so its test loss converges to the
//! true conditional entropy.

mod cv;
mod data;
mod sweep;

pub use cv::{kfold_cv, CvOutcome};
pub use data::{FeatureVector, LabeledDataset, Row};
pub use sweep::{run_sweep, RunResult, RunStatus, Selection, SweepConfig, SweepMode, SweepOutcome};

use rand::seq::SliceRandom;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::{
    cross_entropy_of_log, Channel, LogHeader, PredictionLog, PredictionRecord, Split,
};
use crate::info::{LabelSpace, ProbVector};
use crate::units::Unit;

/// Hyperparameters for one training run.
///
/// Defaults sit inside the sweep ranges: epochs from {5, 10, 15}, batch sizes
/// from {8, 16, 32, 64}, weight decay from {0, 0.01, 0.1}, and a learning
/// rate inside the log-uniform range [1e-4, 1e-2]. That range is the one used
/// to fine-tune large pretrained networks, shifted up by a factor of 100
/// because this model starts from zero and has a convex loss.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    /// Coefficient on `0.5 * ||W||^2`; the bias is not decayed.
    pub weight_decay: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 1e-2,
            epochs: 10,
            batch_size: 32,
            weight_decay: 0.0,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidInput(format!("train config: {m}")));
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be > 0");
        }
        if self.epochs == 0 {
            return bad("epochs must be >= 1");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be >= 1");
        }
        if !(self.weight_decay >= 0.0 && self.weight_decay.is_finite()) {
            return bad("weight_decay must be >= 0");
        }
        Ok(())
    }
}

/// What happened during training.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingMeta {
    pub epochs_run: usize,
    /// Epoch of the returned checkpoint; 0 is the initial model.
    pub best_epoch: usize,
    pub best_dev_loss: f64,
    pub seed: u64,
    /// Mean cross-entropy in bits, index 0 before any update.
    pub train_loss: Vec<f64>,
    pub dev_loss: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierModel {
    /// Row-major `[labels x dim]`.
    weights: Vec<f64>,
    bias: Vec<f64>,
    dim: usize,
    label_space: LabelSpace,
    pub meta: Option<TrainingMeta>,
}

impl ClassifierModel {
    pub fn zeros(label_space: LabelSpace, dim: usize) -> Self {
        let k = label_space.len();
        ClassifierModel {
            weights: vec![0.0; k * dim],
            bias: vec![0.0; k],
            dim,
            label_space,
            meta: None,
        }
    }

    pub fn from_parts(
        label_space: LabelSpace,
        dim: usize,
        weights: Vec<f64>,
        bias: Vec<f64>,
    ) -> Result<Self> {
        let k = label_space.len();
        if weights.len() != k * dim || bias.len() != k {
            return Err(Error::InvalidInput(format!(
                "expected {k}x{dim} weights and {k} biases, got {} and {}",
                weights.len(),
                bias.len()
            )));
        }
        if weights.iter().chain(&bias).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("parameters must be finite".into()));
        }
        Ok(ClassifierModel {
            weights,
            bias,
            dim,
            label_space,
            meta: None,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label_space(&self) -> &LabelSpace {
        &self.label_space
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    /// All parameters flattened as `weights ++ bias`.
    pub fn params(&self) -> Vec<f64> {
        self.weights.iter().chain(&self.bias).copied().collect()
    }

    pub fn set_params(&mut self, params: &[f64]) {
        let (w, b) = params.split_at(self.weights.len());
        self.weights.copy_from_slice(w);
        self.bias.copy_from_slice(b);
    }

    fn logits_into(&self, x: &[f64], out: &mut [f64]) {
        for (k, slot) in out.iter_mut().enumerate() {
            let row = &self.weights[k * self.dim..(k + 1) * self.dim];
            *slot = self.bias[k] + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>();
        }
    }

    /// Stable softmax of the logits, written into `out`.
    fn probs_into(&self, x: &[f64], out: &mut [f64]) {
        self.logits_into(x, out);
        let max = out.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut total = 0.0;
        for v in out.iter_mut() {
            *v = (*v - max).exp();
            total += *v;
        }
        for v in out.iter_mut() {
            *v /= total;
        }
    }

    /// Mean cross-entropy (nats) plus the L2 penalty, over the given rows.
    pub fn objective(&self, rows: &[&Row], weight_decay: f64) -> f64 {
        let mut probs = vec![0.0; self.label_space.len()];
        let mut total = 0.0;
        for row in rows {
            self.probs_into(row.x.as_slice(), &mut probs);
            total -= probs[row.label].max(f64::MIN_POSITIVE).ln();
        }
        total / rows.len() as f64 + 0.5 * weight_decay * self.weights.iter().map(|w| w * w).sum::<f64>()
    }

    /// Analytic gradient of [`ClassifierModel::objective`], flattened like
    /// [`ClassifierModel::params`].
    pub fn gradient(&self, rows: &[&Row], weight_decay: f64) -> Vec<f64> {
        let k = self.label_space.len();
        let mut grad = vec![0.0; self.weights.len() + k];
        let mut probs = vec![0.0; k];
        self.accumulate_gradient(rows, &mut probs, &mut grad);
        let scale = 1.0 / rows.len() as f64;
        grad.iter_mut().for_each(|g| *g *= scale);
        for (g, w) in grad.iter_mut().zip(&self.weights) {
            *g += weight_decay * w;
        }
        grad
    }

    fn accumulate_gradient(&self, rows: &[&Row], probs: &mut [f64], grad: &mut [f64]) {
        let (gw, gb) = grad.split_at_mut(self.weights.len());
        for row in rows {
            let x = row.x.as_slice();
            self.probs_into(x, probs);
            probs[row.label] -= 1.0;
            for (k, &d) in probs.iter().enumerate() {
                gb[k] += d;
                let g_row = &mut gw[k * self.dim..(k + 1) * self.dim];
                for (g, v) in g_row.iter_mut().zip(x) {
                    *g += d * v;
                }
            }
        }
    }

    fn check_dim(&self, x: &FeatureVector) -> Result<()> {
        if x.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.dim(),
            });
        }
        Ok(())
    }

    /// Mean cross-entropy in bits, without the penalty.
    fn mean_loss_bits(&self, rows: &[&Row]) -> f64 {
        let mut probs = vec![0.0; self.label_space.len()];
        let total: f64 = rows
            .iter()
            .map(|row| {
                self.probs_into(row.x.as_slice(), &mut probs);
                -probs[row.label].log2()
            })
            .sum();
        total / rows.len() as f64
    }
}

/// `softmax(Wx + b)`.
pub fn predict_proba(model: &ClassifierModel, x: &FeatureVector) -> Result<ProbVector> {
    model.check_dim(x)?;
    let mut probs = vec![0.0; model.label_space.len()];
    model.probs_into(x.as_slice(), &mut probs);
    ProbVector::new(probs)
}

/// Mini-batch gradient descent with per-epoch checkpoint selection on dev
/// loss. The returned model is the checkpoint (initial model included) with
/// the lowest dev cross-entropy.
pub fn train(data: &LabeledDataset, cfg: &TrainConfig) -> Result<ClassifierModel> {
    cfg.validate()?;
    let train_rows: Vec<&Row> = data.rows_in(Split::Train).collect();
    let dev_rows: Vec<&Row> = data.rows_in(Split::Dev).collect();
    if train_rows.is_empty() {
        return Err(Error::Empty("train split has no rows".into()));
    }
    if dev_rows.is_empty() {
        return Err(Error::Empty("dev split has no rows".into()));
    }

    let mut model = ClassifierModel::zeros(data.label_space().clone(), data.dim());
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..train_rows.len()).collect();
    let k = model.label_space.len();
    let mut probs = vec![0.0; k];
    let mut grad = vec![0.0; model.weights.len() + k];
    let mut batch: Vec<&Row> = Vec::with_capacity(cfg.batch_size);

    let mut train_loss = vec![model.mean_loss_bits(&train_rows)];
    let mut dev_loss = vec![model.mean_loss_bits(&dev_rows)];
    let mut best = model.clone();
    let mut best_epoch = 0;
    let mut best_dev = dev_loss[0];

    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(cfg.batch_size) {
            batch.clear();
            batch.extend(chunk.iter().map(|&i| train_rows[i]));
            grad.iter_mut().for_each(|g| *g = 0.0);
            model.accumulate_gradient(&batch, &mut probs, &mut grad);
            let scale = cfg.learning_rate / batch.len() as f64;
            let (gw, gb) = grad.split_at(model.weights.len());
            for (w, g) in model.weights.iter_mut().zip(gw) {
                *w -= scale * g + cfg.learning_rate * cfg.weight_decay * *w;
            }
            for (b, g) in model.bias.iter_mut().zip(gb) {
                *b -= scale * g;
            }
        }
        let tl = model.mean_loss_bits(&train_rows);
        let dl = model.mean_loss_bits(&dev_rows);
        if !tl.is_finite() || !dl.is_finite() || model.params().iter().any(|p| !p.is_finite()) {
            return Err(Error::Diverged);
        }
        train_loss.push(tl);
        dev_loss.push(dl);
        if dl < best_dev {
            best_dev = dl;
            best_epoch = epoch;
            best = model.clone();
        }
    }

    best.meta = Some(TrainingMeta {
        epochs_run: cfg.epochs,
        best_epoch,
        best_dev_loss: best_dev,
        seed: cfg.seed,
        train_loss,
        dev_loss,
    });
    Ok(best)
}

/// Naming for logs emitted by [`evaluate`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogMeta {
    pub task: String,
    pub channel: Channel,
    pub model: String,
}

impl Default for LogMeta {
    fn default() -> Self {
        LogMeta {
            task: "task".into(),
            channel: Channel::Other,
            model: "log-linear".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Evaluation {
    /// Cross-entropy in bits, as computed from `log`.
    pub loss: f64,
    pub accuracy: f64,
    pub log: PredictionLog,
}

/// Scores one split and returns its prediction log.
pub fn evaluate(
    model: &ClassifierModel,
    data: &LabeledDataset,
    split: Split,
    meta: &LogMeta,
) -> Result<Evaluation> {
    let rows: Vec<&Row> = data.rows_in(split).collect();
    evaluate_rows(model, &rows, data.label_space(), split, None, meta)
}

pub(crate) fn evaluate_rows(
    model: &ClassifierModel,
    rows: &[&Row],
    space: &LabelSpace,
    split: Split,
    fold: Option<u32>,
    meta: &LogMeta,
) -> Result<Evaluation> {
    if rows.is_empty() {
        return Err(Error::Empty(format!("split {split} has no rows")));
    }
    if model.label_space() != space {
        return Err(Error::LabelSpaceMismatch(
            "model and dataset use different label spaces".into(),
        ));
    }
    let mut correct = 0usize;
    let mut records = Vec::with_capacity(rows.len());
    for row in rows {
        let p = predict_proba(model, &row.x)?;
        correct += (p.argmax() == row.label) as usize;
        records.push(PredictionRecord {
            example_id: row.id.clone(),
            gold: row.label,
            predicted: p,
            split,
            fold,
        });
    }
    let header = LogHeader {
        task: meta.task.clone(),
        channel: meta.channel,
        model: meta.model.clone(),
        labels: space.clone(),
        unit: Unit::Bits,
    };
    let log = PredictionLog::new(header, records)?;
    let loss = cross_entropy_of_log(&log, split)?.value;
    Ok(Evaluation {
        loss,
        accuracy: correct as f64 / rows.len() as f64,
        log,
    })
}
