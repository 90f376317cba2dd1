use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{evaluate, kfold_cv, train, ClassifierModel, LabeledDataset, LogMeta, TrainConfig};
use crate::error::{Error, Result};
use crate::estimation::{PredictionLog, Split};

/// Learning-rate range searched when none is configured.
pub const DEFAULT_LR_RANGE: [f64; 2] = [1e-4, 1e-2];
/// Number of random-search runs when a range is searched without `runs`.
pub const DEFAULT_RUNS: usize = 20;

/// Which loss picks the winning run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Selection {
    #[default]
    DevLoss,
    /// Selects on the split that is later reported. Kept for comparison only.
    TestLoss,
    /// Mean held-out loss across cross-validation folds.
    CvLoss,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SweepMode {
    Grid,
    Random { runs: usize },
}

/// Sweep configuration, read from a flat TOML file of grid lists.
///
/// ```toml
/// epochs = [5, 10, 15]
/// batch_size = [8, 16, 32, 64]
/// weight_decay = [0.0, 0.01, 0.1]
/// learning_rate_range = [1e-4, 1e-2]
/// runs = 20
/// seed = 0
/// ```
///
/// A `learning_rate` list with no `runs` gives the full grid. Otherwise
/// `runs` configurations are drawn at random, with the learning rate
/// log-uniform over `learning_rate_range` when no list is given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub epochs: Vec<usize>,
    pub batch_size: Vec<usize>,
    pub weight_decay: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub learning_rate: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub learning_rate_range: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runs: Option<usize>,
    pub seed: u64,
    pub selection: Selection,
    /// Cross-validate every run with this many folds instead of using the
    /// dataset's own splits.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub folds: Option<usize>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            epochs: vec![5, 10, 15],
            batch_size: vec![8, 16, 32, 64],
            weight_decay: vec![0.0, 0.01, 0.1],
            learning_rate: None,
            learning_rate_range: None,
            runs: None,
            seed: 0,
            selection: Selection::DevLoss,
            folds: None,
        }
    }
}

impl SweepConfig {
    /// A sweep with exactly one run.
    pub fn single(cfg: &TrainConfig) -> Self {
        SweepConfig {
            epochs: vec![cfg.epochs],
            batch_size: vec![cfg.batch_size],
            weight_decay: vec![cfg.weight_decay],
            learning_rate: Some(vec![cfg.learning_rate]),
            learning_rate_range: None,
            runs: None,
            seed: cfg.seed,
            selection: Selection::DevLoss,
            folds: None,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: SweepConfig =
            toml::from_str(text).map_err(|e| Error::InvalidInput(format!("sweep config: {e}")))?;
        cfg.mode()?;
        Ok(cfg)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn mode(&self) -> Result<SweepMode> {
        let bad = |m: String| Err(Error::InvalidInput(format!("sweep config: {m}")));
        if self.learning_rate.is_some() && self.learning_rate_range.is_some() {
            return bad("give learning_rate or learning_rate_range, not both".into());
        }
        for (name, empty) in [
            ("epochs", self.epochs.is_empty()),
            ("batch_size", self.batch_size.is_empty()),
            ("weight_decay", self.weight_decay.is_empty()),
            ("learning_rate", self.learning_rate.as_ref().is_some_and(Vec::is_empty)),
        ] {
            if empty {
                return bad(format!("{name} list is empty"));
            }
        }
        if let Some([lo, hi]) = self.learning_rate_range {
            if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
                return bad(format!("learning_rate_range [{lo}, {hi}] must satisfy 0 < lo <= hi"));
            }
        }
        if let Some(k) = self.folds {
            if k < 2 {
                return bad(format!("folds must be at least 2, got {k}"));
            }
        }
        if self.selection == Selection::CvLoss && self.folds.is_none() {
            return bad("selection cv_loss requires folds".into());
        }
        match (self.runs, &self.learning_rate) {
            (Some(0), _) => bad("runs must be at least 1".into()),
            (Some(runs), _) => Ok(SweepMode::Random { runs }),
            (None, Some(_)) => Ok(SweepMode::Grid),
            (None, None) => Ok(SweepMode::Random { runs: DEFAULT_RUNS }),
        }
    }

    /// Selection rule actually applied; cross-validated sweeps always select
    /// on mean held-out loss.
    pub fn effective_selection(&self) -> Selection {
        if self.folds.is_some() {
            Selection::CvLoss
        } else {
            self.selection
        }
    }

    /// Expands the sweep into per-run configurations. Run `r` trains with
    /// seed `seed + r`.
    pub fn configs(&self) -> Result<Vec<TrainConfig>> {
        let mut out = match self.mode()? {
            SweepMode::Grid => {
                let lrs = self.learning_rate.as_deref().unwrap_or_default();
                let mut out = Vec::new();
                for &learning_rate in lrs {
                    for &epochs in &self.epochs {
                        for &batch_size in &self.batch_size {
                            for &weight_decay in &self.weight_decay {
                                out.push(TrainConfig {
                                    learning_rate,
                                    epochs,
                                    batch_size,
                                    weight_decay,
                                    seed: 0,
                                });
                            }
                        }
                    }
                }
                out
            }
            SweepMode::Random { runs } => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                rng.set_stream(3);
                let [lo, hi] = self.learning_rate_range.unwrap_or(DEFAULT_LR_RANGE);
                (0..runs)
                    .map(|_| {
                        let learning_rate = match &self.learning_rate {
                            Some(list) => *list.choose(&mut rng).expect("non-empty"),
                            None if lo == hi => lo,
                            None => (rng.gen_range(lo.ln()..hi.ln())).exp(),
                        };
                        TrainConfig {
                            learning_rate,
                            epochs: *self.epochs.choose(&mut rng).expect("non-empty"),
                            batch_size: *self.batch_size.choose(&mut rng).expect("non-empty"),
                            weight_decay: *self.weight_decay.choose(&mut rng).expect("non-empty"),
                            seed: 0,
                        }
                    })
                    .collect()
            }
        };
        for (r, cfg) in out.iter_mut().enumerate() {
            cfg.seed = self.seed.wrapping_add(r as u64);
            cfg.validate()?;
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Ok,
    Diverged,
}

/// Metrics of one sweep run. Losses are cross-entropies in bits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub index: usize,
    pub config: TrainConfig,
    pub status: RunStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub best_epoch: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dev_loss: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub test_loss: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub test_accuracy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cv_loss: Option<f64>,
}

impl RunResult {
    pub fn score(&self, selection: Selection) -> Option<f64> {
        match selection {
            Selection::DevLoss => self.dev_loss,
            Selection::TestLoss => self.test_loss,
            Selection::CvLoss => self.cv_loss,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub mode: SweepMode,
    pub selection: Selection,
    pub runs: Vec<RunResult>,
    /// Index into `runs` of the selected run.
    pub best: usize,
    /// Test-split predictions of the selected model, or the merged held-out
    /// predictions when cross-validating.
    pub log: PredictionLog,
    /// The selected model; absent when cross-validating.
    pub model: Option<ClassifierModel>,
}

impl SweepOutcome {
    pub fn best_run(&self) -> &RunResult {
        &self.runs[self.best]
    }
}

enum Trained {
    Split(ClassifierModel, Option<PredictionLog>),
    Cv(PredictionLog),
    Diverged,
}

/// Runs every configuration of the sweep in parallel and exports the
/// selected run's predictions. Ties go to the lower run index.
pub fn run_sweep(data: &LabeledDataset, sweep: &SweepConfig, meta: &LogMeta) -> Result<SweepOutcome> {
    let mode = sweep.mode()?;
    let selection = sweep.effective_selection();
    let configs = sweep.configs()?;
    let has_test = data.rows_in(Split::Test).next().is_some();
    if selection == Selection::TestLoss && !has_test {
        return Err(Error::Empty("test-loss selection needs a test split".into()));
    }

    let trained: Vec<Result<(RunResult, Trained)>> = configs
        .par_iter()
        .enumerate()
        .map(|(index, cfg)| {
            let mut result = RunResult {
                index,
                config: *cfg,
                status: RunStatus::Ok,
                best_epoch: None,
                dev_loss: None,
                test_loss: None,
                test_accuracy: None,
                cv_loss: None,
            };
            if let Some(k) = sweep.folds {
                return match kfold_cv(data, k, cfg, meta) {
                    Ok(cv) => {
                        result.cv_loss = Some(cv.summary.mean_loss);
                        result.test_accuracy = Some(cv.summary.mean_accuracy);
                        Ok((result, Trained::Cv(cv.log)))
                    }
                    Err(Error::Diverged) => {
                        result.status = RunStatus::Diverged;
                        Ok((result, Trained::Diverged))
                    }
                    Err(e) => Err(e),
                };
            }
            match train(data, cfg) {
                Ok(model) => {
                    let m = model.meta.as_ref().expect("trained model carries metadata");
                    result.best_epoch = Some(m.best_epoch);
                    result.dev_loss = Some(m.best_dev_loss);
                    let log = if has_test {
                        let eval = evaluate(&model, data, Split::Test, meta)?;
                        result.test_loss = Some(eval.loss);
                        result.test_accuracy = Some(eval.accuracy);
                        Some(eval.log)
                    } else {
                        None
                    };
                    Ok((result, Trained::Split(model, log)))
                }
                Err(Error::Diverged) => {
                    result.status = RunStatus::Diverged;
                    Ok((result, Trained::Diverged))
                }
                Err(e) => Err(e),
            }
        })
        .collect();

    let mut runs = Vec::with_capacity(trained.len());
    let mut artifacts = Vec::with_capacity(trained.len());
    for t in trained {
        let (r, a) = t?;
        runs.push(r);
        artifacts.push(a);
    }

    let best = runs
        .iter()
        .filter_map(|r| r.score(selection).filter(|s| s.is_finite()).map(|s| (r.index, s)))
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
        .map(|(i, _)| i)
        .ok_or(Error::Diverged)?;

    let (log, model) = match artifacts.swap_remove(best) {
        Trained::Split(model, Some(log)) => (log, Some(model)),
        Trained::Split(model, None) => (evaluate(&model, data, Split::Dev, meta)?.log, Some(model)),
        Trained::Cv(log) => (log, None),
        Trained::Diverged => unreachable!("diverged runs have no score"),
    };
    Ok(SweepOutcome {
        mode,
        selection,
        runs,
        best,
        log,
        model,
    })
}
