//! Percentile bootstrap over examples.
//!
//! Replicate `r` draws its indices from a ChaCha stream keyed by `(seed, r)`,
//! so results do not depend on how replicates are scheduled across workers.

use std::collections::HashMap;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{gold_loss, PredictionLog, Split};
use crate::error::{Error, Result};
use crate::info::{entropy_bits, ChannelDecomposition};

pub const MIN_REPLICATES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub replicates: usize,
    pub seed: u64,
    pub level: f64,
    /// Worker threads; `None` uses the global rayon pool.
    #[serde(default)]
    pub workers: Option<usize>,
}

impl BootstrapConfig {
    pub fn new(replicates: usize, seed: u64, level: f64) -> Self {
        BootstrapConfig {
            replicates,
            seed,
            level,
            workers: None,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.replicates < MIN_REPLICATES {
            return Err(Error::InsufficientReplicates(self.replicates));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::InvalidInput(format!(
                "confidence level must lie in (0, 1), got {}",
                self.level
            )));
        }
        if self.workers == Some(0) {
            return Err(Error::InvalidInput("workers must be at least 1".into()));
        }
        Ok(())
    }
}

/// Quantity to bootstrap. On a paired frame the primary channel is text and
/// the secondary is audio, so `ConditionalMi` is `CE(F|T) - CE(F|A)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    PluginEntropy,
    CrossEntropy,
    Mi,
    ConditionalMi,
}

/// Per-example values needed to recompute every statistic on a resample.
#[derive(Debug, Clone)]
pub struct ResampleFrame {
    n_labels: usize,
    gold: Vec<usize>,
    primary: Vec<f64>,
    secondary: Option<Vec<f64>>,
}

impl ResampleFrame {
    pub fn single(log: &PredictionLog, split: Split) -> Result<Self> {
        let mut gold = Vec::new();
        let mut primary = Vec::new();
        for rec in log.in_split(split) {
            gold.push(rec.gold);
            primary.push(gold_loss(rec.predicted.as_slice()[rec.gold]).0);
        }
        if gold.is_empty() {
            return Err(Error::Empty(format!("split {split} has no records")));
        }
        Ok(ResampleFrame {
            n_labels: log.label_space().len(),
            gold,
            primary,
            secondary: None,
        })
    }

    /// Pairs text and audio records by example id so that a resample picks
    /// the same utterances on both channels.
    pub fn paired(text: &PredictionLog, audio: &PredictionLog, split: Split) -> Result<Self> {
        if text.label_space() != audio.label_space() {
            return Err(Error::LabelSpaceMismatch(
                "text and audio logs use different label spaces".into(),
            ));
        }
        let audio_by_id: HashMap<(&str, Option<u32>), (usize, f64)> = audio
            .in_split(split)
            .map(|r| {
                (
                    (r.example_id.as_str(), r.fold),
                    (r.gold, gold_loss(r.predicted.as_slice()[r.gold]).0),
                )
            })
            .collect();
        let mut frame = ResampleFrame::single(text, split)?;
        if audio_by_id.len() != frame.gold.len() {
            return Err(Error::GoldMismatch(format!(
                "split {split}: {} text records vs {} audio records",
                frame.gold.len(),
                audio_by_id.len()
            )));
        }
        let mut secondary = Vec::with_capacity(frame.gold.len());
        for (rec, &g) in text.in_split(split).zip(&frame.gold) {
            let &(audio_gold, loss) = audio_by_id
                .get(&(rec.example_id.as_str(), rec.fold))
                .ok_or_else(|| {
                    Error::GoldMismatch(format!("id {:?} missing from audio log", rec.example_id))
                })?;
            if audio_gold != g {
                return Err(Error::GoldMismatch(format!(
                    "id {:?}: text gold {g} vs audio gold {audio_gold}",
                    rec.example_id
                )));
            }
            secondary.push(loss);
        }
        frame.secondary = Some(secondary);
        Ok(frame)
    }

    pub fn len(&self) -> usize {
        self.gold.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gold.is_empty()
    }

    /// `[H(F), CE(primary), CE(secondary)]` on the resample drawn for `replicate`.
    fn replicate(&self, seed: u64, replicate: u64, counts: &mut [u64]) -> [f64; 3] {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(replicate);
        counts.iter_mut().for_each(|c| *c = 0);
        let n = self.gold.len();
        let mut sum_p = 0.0;
        let mut sum_s = 0.0;
        for _ in 0..n {
            let i = rng.gen_range(0..n);
            counts[self.gold[i]] += 1;
            sum_p += self.primary[i];
            if let Some(s) = &self.secondary {
                sum_s += s[i];
            }
        }
        let nf = n as f64;
        let probs: Vec<f64> = counts.iter().map(|&c| c as f64 / nf).collect();
        [entropy_bits(&probs), sum_p / nf, sum_s / nf]
    }

    fn all_replicates(&self, cfg: &BootstrapConfig) -> Result<Vec<[f64; 3]>> {
        cfg.validate()?;
        let run = || {
            (0..cfg.replicates as u64)
                .into_par_iter()
                .map_init(
                    || vec![0u64; self.n_labels],
                    |counts, r| self.replicate(cfg.seed, r, counts),
                )
                .collect::<Vec<_>>()
        };
        match cfg.workers {
            Some(w) => {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(w)
                    .build()
                    .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
                Ok(pool.install(run))
            }
            None => Ok(run()),
        }
    }
}

fn statistic_of(stat: Statistic, r: &[f64; 3]) -> f64 {
    match stat {
        Statistic::PluginEntropy => r[0],
        Statistic::CrossEntropy => r[1],
        Statistic::Mi => r[0] - r[1],
        Statistic::ConditionalMi => r[1] - r[2],
    }
}

/// Linear-interpolated quantile of sorted values.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

fn percentile_interval(mut values: Vec<f64>, level: f64) -> (f64, f64) {
    values.sort_by(|a, b| a.total_cmp(b));
    let alpha = (1.0 - level) / 2.0;
    (quantile(&values, alpha), quantile(&values, 1.0 - alpha))
}

/// Percentile bootstrap interval for one statistic.
pub fn bootstrap_ci(
    frame: &ResampleFrame,
    statistic: Statistic,
    cfg: &BootstrapConfig,
) -> Result<(f64, f64)> {
    if statistic == Statistic::ConditionalMi && frame.secondary.is_none() {
        return Err(Error::InvalidInput(
            "conditional_mi needs a paired text/audio frame".into(),
        ));
    }
    let reps = frame.all_replicates(cfg)?;
    let values = reps.iter().map(|r| statistic_of(statistic, r)).collect();
    Ok(percentile_interval(values, cfg.level))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionIntervals {
    pub h_f: (f64, f64),
    pub ce_f_given_text: (f64, f64),
    pub ce_f_given_audio: (f64, f64),
    pub mi_f_text: (f64, f64),
    pub mi_f_audio: (f64, f64),
    pub mi_f_audio_given_text: (f64, f64),
    pub config: BootstrapConfig,
}

/// Intervals for every decomposition quantity from one set of paired
/// resamples.
pub fn bootstrap_decomposition(
    frame: &ResampleFrame,
    cfg: &BootstrapConfig,
) -> Result<DecompositionIntervals> {
    if frame.secondary.is_none() {
        return Err(Error::InvalidInput(
            "decomposition intervals need a paired text/audio frame".into(),
        ));
    }
    let reps = frame.all_replicates(cfg)?;
    let interval = |f: &dyn Fn(&[f64; 3]) -> f64| {
        percentile_interval(reps.iter().map(f).collect(), cfg.level)
    };
    Ok(DecompositionIntervals {
        h_f: interval(&|r| r[0]),
        ce_f_given_text: interval(&|r| r[1]),
        ce_f_given_audio: interval(&|r| r[2]),
        mi_f_text: interval(&|r| r[0] - r[1]),
        mi_f_audio: interval(&|r| r[0] - r[2]),
        mi_f_audio_given_text: interval(&|r| r[1] - r[2]),
        config: *cfg,
    })
}

/// Copies bootstrap intervals onto a bits-valued decomposition.
pub fn attach_intervals(decomp: &mut ChannelDecomposition, ci: &DecompositionIntervals) {
    let set = |e: &mut crate::info::InfoEstimate, (lo, hi): (f64, f64)| {
        *e = e.clone().with_ci(lo, hi);
    };
    set(&mut decomp.h_f, ci.h_f);
    set(&mut decomp.ce_f_given_text, ci.ce_f_given_text);
    set(&mut decomp.ce_f_given_audio, ci.ce_f_given_audio);
    set(&mut decomp.mi_f_text, ci.mi_f_text);
    set(&mut decomp.mi_f_audio, ci.mi_f_audio);
    set(&mut decomp.mi_f_audio_given_text, ci.mi_f_audio_given_text);
}
