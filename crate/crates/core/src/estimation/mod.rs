//! From labelled data and prediction logs to information estimates.
//!
//! `H(F)` is a plug-in estimate over gold labels; `H(F|C)` is upper-bounded by
//! the empirical cross-entropy of a classifier's predictions. Their difference
//! lower-bounds `I(F;C)`.

mod bootstrap;
mod log;

pub use bootstrap::{
    attach_intervals, bootstrap_ci, bootstrap_decomposition, BootstrapConfig,
    DecompositionIntervals, ResampleFrame, Statistic,
};
pub use log::{Channel, LogHeader, PredictionLog, PredictionRecord, Split};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::info::{entropy_bits, ChannelDecomposition, Estimator, InfoEstimate, LabelSpace};

/// Probability floor applied before taking logs of predicted probabilities.
pub const PROB_FLOOR: f64 = 1e-12;

/// Label counts over a label space.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmpiricalDist {
    counts: Vec<u64>,
    n: u64,
}

impl EmpiricalDist {
    pub fn from_counts(counts: Vec<u64>) -> Result<Self> {
        let n: u64 = counts.iter().sum();
        if counts.is_empty() || n == 0 {
            return Err(Error::Empty("no observations".into()));
        }
        Ok(EmpiricalDist { counts, n })
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn probabilities(&self) -> Vec<f64> {
        let n = self.n as f64;
        self.counts.iter().map(|&c| c as f64 / n).collect()
    }
}

/// Small-sample bias correction for the plug-in entropy. Off by default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntropyCorrection {
    #[default]
    None,
    MillerMadow,
}

/// Counts gold labels.
pub fn empirical_dist(gold: &[usize], space: &LabelSpace) -> Result<EmpiricalDist> {
    if gold.is_empty() {
        return Err(Error::Empty("no gold labels".into()));
    }
    let mut counts = vec![0u64; space.len()];
    for &g in gold {
        let slot = counts.get_mut(g).ok_or_else(|| {
            Error::InvalidInput(format!("label index {g} out of range for {} labels", space.len()))
        })?;
        *slot += 1;
    }
    EmpiricalDist::from_counts(counts)
}

/// Gold-label distribution of one split of a log.
pub fn split_dist(log: &PredictionLog, split: Split) -> Result<EmpiricalDist> {
    let gold: Vec<usize> = log.in_split(split).map(|r| r.gold).collect();
    if gold.is_empty() {
        return Err(Error::Empty(format!("split {split} has no records")));
    }
    empirical_dist(&gold, log.label_space())
}

pub fn plugin_entropy(d: &EmpiricalDist) -> InfoEstimate {
    plugin_entropy_with(d, EntropyCorrection::None)
}

pub fn plugin_entropy_with(d: &EmpiricalDist, correction: EntropyCorrection) -> InfoEstimate {
    let mut h = entropy_bits(&d.probabilities());
    let mut est_notes = Vec::new();
    if correction == EntropyCorrection::MillerMadow {
        let support = d.counts.iter().filter(|&&c| c > 0).count() as f64;
        h += (support - 1.0) / (2.0 * d.n as f64 * std::f64::consts::LN_2);
        est_notes.push("Miller-Madow correction applied".to_string());
    }
    let mut est = InfoEstimate::new(h, Estimator::Plugin, d.n as usize);
    est.notes = est_notes;
    est
}

/// `-log2 max(p, floor)` together with whether the floor was hit.
#[inline]
pub(crate) fn gold_loss(p_gold: f64) -> (f64, bool) {
    if p_gold < PROB_FLOOR {
        (-PROB_FLOOR.log2(), true)
    } else {
        (-p_gold.log2(), false)
    }
}

/// Mean negative log2-probability of the gold label over one split.
pub fn cross_entropy_of_log(log: &PredictionLog, split: Split) -> Result<InfoEstimate> {
    let mut total = 0.0;
    let mut n = 0usize;
    let mut clamped = 0usize;
    for rec in log.in_split(split) {
        let p = rec.predicted.as_slice()[rec.gold];
        let (loss, hit) = gold_loss(p);
        total += loss;
        clamped += hit as usize;
        n += 1;
    }
    if n == 0 {
        return Err(Error::Empty(format!("split {split} has no records")));
    }
    let mut est = InfoEstimate::new(total / n as f64, Estimator::CrossEntropy, n);
    if clamped > 0 {
        est.notes.push(format!(
            "{clamped} record(s) clamped at probability floor {PROB_FLOOR:e}"
        ));
    }
    Ok(est)
}

/// Number of records whose gold probability fell below [`PROB_FLOOR`].
pub fn clamped_count(log: &PredictionLog, split: Split) -> usize {
    log.in_split(split)
        .filter(|r| r.predicted.as_slice()[r.gold] < PROB_FLOOR)
        .count()
}

/// Builds a full decomposition from a text log and an audio log.
///
/// `h_source` supplies `H(F)`; [`decompose_split`] takes it from the
/// evaluation split itself, which is the usual choice. Both logs must cover
/// the same utterances, which is checked through their gold-label multisets.
pub fn decompose(
    h_source: &EmpiricalDist,
    text_log: &PredictionLog,
    audio_log: &PredictionLog,
    split: Split,
) -> Result<ChannelDecomposition> {
    let space = text_log.label_space();
    if space != audio_log.label_space() {
        return Err(Error::LabelSpaceMismatch(format!(
            "text labels {:?} vs audio labels {:?}",
            space.labels(),
            audio_log.label_space().labels()
        )));
    }
    if h_source.counts().len() != space.len() {
        return Err(Error::LabelSpaceMismatch(format!(
            "H(F) source has {} classes, logs have {}",
            h_source.counts().len(),
            space.len()
        )));
    }
    let text_gold = split_dist(text_log, split)?;
    let audio_gold = split_dist(audio_log, split)?;
    if text_gold != audio_gold {
        return Err(Error::GoldMismatch(format!(
            "split {split}: text counts {:?} vs audio counts {:?}",
            text_gold.counts(),
            audio_gold.counts()
        )));
    }
    let h_f = plugin_entropy(h_source);
    let ce_t = cross_entropy_of_log(text_log, split)?;
    let ce_a = cross_entropy_of_log(audio_log, split)?;
    ChannelDecomposition::from_entropies(text_log.header().task.clone(), space.clone(), h_f, ce_t, ce_a)
}

/// [`decompose`] with `H(F)` computed from the evaluation split's gold labels.
pub fn decompose_split(
    text_log: &PredictionLog,
    audio_log: &PredictionLog,
    split: Split,
) -> Result<ChannelDecomposition> {
    let h_source = split_dist(text_log, split)?;
    decompose(&h_source, text_log, audio_log, split)
}

/// Loss and accuracy of one cross-validation fold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FoldMetrics {
    pub loss: f64,
    pub accuracy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FoldSummary {
    pub mean_loss: f64,
    pub mean_accuracy: f64,
    pub folds: usize,
}

/// Unweighted means across folds.
pub fn aggregate_folds(per_fold: &[FoldMetrics]) -> Result<FoldSummary> {
    if per_fold.is_empty() {
        return Err(Error::Empty("no folds to aggregate".into()));
    }
    let k = per_fold.len() as f64;
    Ok(FoldSummary {
        mean_loss: per_fold.iter().map(|f| f.loss).sum::<f64>() / k,
        mean_accuracy: per_fold.iter().map(|f| f.accuracy).sum::<f64>() / k,
        folds: per_fold.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::info::ProbVector;
    use crate::units::Unit;

    fn binary() -> LabelSpace {
        LabelSpace::new(["no", "yes"]).unwrap()
    }

    fn log_with(preds: &[(usize, [f64; 2])]) -> PredictionLog {
        let header = LogHeader {
            task: "t".into(),
            channel: Channel::Text,
            model: "m".into(),
            labels: binary(),
            unit: Unit::Bits,
        };
        let records = preds
            .iter()
            .enumerate()
            .map(|(i, (g, p))| PredictionRecord {
                example_id: format!("e{i}"),
                gold: *g,
                predicted: ProbVector::new(p.to_vec()).unwrap(),
                split: Split::Test,
                fold: None,
            })
            .collect();
        PredictionLog::new(header, records).unwrap()
    }

    #[test]
    fn empirical_dist_examples() {
        let d = empirical_dist(&[0, 1, 0, 1], &binary()).unwrap();
        assert_eq!(d.counts(), &[2, 2]);
        let same = empirical_dist(&[1, 1, 1], &binary()).unwrap();
        assert_eq!(plugin_entropy(&same).value, 0.0);
        assert!(matches!(empirical_dist(&[], &binary()), Err(Error::Empty(_))));
        assert!(empirical_dist(&[2], &binary()).is_err());
    }

    #[test]
    fn plugin_entropy_examples() {
        let d = EmpiricalDist::from_counts(vec![50, 50]).unwrap();
        let h = plugin_entropy(&d);
        assert_eq!(h.value, 1.0);
        assert_eq!(h.n, 100);
        assert_eq!(h.estimator, Estimator::Plugin);
        let mut ten = vec![0u64; 10];
        ten[0] = 10;
        assert_eq!(plugin_entropy(&EmpiricalDist::from_counts(ten).unwrap()).value, 0.0);
    }

    #[test]
    fn miller_madow_is_opt_in() {
        let d = EmpiricalDist::from_counts(vec![3, 7]).unwrap();
        let raw = plugin_entropy(&d);
        let mm = plugin_entropy_with(&d, EntropyCorrection::MillerMadow);
        let expected = 1.0 / (2.0 * 10.0 * std::f64::consts::LN_2);
        assert!((mm.value - raw.value - expected).abs() < 1e-12);
    }

    #[test]
    fn cross_entropy_examples() {
        let onehot = log_with(&[(0, [1.0, 0.0]), (1, [0.0, 1.0])]);
        assert_eq!(cross_entropy_of_log(&onehot, Split::Test).unwrap().value, 0.0);
        let uniform = log_with(&[(0, [0.5, 0.5]), (1, [0.5, 0.5]), (1, [0.5, 0.5])]);
        assert_eq!(cross_entropy_of_log(&uniform, Split::Test).unwrap().value, 1.0);
        assert!(matches!(
            cross_entropy_of_log(&uniform, Split::Dev),
            Err(Error::Empty(_))
        ));
    }

    #[test]
    fn confident_wrong_prediction_is_clamped_and_reported() {
        let log = log_with(&[(0, [0.0, 1.0]), (1, [0.5, 0.5])]);
        let ce = cross_entropy_of_log(&log, Split::Test).unwrap();
        let expected = (-(1e-12f64).log2() + 1.0) / 2.0;
        assert!((ce.value - expected).abs() < 1e-12);
        assert_eq!(ce.notes.len(), 1);
        assert!(ce.notes[0].starts_with("1 record(s) clamped"));
        assert_eq!(clamped_count(&log, Split::Test), 1);
        let fine = log_with(&[(0, [0.9, 0.1])]);
        assert_eq!(clamped_count(&fine, Split::Test), 0);
        assert!(cross_entropy_of_log(&fine, Split::Test).unwrap().notes.is_empty());
    }

    #[test]
    fn decompose_identical_logs_gives_zero_conditional_mi() {
        let log = log_with(&[(0, [0.8, 0.2]), (1, [0.3, 0.7]), (1, [0.4, 0.6])]);
        let d = decompose_split(&log, &log, Split::Test).unwrap();
        assert_eq!(d.mi_f_audio_given_text.value, 0.0);
        assert!(d.violated_identities(0.0).is_empty());
    }

    #[test]
    fn decompose_rejects_mismatched_gold() {
        let a = log_with(&[(0, [0.8, 0.2]), (1, [0.3, 0.7])]);
        let b = log_with(&[(0, [0.8, 0.2]), (0, [0.3, 0.7])]);
        assert!(matches!(
            decompose_split(&a, &b, Split::Test),
            Err(Error::GoldMismatch(_))
        ));
    }

    #[test]
    fn aggregate_folds_examples() {
        let same = vec![FoldMetrics { loss: 1.0, accuracy: 0.5 }; 5];
        let s = aggregate_folds(&same).unwrap();
        assert_eq!((s.mean_loss, s.mean_accuracy, s.folds), (1.0, 0.5, 5));
        let two = [
            FoldMetrics { loss: 0.8, accuracy: 0.7 },
            FoldMetrics { loss: 1.0, accuracy: 0.5 },
        ];
        let s = aggregate_folds(&two).unwrap();
        assert!((s.mean_loss - 0.9).abs() < 1e-15);
        assert!((s.mean_accuracy - 0.6).abs() < 1e-15);
        assert!(aggregate_folds(&[]).is_err());
    }
}
