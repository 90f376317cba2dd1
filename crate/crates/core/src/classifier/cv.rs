use rand::seq::SliceRandom;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{evaluate_rows, train, LabeledDataset, LogMeta, Row, TrainConfig};
use crate::error::{Error, Result};
use crate::estimation::{aggregate_folds, FoldMetrics, FoldSummary, PredictionLog, Split};

/// Fraction of each fold's training portion held back for checkpoint
/// selection.
const DEV_FRACTION: f64 = 0.1;

#[derive(Debug, Clone)]
pub struct CvOutcome {
    pub folds: Vec<FoldMetrics>,
    pub fold_sizes: Vec<usize>,
    pub summary: FoldSummary,
    /// Held-out predictions of every fold, tagged with their fold index and
    /// split `test`.
    pub log: PredictionLog,
}

/// Fold index of every row, from a seeded shuffle dealt round-robin.
pub(crate) fn fold_assignment(n: usize, k: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut fold_of = vec![0; n];
    for (pos, &i) in order.iter().enumerate() {
        fold_of[i] = pos % k;
    }
    fold_of
}

/// k-fold cross-validation over all rows, ignoring their split tags.
///
/// Within each fold the remaining rows are split again: the last tenth (at
/// least one row) of them, in shuffled order, becomes the dev split used for
/// checkpoint selection.
pub fn kfold_cv(
    data: &LabeledDataset,
    k: usize,
    cfg: &TrainConfig,
    meta: &LogMeta,
) -> Result<CvOutcome> {
    cfg.validate()?;
    let n = data.len();
    if k < 2 {
        return Err(Error::InvalidInput(format!("k must be at least 2, got {k}")));
    }
    if k > n {
        return Err(Error::InvalidInput(format!("k = {k} exceeds {n} rows")));
    }
    let fold_of = fold_assignment(n, k, cfg.seed);

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(2);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);

    let results: Vec<Result<(FoldMetrics, usize, PredictionLog)>> = (0..k)
        .into_par_iter()
        .map(|j| {
            let rest: Vec<usize> = order.iter().copied().filter(|&i| fold_of[i] != j).collect();
            let n_dev = ((rest.len() as f64 * DEV_FRACTION).ceil() as usize).max(1);
            if rest.len() < n_dev + 1 {
                return Err(Error::InvalidInput(format!(
                    "fold {j} leaves {} rows, too few for train and dev",
                    rest.len()
                )));
            }
            let mut role = vec![None; n];
            for (pos, &i) in rest.iter().enumerate() {
                role[i] = Some(if pos >= rest.len() - n_dev { Split::Dev } else { Split::Train });
            }
            let sub = data.reassigned(|i| role[i]);
            let model = train(&sub, cfg)?;
            let held: Vec<&Row> = data
                .rows()
                .iter()
                .enumerate()
                .filter(|(i, _)| fold_of[*i] == j)
                .map(|(_, r)| r)
                .collect();
            let eval = evaluate_rows(&model, &held, data.label_space(), Split::Test, Some(j as u32), meta)?;
            Ok((
                FoldMetrics {
                    loss: eval.loss,
                    accuracy: eval.accuracy,
                },
                held.len(),
                eval.log,
            ))
        })
        .collect();

    let mut folds = Vec::with_capacity(k);
    let mut fold_sizes = Vec::with_capacity(k);
    let mut header = None;
    let mut records = Vec::with_capacity(n);
    for r in results {
        let (metrics, size, log) = r?;
        folds.push(metrics);
        fold_sizes.push(size);
        header.get_or_insert_with(|| log.header().clone());
        records.extend(log.records().iter().cloned());
    }
    let summary = aggregate_folds(&folds)?;
    let log = PredictionLog::new(header.expect("k >= 2 folds"), records)?;
    Ok(CvOutcome {
        folds,
        fold_sizes,
        summary,
        log,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_robin_fold_sizes() {
        let fold_of = fold_assignment(690, 5, 3);
        let mut sizes = [0usize; 5];
        for f in fold_of {
            sizes[f] += 1;
        }
        assert_eq!(sizes, [138; 5]);
    }

    #[test]
    fn assignment_is_seeded() {
        assert_eq!(fold_assignment(50, 3, 1), fold_assignment(50, 3, 1));
        assert_ne!(fold_assignment(50, 3, 1), fold_assignment(50, 3, 2));
    }
}
