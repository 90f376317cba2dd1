//! Five-fold cross-validation. Every row is predicted once by the model that
//! did not see it, so the merged log covers the whole dataset.

use chanmi::classifier::{kfold_cv, FeatureVector, LabeledDataset, LogMeta, Row, TrainConfig};
use chanmi::estimation::{cross_entropy_of_log, Split};
use chanmi::synthetic::{fixtures, sample};

fn main() -> chanmi::Result<()> {
    let spec = fixtures::s3();
    let symbols = spec.channel_space().len();
    let rows = sample(&spec, 690, 2)?
        .into_iter()
        .enumerate()
        .map(|(i, (f, c))| Row {
            id: format!("x{i}"),
            x: FeatureVector::one_hot(symbols, c),
            label: f,
            split: Split::Train,
        })
        .collect();
    let data = LabeledDataset::new(spec.feature_space().clone(), rows)?;

    let cfg = TrainConfig {
        learning_rate: 0.05,
        epochs: 20,
        ..TrainConfig::default()
    };
    let cv = kfold_cv(&data, 5, &cfg, &LogMeta::default())?;
    for (j, (m, size)) in cv.folds.iter().zip(&cv.fold_sizes).enumerate() {
        println!("fold {j}: {size} rows, loss {:.4}, accuracy {:.3}", m.loss, m.accuracy);
    }
    println!("summary: {:?}", cv.summary);
    println!("merged held-out CE {:.4}", cross_entropy_of_log(&cv.log, Split::Test)?.value);
    Ok(())
}
