//! Hyperparameter sweep of a softmax-regression probe, selecting the run
//! with the lowest dev cross-entropy.

use chanmi::classifier::{run_sweep, FeatureVector, LabeledDataset, LogMeta, Row, SweepConfig};
use chanmi::estimation::{Channel, Split};
use chanmi::synthetic::{exact_conditional_entropy, fixtures, sample};

const SWEEP: &str = r#"
epochs = [5, 10]
batch_size = [16, 64]
weight_decay = [0.0, 0.01]
learning_rate = [0.003, 0.03]
seed = 1
"#;

fn main() -> chanmi::Result<()> {
    let spec = fixtures::s1();
    let symbols = spec.channel_space().len();
    let pairs = sample(&spec, 10_000, 5)?;
    let rows = pairs
        .iter()
        .enumerate()
        .map(|(i, &(f, c))| Row {
            id: format!("x{i}"),
            x: FeatureVector::one_hot(symbols, c),
            label: f,
            split: match i % 10 {
                0..=6 => Split::Train,
                7 => Split::Dev,
                _ => Split::Test,
            },
        })
        .collect();
    let data = LabeledDataset::new(spec.feature_space().clone(), rows)?;

    let sweep = SweepConfig::from_toml(SWEEP)?;
    let meta = LogMeta {
        task: "s1".into(),
        channel: Channel::Audio,
        model: "softmax".into(),
    };
    let out = run_sweep(&data, &sweep, &meta)?;
    for r in &out.runs {
        println!(
            "run {:>2}  lr {:<6} epochs {:<3} batch {:<3} wd {:<5} dev {:.4}",
            r.index,
            r.config.learning_rate,
            r.config.epochs,
            r.config.batch_size,
            r.config.weight_decay,
            r.dev_loss.unwrap_or(f64::NAN)
        );
    }
    let best = out.best_run();
    println!(
        "best run {} test CE {:.4} (H(F|C) = {:.4})",
        best.index,
        best.test_loss.unwrap_or(f64::NAN),
        exact_conditional_entropy(&spec)
    );
    Ok(())
}
