//! Checks the sampled estimators against exact values computed from each
//! shipped joint distribution.

use chanmi::estimation::{cross_entropy_of_log, empirical_dist, plugin_entropy, Channel, Split};
use chanmi::synthetic::{exact_conditional_entropy, exact_mi, fixtures, prediction_log, sample, Predictor};

fn main() -> chanmi::Result<()> {
    println!("{:<4} {:>8} {:>8} {:>8} {:>8}", "spec", "H est", "H exact", "I est", "I exact");
    for spec in fixtures::all() {
        let pairs = sample(&spec, 100_000, 20)?;
        let golds: Vec<usize> = pairs.iter().map(|&(f, _)| f).collect();
        let h = plugin_entropy(&empirical_dist(&golds, spec.feature_space())?).value;
        let log = prediction_log(&spec, &pairs, Predictor::Bayes, Channel::Other, Split::Test)?;
        let ce = cross_entropy_of_log(&log, Split::Test)?.value;
        println!(
            "{:<4} {h:>8.4} {:>8.4} {:>8.4} {:>8.4}",
            spec.name(),
            spec.feature_entropy(),
            h - ce,
            exact_mi(&spec)
        );
        assert!((ce - exact_conditional_entropy(&spec)).abs() < 0.02);
    }
    Ok(())
}
