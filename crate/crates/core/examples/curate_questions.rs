//! Builds a duration-matched question/non-question dataset from synthetic
//! utterances and prints the curation audit.

use chanmi::questions::{curate, CurationConfig, UtteranceRecord};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> chanmi::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let records: Vec<UtteranceRecord> = (0..5000)
        .map(|i| {
            // Questions are rarer and shorter than statements.
            let (text, duration) = if rng.gen_bool(0.2) {
                (format!("did you see item {i}?"), rng.gen_range(1.0..6.0))
            } else {
                (format!("I saw item {i}."), rng.gen_range(0.5..12.0))
            };
            UtteranceRecord::new(format!("u{i:05}"), text, duration)
        })
        .collect::<chanmi::Result<_>>()?;

    let curated = curate(records, &CurationConfig { seed: 4, ..CurationConfig::default() })?;
    let r = &curated.report;
    println!("input            {:?}", r.input);
    println!("too short        {:?}", r.dropped.too_short);
    println!("downsampled      {:?}", r.dropped.downsampled);
    println!("train/dev/test   {:?} / {:?} / {:?}", r.final_counts.train, r.final_counts.dev, r.final_counts.test);
    println!("shortfall        {}", r.total_shortfall());
    println!("conserved        {}", r.is_conserved());

    let dir = std::env::temp_dir().join("chanmi-questions-example");
    for path in chanmi::questions::write_curated(&curated, &dir)? {
        println!("wrote {}", path.display());
    }
    Ok(())
}
