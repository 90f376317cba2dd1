//! Decomposes a feature's information over a fine "audio" channel and a
//! coarsened "text" view of it, using exact-posterior predictors on samples.
//!
//!     cargo run --example estimate_channels

use chanmi::estimation::{decompose_split, Channel, Split};
use chanmi::synthetic::{exact_mi, fixtures, garble, prediction_log, sample, Predictor};

fn main() -> chanmi::Result<()> {
    let audio_spec = fixtures::s2();
    let g = fixtures::s2_text_garbling();
    let text_spec = garble(&audio_spec, &g)?;

    let pairs = sample(&audio_spec, 50_000, 7)?;
    let coarse: Vec<_> = pairs.iter().map(|&(f, c)| (f, g.apply(c))).collect();
    let audio = prediction_log(&audio_spec, &pairs, Predictor::Bayes, Channel::Audio, Split::Test)?;
    let text = prediction_log(&text_spec, &coarse, Predictor::Bayes, Channel::Text, Split::Test)?;

    let d = decompose_split(&text, &audio, Split::Test)?;
    let rows = [
        ("H(F)", d.h_f.value, audio_spec.feature_entropy()),
        ("I(F;T)", d.mi_f_text.value, exact_mi(&text_spec)),
        ("I(F;A)", d.mi_f_audio.value, exact_mi(&audio_spec)),
        ("I(F;A|T)", d.mi_f_audio_given_text.value, exact_mi(&audio_spec) - exact_mi(&text_spec)),
    ];
    println!("{:<10} {:>9} {:>9}", "quantity", "estimate", "exact");
    for (name, est, exact) in rows {
        println!("{name:<10} {est:>9.4} {exact:>9.4}");
    }
    println!("uc_text {:.3}, uc_audio {:.3}", d.uc_text.unwrap_or(0.0), d.uc_audio.unwrap_or(0.0));

    // The same logs, written as JSONL, are what `chanmi estimate` reads.
    let dir = std::env::temp_dir().join("chanmi-estimate-example");
    std::fs::create_dir_all(&dir)?;
    text.to_path(dir.join("text.jsonl"))?;
    audio.to_path(dir.join("audio.jsonl"))?;
    println!(
        "\nchanmi estimate --text-log {0}/text.jsonl --audio-log {0}/audio.jsonl",
        dir.display()
    );
    Ok(())
}
