//! Paired percentile-bootstrap intervals for every quantity of a
//! decomposition. Text and audio records are resampled together by id.

use chanmi::estimation::{
    attach_intervals, bootstrap_decomposition, decompose_split, BootstrapConfig, Channel, ResampleFrame, Split,
};
use chanmi::synthetic::{fixtures, garble, prediction_log, sample, Predictor};

fn main() -> chanmi::Result<()> {
    let spec = fixtures::s2();
    let g = fixtures::s2_text_garbling();
    let pairs = sample(&spec, 5_000, 11)?;
    let coarse: Vec<_> = pairs.iter().map(|&(f, c)| (f, g.apply(c))).collect();
    let audio = prediction_log(&spec, &pairs, Predictor::Bayes, Channel::Audio, Split::Test)?;
    let text = prediction_log(&garble(&spec, &g)?, &coarse, Predictor::Bayes, Channel::Text, Split::Test)?;

    let frame = ResampleFrame::paired(&text, &audio, Split::Test)?;
    let cfg = BootstrapConfig::new(1000, 3, 0.95);
    let ci = bootstrap_decomposition(&frame, &cfg)?;

    let mut d = decompose_split(&text, &audio, Split::Test)?;
    attach_intervals(&mut d, &ci);
    for (name, e) in [
        ("H(F)", &d.h_f),
        ("I(F;T)", &d.mi_f_text),
        ("I(F;A)", &d.mi_f_audio),
        ("I(F;A|T)", &d.mi_f_audio_given_text),
    ] {
        println!(
            "{name:<9} {:.4}  [{:.4}, {:.4}]",
            e.value,
            e.ci_low.unwrap_or(f64::NAN),
            e.ci_high.unwrap_or(f64::NAN)
        );
        for note in &e.notes {
            println!("          note: {note}");
        }
    }
    Ok(())
}
