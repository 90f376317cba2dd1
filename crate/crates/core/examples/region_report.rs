//! Solves the ten-region information diagram over feature, text, audio and
//! prosody. Text and audio logs alone pin down five regions; supplying
//! prosody estimates fills in four more.

use chanmi::info::{solve_regions, ChannelDecomposition, Estimator, InfoEstimate, LabelSpace, ProsodyEstimates};

fn main() -> chanmi::Result<()> {
    let n = 1000;
    let d = ChannelDecomposition::from_entropies(
        "sarcasm",
        LabelSpace::new(["literal", "sarcastic"])?,
        InfoEstimate::new(1.0, Estimator::Plugin, n),
        InfoEstimate::new(0.98, Estimator::CrossEntropy, n),
        InfoEstimate::new(0.78, Estimator::CrossEntropy, n),
    )?;

    println!("text and audio only:\n{}", solve_regions(&d, None)?);

    let prosody = ProsodyEstimates {
        text_prosody_mi: Some(0.05),
        feature_prosody_given_text_mi: Some(0.12),
        feature_prosody_mi: Some(0.15),
    };
    println!("with prosody:\n{}", solve_regions(&d, Some(&prosody))?);
    Ok(())
}
