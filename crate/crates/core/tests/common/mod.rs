#![allow(dead_code)]

use chanmi::classifier::{FeatureVector, LabeledDataset, Row};
use chanmi::estimation::{Channel, LogHeader, PredictionLog, PredictionRecord, Split};
use chanmi::info::{LabelSpace, ProbVector};
use chanmi::questions::UtteranceRecord;
use chanmi::synthetic::{sample, SyntheticSpec};
use chanmi::Unit;
use regex::Regex;

pub fn binary_space() -> LabelSpace {
    LabelSpace::new(["no", "yes"]).unwrap()
}

/// Binary log where every record gives its gold label probability `p_gold`.
pub fn constant_gold_log(channel: Channel, golds: &[usize], p_gold: f64) -> PredictionLog {
    let header = LogHeader {
        task: "sarcasm".into(),
        channel,
        model: "fixture".into(),
        labels: binary_space(),
        unit: Unit::Bits,
    };
    let records = golds
        .iter()
        .enumerate()
        .map(|(i, &g)| {
            let mut p = [1.0 - p_gold; 2];
            p[g] = p_gold;
            PredictionRecord {
                example_id: format!("u{i:03}"),
                gold: g,
                predicted: ProbVector::new(p.to_vec()).unwrap(),
                split: Split::Test,
                fold: None,
            }
        })
        .collect();
    PredictionLog::new(header, records).unwrap()
}

/// Balanced binary logs with `H(F) = 1`, `CE(F|T) = 0.98` and
/// `CE(F|A) = 0.78` bits.
pub fn sarcasm_fixture_logs() -> (PredictionLog, PredictionLog) {
    let golds: Vec<usize> = (0..100).map(|i| i % 2).collect();
    (
        constant_gold_log(Channel::Text, &golds, 2f64.powf(-0.98)),
        constant_gold_log(Channel::Audio, &golds, 2f64.powf(-0.78)),
    )
}

/// One-hot channel features sampled from `spec`, split by position into
/// 72% train, 8% dev and 20% test.
pub fn one_hot_dataset(spec: &SyntheticSpec, n: usize, seed: u64) -> LabeledDataset {
    let symbols = spec.channel_space().len();
    let pairs = sample(spec, n, seed).unwrap();
    let (n_train, n_dev) = (n * 72 / 100, n * 8 / 100);
    let rows = pairs
        .iter()
        .enumerate()
        .map(|(i, &(f, c))| Row {
            id: format!("r{i}"),
            x: FeatureVector::one_hot(symbols, c),
            label: f,
            split: if i < n_train {
                Split::Train
            } else if i < n_train + n_dev {
                Split::Dev
            } else {
                Split::Test
            },
        })
        .collect();
    LabeledDataset::new(spec.feature_space().clone(), rows).unwrap()
}

/// Five examples over three classes with dense features.
pub fn five_example_dataset() -> LabeledDataset {
    let xs = [
        [0.5, -1.2, 0.3, 2.0],
        [1.5, 0.4, -0.7, 0.1],
        [-0.3, 0.8, 1.1, -1.4],
        [0.0, -0.5, 0.9, 0.6],
        [2.2, 1.0, -0.2, -0.8],
    ];
    let ys = [0, 2, 1, 1, 0];
    let rows = xs
        .iter()
        .zip(ys)
        .enumerate()
        .map(|(i, (x, y))| Row {
            id: format!("g{i}"),
            x: FeatureVector::new(x.to_vec()).unwrap(),
            label: y,
            split: Split::Train,
        })
        .collect();
    LabeledDataset::new(LabelSpace::new(["a", "b", "c"]).unwrap(), rows).unwrap()
}

fn utterance(id: String, transcript: String, duration: f64) -> UtteranceRecord {
    let mut r = UtteranceRecord::new(id.clone(), transcript, duration).unwrap();
    r.audio_ref = Some(format!("audio/{id}.wav"));
    r
}

/// 200 unlabelled utterances with hand-counted outcomes under 3 duration
/// bins, a 2 s minimum and fractions (0.7, 0.1, 0.2).
///
/// Questions (70): 20 in [2, 4) including one at exactly 2.0, 25 in [4, 6),
/// 15 in [6, 8] including one at 8.0, 8 at 1.5 s, 2 that are only "?".
/// Non-questions (130): 3 that are only "...", 12 at 1.99 s, 30 at 3.0 s,
/// 5 at 5.0 s, 75 at 7.0 s and 5 at 9.5 s.
pub fn question_fixture() -> Vec<UtteranceRecord> {
    let mut out = Vec::with_capacity(200);
    let mut q = |d: f64, text: Option<&str>| {
        let i = out.len();
        let t = text.map_or_else(|| format!("Is this question {i}?"), str::to_string);
        out.push(utterance(format!("utt{i:03}"), t, d));
    };
    for i in 0..20 {
        q(2.0 + 0.1 * i as f64, None);
    }
    for i in 0..25 {
        q(4.1 + 0.07 * i as f64, None);
    }
    for i in 0..14 {
        q(6.1 + 0.1 * i as f64, None);
    }
    q(8.0, None);
    for _ in 0..8 {
        q(1.5, None);
    }
    q(3.0, Some("?"));
    q(3.0, Some(" ? "));

    let mut s = |d: f64, text: Option<&str>| {
        let i = out.len();
        let t = text.map_or_else(|| format!("This is statement {i}."), str::to_string);
        out.push(utterance(format!("utt{i:03}"), t, d));
    };
    for _ in 0..3 {
        s(3.0, Some("..."));
    }
    for (count, d) in [(12, 1.99), (30, 3.0), (5, 5.0), (75, 7.0), (5, 9.5)] {
        for _ in 0..count {
            s(d, None);
        }
    }
    // Interleave so classes are not contiguous in the input.
    let (a, b): (Vec<_>, Vec<_>) = out.into_iter().enumerate().partition(|(i, _)| i % 2 == 0);
    a.into_iter().chain(b).map(|(_, r)| r).collect()
}

#[derive(Debug, Clone)]
pub struct SvgCircle {
    pub label: String,
    pub bits: f64,
    pub cx: f64,
    pub cy: f64,
    pub r: f64,
}

/// Extracts the data-labelled circles from an SVG document.
pub fn parse_circles(svg: &str) -> Vec<SvgCircle> {
    let re = Regex::new(
        r#"<circle data-label="([^"]+)" data-bits="([^"]+)" cx="([^"]+)" cy="([^"]+)" r="([^"]+)""#,
    )
    .unwrap();
    re.captures_iter(svg)
        .map(|c| SvgCircle {
            label: c[1].to_string(),
            bits: c[2].parse().unwrap(),
            cx: c[3].parse().unwrap(),
            cy: c[4].parse().unwrap(),
            r: c[5].parse().unwrap(),
        })
        .collect()
}

/// Pixel area of each disk on a `width x height` raster, each pixel sampled
/// on a `ss x ss` grid.
pub fn raster_areas(circles: &[SvgCircle], width: usize, height: usize, ss: usize) -> Vec<f64> {
    let mut counts = vec![0u64; circles.len()];
    let step = 1.0 / ss as f64;
    for py in 0..height {
        for px in 0..width {
            for sy in 0..ss {
                for sx in 0..ss {
                    let x = px as f64 + (sx as f64 + 0.5) * step;
                    let y = py as f64 + (sy as f64 + 0.5) * step;
                    for (k, c) in circles.iter().enumerate() {
                        if (x - c.cx).powi(2) + (y - c.cy).powi(2) <= c.r * c.r {
                            counts[k] += 1;
                        }
                    }
                }
            }
        }
    }
    counts.into_iter().map(|c| c as f64 / (ss * ss) as f64).collect()
}
