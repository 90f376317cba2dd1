mod common;

use chanmi::estimation::{
    aggregate_folds, bootstrap_ci, bootstrap_decomposition, cross_entropy_of_log, decompose, decompose_split,
    empirical_dist, plugin_entropy, BootstrapConfig, Channel, EmpiricalDist, FoldMetrics, PredictionLog,
    ResampleFrame, Split, Statistic,
};
use chanmi::info::{solve_regions, LabelSpace, NEGATIVE_MI_NOTE};
use chanmi::synthetic::{fixtures, prediction_log, sample, Predictor};
use chanmi::{Error, Unit};
use proptest::prelude::*;

const HEADER: &str = r#"{"task":"sarcasm","channel":"text","model":"m","labels":["no","yes"]}"#;

fn read(text: &str) -> chanmi::Result<PredictionLog> {
    PredictionLog::read_jsonl(text.as_bytes())
}

#[test]
fn jsonl_round_trip() {
    let (text, _) = common::sarcasm_fixture_logs();
    let mut buf = Vec::new();
    text.write_jsonl(&mut buf).unwrap();
    let back = read(std::str::from_utf8(&buf).unwrap()).unwrap();
    assert_eq!(back, text);
    assert!(buf.ends_with(b"\n"));
}

#[test]
fn schema_errors_carry_line_numbers() {
    let cases = [
        (format!("{HEADER}\n{{\"id\":\"a\",\"gold\":0,\"p\":[0.5,0.5],\"split\":\"test\"}}\n{{\"id\":\"b\",\"gold\":0,\"p\":[0.7,0.7],\"split\":\"test\"}}"), 3),
        (format!("{HEADER}\n\n{{\"id\":\"a\",\"gold\":2,\"p\":[0.5,0.5],\"split\":\"test\"}}"), 3),
        (format!("{HEADER}\n{{\"id\":\"a\",\"gold\":0,\"p\":[0.5,0.5],\"split\":\"valid\"}}"), 2),
        (format!("{HEADER}\n{{\"id\":\"a\",\"gold\":0,\"p\":[1.0],\"split\":\"test\"}}"), 2),
        (format!("{HEADER}\n{{\"id\":\"a\",\"gold\":0,\"p\":[0.5,0.5],\"split\":\"test\",\"extra\":1}}"), 2),
        (format!("{HEADER}\n{{\"id\":\"a\",\"gold\":0,\"p\":[0.5,0.5],\"split\":\"test\"}}\n{{\"id\":\"a\",\"gold\":1,\"p\":[0.5,0.5],\"split\":\"test\"}}"), 3),
        ("{\"task\":\"x\"}".to_string(), 1),
        (String::new(), 1),
    ];
    for (text, line) in cases {
        match read(&text) {
            Err(Error::Schema { line: l, .. }) => assert_eq!(l, line, "{text}"),
            other => panic!("expected schema error for {text:?}, got {other:?}"),
        }
    }
}

#[test]
fn same_id_may_recur_across_folds() {
    let text = format!(
        "{HEADER}\n{{\"id\":\"a\",\"gold\":0,\"p\":[0.5,0.5],\"split\":\"test\",\"fold\":0}}\n{{\"id\":\"a\",\"gold\":0,\"p\":[0.5,0.5],\"split\":\"test\",\"fold\":1}}"
    );
    assert_eq!(read(&text).unwrap().len(), 2);
}

#[test]
fn sarcasm_fixture_decomposes() {
    let (text, audio) = common::sarcasm_fixture_logs();
    let d = decompose_split(&text, &audio, Split::Test).unwrap();
    assert!((d.h_f.value - 1.0).abs() < 1e-12);
    assert!((d.ce_f_given_text.value - 0.98).abs() < 1e-12);
    assert!((d.mi_f_audio_given_text.value - 0.20).abs() < 1e-12);
    assert!((d.uc_audio.unwrap() - 0.22).abs() < 1e-12);
    let regions = solve_regions(&d, None).unwrap();
    assert!((regions.value(7).unwrap() - 0.98).abs() < 1e-12);
    assert!((regions.value(8).unwrap() - 0.78).abs() < 1e-12);
    assert!(!regions.is_determined(5));
}

#[test]
fn identical_logs_add_nothing() {
    let (text, _) = common::sarcasm_fixture_logs();
    let d = decompose_split(&text, &text, Split::Test).unwrap();
    assert_eq!(d.mi_f_audio_given_text.value, 0.0);
}

#[test]
fn gold_mismatch_is_detected() {
    let golds: Vec<usize> = (0..10).map(|i| i % 2).collect();
    let mut other = golds.clone();
    other[0] = 1;
    let text = common::constant_gold_log(Channel::Text, &golds, 0.6);
    let audio = common::constant_gold_log(Channel::Audio, &other, 0.6);
    assert!(matches!(decompose_split(&text, &audio, Split::Test), Err(Error::GoldMismatch(_))));
    assert!(matches!(ResampleFrame::paired(&text, &audio, Split::Test), Err(Error::GoldMismatch(_))));
}

#[test]
fn label_space_mismatch_is_detected() {
    let golds = [0, 1, 0, 1];
    let text = common::constant_gold_log(Channel::Text, &golds, 0.6);
    let audio = common::constant_gold_log(Channel::Audio, &golds, 0.6);
    let h = EmpiricalDist::from_counts(vec![1, 1, 1]).unwrap();
    assert!(matches!(decompose(&h, &text, &audio, Split::Test), Err(Error::LabelSpaceMismatch(_))));
}

#[test]
fn worse_than_marginal_gives_negative_mi_with_note() {
    let golds: Vec<usize> = (0..20).map(|i| i % 2).collect();
    let text = common::constant_gold_log(Channel::Text, &golds, 0.3);
    let audio = common::constant_gold_log(Channel::Audio, &golds, 0.6);
    let d = decompose_split(&text, &audio, Split::Test).unwrap();
    assert!(d.mi_f_text.value < 0.0);
    assert!(d.mi_f_text.notes.iter().any(|n| n == NEGATIVE_MI_NOTE));
}

#[test]
fn zero_probability_is_clamped_and_counted() {
    let golds = [0, 1, 0, 1];
    let log = common::constant_gold_log(Channel::Text, &golds, 0.0);
    let ce = cross_entropy_of_log(&log, Split::Test).unwrap();
    assert!((ce.value - (-(1e-12f64).log2())).abs() < 1e-9);
    assert!(ce.notes[0].starts_with("4 record(s) clamped"));
}

#[test]
fn nats_report_scales_every_quantity() {
    let (text, audio) = common::sarcasm_fixture_logs();
    let bits = decompose_split(&text, &audio, Split::Test).unwrap();
    let nats = bits.in_unit(Unit::Nats);
    assert!((nats.h_f.value - std::f64::consts::LN_2).abs() < 1e-12);
    assert_eq!(nats.uc_audio, bits.uc_audio);
    assert!(nats.violated_identities(1e-9).is_empty());
    let back = nats.in_unit(Unit::Bits);
    assert!((back.mi_f_audio.value - bits.mi_f_audio.value).abs() < 1e-12);
}

#[test]
fn fold_aggregation() {
    let s = aggregate_folds(&[
        FoldMetrics { loss: 0.5, accuracy: 0.8 },
        FoldMetrics { loss: 0.7, accuracy: 0.6 },
    ])
    .unwrap();
    assert!((s.mean_loss - 0.6).abs() < 1e-12);
    assert_eq!(s.folds, 2);
    assert!(aggregate_folds(&[]).is_err());
}

#[test]
fn bootstrap_does_not_depend_on_worker_count() {
    let spec = fixtures::s1();
    let pairs = sample(&spec, 2000, 3).unwrap();
    let log = prediction_log(&spec, &pairs, Predictor::Bayes, Channel::Other, Split::Test).unwrap();
    let frame = ResampleFrame::single(&log, Split::Test).unwrap();
    let one = BootstrapConfig { workers: Some(1), ..BootstrapConfig::new(200, 9, 0.95) };
    let four = BootstrapConfig { workers: Some(4), ..one };
    let a = bootstrap_ci(&frame, Statistic::Mi, &one).unwrap();
    let b = bootstrap_ci(&frame, Statistic::Mi, &four).unwrap();
    assert_eq!(a, b);
    assert!(a.0 < a.1);
}

#[test]
fn bootstrap_rejects_few_replicates() {
    let (text, _) = common::sarcasm_fixture_logs();
    let frame = ResampleFrame::single(&text, Split::Test).unwrap();
    assert!(matches!(
        bootstrap_ci(&frame, Statistic::Mi, &BootstrapConfig::new(99, 0, 0.95)),
        Err(Error::InsufficientReplicates(99))
    ));
    assert!(bootstrap_ci(&frame, Statistic::ConditionalMi, &BootstrapConfig::new(100, 0, 0.95)).is_err());
}

#[test]
fn paired_bootstrap_intervals_bracket_estimates() {
    let spec = fixtures::s2();
    let g = fixtures::s2_text_garbling();
    let text_spec = chanmi::synthetic::garble(&spec, &g).unwrap();
    let pairs = sample(&spec, 5000, 12).unwrap();
    let coarse: Vec<_> = pairs.iter().map(|&(f, c)| (f, g.apply(c))).collect();
    let audio = prediction_log(&spec, &pairs, Predictor::Bayes, Channel::Audio, Split::Test).unwrap();
    let text = prediction_log(&text_spec, &coarse, Predictor::Bayes, Channel::Text, Split::Test).unwrap();
    let d = decompose_split(&text, &audio, Split::Test).unwrap();
    let frame = ResampleFrame::paired(&text, &audio, Split::Test).unwrap();
    let ci = bootstrap_decomposition(&frame, &BootstrapConfig::new(300, 1, 0.9)).unwrap();
    for ((lo, hi), v) in [
        (ci.h_f, d.h_f.value),
        (ci.mi_f_text, d.mi_f_text.value),
        (ci.mi_f_audio, d.mi_f_audio.value),
        (ci.mi_f_audio_given_text, d.mi_f_audio_given_text.value),
    ] {
        assert!(lo <= v && v <= hi, "{v} outside [{lo}, {hi}]");
    }
}

proptest! {
    #[test]
    fn plugin_entropy_is_bounded(counts in prop::collection::vec(0u64..50, 2..8)) {
        prop_assume!(counts.iter().sum::<u64>() > 0);
        let k = counts.len();
        let h = plugin_entropy(&EmpiricalDist::from_counts(counts).unwrap()).value;
        prop_assert!(h >= 0.0);
        prop_assert!(h <= (k as f64).log2() + 1e-12);
    }

    #[test]
    fn marginal_predictor_carries_no_information(seed in 0u64..50) {
        let spec = fixtures::s1();
        let pairs = sample(&spec, 4000, seed).unwrap();
        let log = prediction_log(&spec, &pairs, Predictor::Marginal, Channel::Other, Split::Test).unwrap();
        let d = decompose_split(&log, &log, Split::Test).unwrap();
        prop_assert!(d.mi_f_text.value <= 0.01);
        prop_assert!(d.mi_f_text.value >= -0.01);
    }

    #[test]
    fn decomposition_identities_hold(
        golds in prop::collection::vec(0usize..3, 5..60),
        pt in 0.05f64..0.95,
        pa in 0.05f64..0.95,
    ) {
        prop_assume!(golds.iter().any(|&g| g != golds[0]));
        let space = LabelSpace::new(["a", "b", "c"]).unwrap();
        let build = |p: f64, channel| {
            let header = chanmi::estimation::LogHeader {
                task: "t".into(), channel, model: "m".into(), labels: space.clone(), unit: Unit::Bits,
            };
            let recs = golds.iter().enumerate().map(|(i, &g)| {
                let mut v = vec![(1.0 - p) / 2.0; 3];
                v[g] = p;
                chanmi::estimation::PredictionRecord {
                    example_id: i.to_string(), gold: g,
                    predicted: chanmi::ProbVector::new(v).unwrap(), split: Split::Test, fold: None,
                }
            }).collect();
            PredictionLog::new(header, recs).unwrap()
        };
        let d = decompose_split(&build(pt, Channel::Text), &build(pa, Channel::Audio), Split::Test).unwrap();
        prop_assert!(d.violated_identities(1e-9).is_empty());
        let h = empirical_dist(&golds, &space).map(|e| plugin_entropy(&e).value).unwrap();
        prop_assert!((d.h_f.value - h).abs() < 1e-12);
        let r = solve_regions(&d, None).unwrap();
        prop_assert!((r.value(3).unwrap() + r.value(7).unwrap() - d.h_f.value).abs() < 1e-9);
        prop_assert!((r.value(4).unwrap() - r.value(3).unwrap() - r.value(9).unwrap()).abs() < 1e-9);
    }
}
