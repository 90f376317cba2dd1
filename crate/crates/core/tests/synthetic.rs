use chanmi::estimation::{decompose_split, Channel, Split};
use chanmi::info::LabelSpace;
use chanmi::synthetic::{
    exact_conditional_entropy, exact_mi, fixtures, garble, prediction_log, sample, Garbling, Predictor, SyntheticSpec,
};
use proptest::prelude::*;

fn arb_spec() -> impl Strategy<Value = SyntheticSpec> {
    (2usize..4, 2usize..6)
        .prop_flat_map(|(k, m)| (Just(k), Just(m), prop::collection::vec(0.01f64..1.0, k * m)))
        .prop_map(|(k, m, w)| {
            let total: f64 = w.iter().sum();
            let mut joint: Vec<Vec<f64>> = w.chunks(m).map(|r| r.iter().map(|x| x / total).collect()).collect();
            let drift: f64 = 1.0 - joint.iter().flatten().sum::<f64>();
            joint[0][0] += drift;
            SyntheticSpec::new("random", LabelSpace::numbered(k).unwrap(), LabelSpace::numbered(m).unwrap(), joint)
                .unwrap()
        })
}

fn two_way(spec: &SyntheticSpec, map: &[usize]) -> Garbling {
    let m = spec.channel_space().len();
    Garbling::new(map[..m].to_vec(), LabelSpace::numbered(2).unwrap()).unwrap()
}

#[test]
fn fixture_identities_hold() {
    for spec in fixtures::all() {
        let sum = exact_mi(&spec) + exact_conditional_entropy(&spec);
        assert!((sum - spec.feature_entropy()).abs() < 1e-12, "{}", spec.name());
    }
}

#[test]
fn merging_every_symbol_removes_all_information() {
    for spec in fixtures::all() {
        let g = Garbling::merge_all(spec.channel_space().len());
        assert!(exact_mi(&garble(&spec, &g).unwrap()).abs() < 1e-12);
        let same = garble(&spec, &Garbling::identity(spec.channel_space())).unwrap();
        assert!((exact_mi(&same) - exact_mi(&spec)).abs() < 1e-15);
    }
}

#[test]
fn sampling_is_seeded() {
    let spec = fixtures::s3();
    assert_eq!(sample(&spec, 500, 7).unwrap(), sample(&spec, 500, 7).unwrap());
    assert_ne!(sample(&spec, 500, 7).unwrap(), sample(&spec, 500, 8).unwrap());
}

#[test]
fn invalid_joint_tables_are_rejected() {
    let two = || LabelSpace::numbered(2).unwrap();
    assert!(SyntheticSpec::new("x", two(), two(), vec![vec![0.5, 0.5], vec![0.0, 0.1]]).is_err());
    assert!(SyntheticSpec::new("x", two(), two(), vec![vec![1.0, 0.0], vec![0.0, 0.0]]).is_err());
    assert!(SyntheticSpec::new("x", two(), two(), vec![vec![-0.1, 0.6], vec![0.25, 0.25]]).is_err());
    assert!(SyntheticSpec::new("x", two(), two(), vec![vec![0.5], vec![0.5]]).is_err());
}

proptest! {
    #[test]
    fn garbling_never_adds_information(spec in arb_spec(), map in prop::collection::vec(0usize..2, 5)) {
        let coarse = garble(&spec, &two_way(&spec, &map)).unwrap();
        prop_assert!(exact_mi(&coarse) <= exact_mi(&spec) + 1e-12);
        prop_assert!(exact_mi(&coarse) >= -1e-12);
    }

    #[test]
    fn conditional_estimate_tracks_exact_value(spec in arb_spec(), map in prop::collection::vec(0usize..2, 5), seed in 0u64..100) {
        let g = two_way(&spec, &map);
        let coarse_spec = garble(&spec, &g).unwrap();
        let pairs = sample(&spec, 4000, seed).unwrap();
        let coarse: Vec<_> = pairs.iter().map(|&(f, c)| (f, g.apply(c))).collect();
        let fine = prediction_log(&spec, &pairs, Predictor::Bayes, Channel::Audio, Split::Test).unwrap();
        let text = prediction_log(&coarse_spec, &coarse, Predictor::Bayes, Channel::Text, Split::Test).unwrap();
        let d = decompose_split(&text, &fine, Split::Test).unwrap();
        let exact = exact_mi(&spec) - exact_mi(&coarse_spec);
        let est = d.mi_f_audio_given_text.value;
        prop_assert!((est - exact).abs() <= 0.08, "{} vs {}", est, exact);
    }
}
