mod common;

use std::collections::HashSet;

use chanmi::questions::{
    curate, duration_matched_downsample, emit_splits, label_questionhood, read_records, strip_terminal_punct,
    write_records, CurationConfig, QuestionLabel, UtteranceRecord,
};
use chanmi::Error;
use proptest::prelude::*;

fn cfg(seed: u64) -> CurationConfig {
    CurationConfig {
        min_duration_s: 2.0,
        bins: 3,
        fractions: [0.7, 0.1, 0.2],
        seed,
    }
}

#[test]
fn records_round_trip_through_jsonl() {
    let records = common::question_fixture();
    let mut buf = Vec::new();
    write_records(&records, &mut buf).unwrap();
    assert_eq!(read_records(buf.as_slice()).unwrap(), records);
}

#[test]
fn malformed_line_is_reported_by_number() {
    let input = "{\"id\":\"a\",\"transcript\":\"hi?\",\"duration_s\":3.0}\n{\"id\":\"b\",\"transcript\":\"x\"}\n";
    match read_records(input.as_bytes()) {
        Err(Error::Schema { line, .. }) => assert_eq!(line, 2),
        other => panic!("expected schema error, got {other:?}"),
    }
}

#[test]
fn empty_input_is_rejected() {
    assert!(matches!(read_records("".as_bytes()), Err(Error::Empty(_))));
}

#[test]
fn stripping_before_labelling_is_refused() {
    let raw = vec![UtteranceRecord::new("a", "Really?", 3.0).unwrap()];
    assert!(matches!(strip_terminal_punct(raw.clone()), Err(Error::PipelineOrder(_))));
    let stripped = strip_terminal_punct(label_questionhood(raw)).unwrap();
    assert_eq!(stripped.kept[0].transcript, "Really");
    assert_eq!(stripped.kept[0].label, Some(QuestionLabel::Question));
}

#[test]
fn curation_is_reproducible_and_seed_dependent() {
    let a = curate(common::question_fixture(), &cfg(1)).unwrap();
    let b = curate(common::question_fixture(), &cfg(1)).unwrap();
    let c = curate(common::question_fixture(), &cfg(2)).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.report.final_counts, c.report.final_counts);
    assert_ne!(a.splits, c.splits);
}

#[test]
fn splits_are_disjoint_and_cover_survivors() {
    let c = curate(common::question_fixture(), &cfg(9)).unwrap();
    let mut seen = HashSet::new();
    for (_, part) in c.splits.named() {
        for r in part {
            assert!(seen.insert(r.id.clone()), "{} appears twice", r.id);
            assert!(r.duration >= 2.0);
            assert!(!r.transcript.contains(['?', '.', ',']));
        }
    }
    assert_eq!(seen.len(), c.report.final_counts.total().total());
}

fn arb_records() -> impl Strategy<Value = Vec<UtteranceRecord>> {
    prop::collection::vec((any::<bool>(), 0.5f64..12.0, 0u8..10), 1..150).prop_map(|items| {
        items
            .into_iter()
            .enumerate()
            .map(|(i, (q, d, kind))| {
                let text = match (q, kind) {
                    (_, 0) => "?".to_string(),
                    (true, _) => format!("question {i}?"),
                    (false, _) => format!("statement {i}."),
                };
                UtteranceRecord::new(format!("r{i}"), text, d).unwrap()
            })
            .collect()
    })
}

proptest! {
    #[test]
    fn counts_are_conserved(records in arb_records(), bins in 1usize..8, seed in 0u64..50) {
        let c = curate(records, &CurationConfig { bins, ..cfg(seed) }).unwrap();
        prop_assert!(c.report.is_conserved());
        for b in &c.report.bins {
            prop_assert!(b.selected <= b.questions);
            prop_assert!(b.selected <= b.available);
            prop_assert_eq!(b.selected + b.shortfall, b.questions);
        }
    }

    #[test]
    fn downsampling_never_exceeds_questions_per_bin(records in arb_records(), bins in 1usize..8, seed in 0u64..50) {
        let labeled = label_questionhood(records);
        let (q, nq): (Vec<_>, Vec<_>) = labeled.into_iter().partition(|r| r.is_question());
        let d = duration_matched_downsample(&q, nq.clone(), bins, seed).unwrap();
        prop_assert!(d.kept.len() <= q.len());
        prop_assert_eq!(d.kept.len() + d.dropped.len(), nq.len());
        let order: Vec<&str> = nq.iter().map(|r| r.id.as_str()).filter(|id| d.kept.iter().any(|k| k.id == *id)).collect();
        let kept: Vec<&str> = d.kept.iter().map(|r| r.id.as_str()).collect();
        prop_assert_eq!(order, kept);
    }

    #[test]
    fn emitted_splits_partition_their_input(records in arb_records(), seed in 0u64..50) {
        let labeled = label_questionhood(records);
        let n = labeled.len();
        let s = emit_splits(labeled, [0.72, 0.08, 0.20], seed).unwrap();
        prop_assert_eq!(s.train.len() + s.dev.len() + s.test.len(), n);
    }
}
