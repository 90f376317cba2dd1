//! Construction of a balanced questionhood corpus from segmented,
//! duration-annotated utterances.
//!
//! The pipeline runs in a fixed order: label by trailing question mark,
//! strip `.`, `,` and `?`, drop short utterances, downsample non-questions so
//! their durations follow the questions' histogram, and cut seeded splits.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Split sizes of the reference corpus, reported for comparison.
pub const REFERENCE_SPLIT_SIZES: [usize; 3] = [13842, 1538, 3845];
pub const DEFAULT_MIN_DURATION_S: f64 = 2.0;
pub const DEFAULT_BINS: usize = 20;
pub const DEFAULT_FRACTIONS: [f64; 3] = [0.72, 0.08, 0.20];
const FRACTION_TOLERANCE: f64 = 1e-9;
const STRIPPED: [char; 3] = ['.', ',', '?'];
const CLOSING_QUOTES: [char; 5] = ['"', '\'', '\u{201D}', '\u{2019}', '\u{00BB}'];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuestionLabel {
    Question,
    NonQuestion,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UtteranceRecord {
    pub id: String,
    pub transcript: String,
    #[serde(rename = "duration_s")]
    pub duration: f64,
    #[serde(default)]
    pub audio_ref: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<QuestionLabel>,
}

impl UtteranceRecord {
    pub fn new(id: impl Into<String>, transcript: impl Into<String>, duration: f64) -> Result<Self> {
        let r = UtteranceRecord {
            id: id.into(),
            transcript: transcript.into(),
            duration,
            audio_ref: None,
            label: None,
        };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "record {:?}: duration must be positive, got {}",
                self.id, self.duration
            )));
        }
        if self.transcript.trim().is_empty() {
            return Err(Error::InvalidInput(format!("record {:?}: empty transcript", self.id)));
        }
        Ok(())
    }

    pub fn is_question(&self) -> bool {
        self.label == Some(QuestionLabel::Question)
    }
}

/// Reads one record per line, rejecting duplicate ids and empty input.
pub fn read_records<R: BufRead>(reader: R) -> Result<Vec<UtteranceRecord>> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let schema = |message: String| Error::Schema { line: i + 1, message };
        let rec: UtteranceRecord = serde_json::from_str(&line).map_err(|e| schema(e.to_string()))?;
        rec.validate().map_err(|e| schema(e.to_string()))?;
        if !seen.insert(rec.id.clone()) {
            return Err(schema(format!("duplicate id {:?}", rec.id)));
        }
        out.push(rec);
    }
    if out.is_empty() {
        return Err(Error::Empty("no utterance records".into()));
    }
    Ok(out)
}

pub fn read_records_path(path: impl AsRef<Path>) -> Result<Vec<UtteranceRecord>> {
    read_records(BufReader::new(File::open(path)?))
}

pub fn write_records<W: Write>(records: &[UtteranceRecord], mut w: W) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

/// True iff the transcript, after trimming trailing whitespace and closing
/// quotes, ends in `?`.
pub fn ends_in_question_mark(transcript: &str) -> bool {
    transcript
        .trim_end_matches(|c: char| c.is_whitespace() || CLOSING_QUOTES.contains(&c))
        .ends_with('?')
}

/// Labels every unlabelled record; existing labels are kept.
pub fn label_questionhood(records: Vec<UtteranceRecord>) -> Vec<UtteranceRecord> {
    records
        .into_iter()
        .map(|mut r| {
            if r.label.is_none() {
                r.label = Some(if ends_in_question_mark(&r.transcript) {
                    QuestionLabel::Question
                } else {
                    QuestionLabel::NonQuestion
                });
            }
            r
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stripped {
    pub kept: Vec<UtteranceRecord>,
    /// Records whose transcript was empty after stripping.
    pub dropped: Vec<UtteranceRecord>,
}

/// Removes every `.`, `,` and `?`. Fails if any record is still unlabelled,
/// since stripping destroys the question-mark cue.
pub fn strip_terminal_punct(records: Vec<UtteranceRecord>) -> Result<Stripped> {
    if let Some(r) = records.iter().find(|r| r.label.is_none()) {
        return Err(Error::PipelineOrder(format!(
            "record {:?} is unlabelled; label before stripping punctuation",
            r.id
        )));
    }
    let (kept, dropped) = records
        .into_iter()
        .map(|mut r| {
            r.transcript.retain(|c| !STRIPPED.contains(&c));
            r
        })
        .partition(|r| !r.transcript.trim().is_empty());
    Ok(Stripped { kept, dropped })
}

/// Keeps records lasting at least `min_s` seconds. Returns `(kept, dropped)`.
pub fn filter_min_duration(
    records: Vec<UtteranceRecord>,
    min_s: f64,
) -> (Vec<UtteranceRecord>, Vec<UtteranceRecord>) {
    records.into_iter().partition(|r| r.duration >= min_s)
}

/// One duration bin of the downsampling step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinAudit {
    pub lo: f64,
    pub hi: f64,
    pub questions: usize,
    /// Non-questions available in this bin before sampling.
    pub available: usize,
    pub selected: usize,
    pub shortfall: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Downsampled {
    /// Selected non-questions, in input order.
    pub kept: Vec<UtteranceRecord>,
    pub dropped: Vec<UtteranceRecord>,
    pub bins: Vec<BinAudit>,
}

/// Equal-width bins over `[lo, hi]`; the top edge belongs to the last bin.
#[derive(Debug, Clone, Copy)]
struct Bins {
    lo: f64,
    hi: f64,
    n: usize,
}

impl Bins {
    fn index(&self, d: f64) -> Option<usize> {
        if d < self.lo || d > self.hi {
            return None;
        }
        if self.hi == self.lo {
            return Some(0);
        }
        let i = ((d - self.lo) / (self.hi - self.lo) * self.n as f64).floor() as usize;
        Some(i.min(self.n - 1))
    }

    fn edges(&self, i: usize) -> (f64, f64) {
        let w = (self.hi - self.lo) / self.n as f64;
        let hi = if i + 1 == self.n { self.hi } else { self.lo + w * (i + 1) as f64 };
        (self.lo + w * i as f64, hi)
    }
}

/// Samples non-questions so that each duration bin holds as many as it
/// holds questions, or all available when there are fewer. Bins span the
/// question duration range; non-questions outside it are never selected.
pub fn duration_matched_downsample(
    questions: &[UtteranceRecord],
    non_questions: Vec<UtteranceRecord>,
    n_bins: usize,
    seed: u64,
) -> Result<Downsampled> {
    if n_bins == 0 {
        return Err(Error::InvalidInput("bin count must be at least 1".into()));
    }
    let (lo, hi) = questions
        .iter()
        .map(|q| q.duration)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), d| (lo.min(d), hi.max(d)));
    if questions.is_empty() {
        return Ok(Downsampled {
            kept: Vec::new(),
            dropped: non_questions,
            bins: Vec::new(),
        });
    }
    let bins = Bins { lo, hi, n: n_bins };

    let mut q_counts = vec![0usize; n_bins];
    for q in questions {
        q_counts[bins.index(q.duration).expect("question inside its own range")] += 1;
    }
    let mut candidates: Vec<Vec<usize>> = vec![Vec::new(); n_bins];
    for (i, r) in non_questions.iter().enumerate() {
        if let Some(b) = bins.index(r.duration) {
            candidates[b].push(i);
        }
    }

    let mut selected = vec![false; non_questions.len()];
    let mut audit = Vec::with_capacity(n_bins);
    for (b, mut cands) in candidates.into_iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(b as u64);
        let available = cands.len();
        let take = q_counts[b].min(available);
        cands.shuffle(&mut rng);
        for &i in &cands[..take] {
            selected[i] = true;
        }
        let (lo, hi) = bins.edges(b);
        audit.push(BinAudit {
            lo,
            hi,
            questions: q_counts[b],
            available,
            selected: take,
            shortfall: q_counts[b] - take,
        });
    }

    let (kept, dropped): (Vec<_>, Vec<_>) = non_questions
        .into_iter()
        .zip(selected)
        .partition(|(_, s)| *s);
    Ok(Downsampled {
        kept: kept.into_iter().map(|(r, _)| r).collect(),
        dropped: dropped.into_iter().map(|(r, _)| r).collect(),
        bins: audit,
    })
}

/// Sizes by largest remainder so they always sum to `n`; ties go to the
/// earlier split.
pub fn split_sizes(n: usize, fractions: [f64; 3]) -> Result<[usize; 3]> {
    if fractions.iter().any(|f| !(*f >= 0.0 && f.is_finite())) {
        return Err(Error::InvalidInput(format!("fractions {fractions:?} must be non-negative")));
    }
    let total: f64 = fractions.iter().sum();
    if (total - 1.0).abs() > FRACTION_TOLERANCE {
        return Err(Error::InvalidInput(format!("fractions sum to {total}, not 1")));
    }
    let exact = fractions.map(|f| f * n as f64);
    let mut sizes = exact.map(|x| x.floor() as usize);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| (exact[b] - exact[b].floor()).total_cmp(&(exact[a] - exact[a].floor())).then(a.cmp(&b)));
    let short = n.saturating_sub(sizes.iter().sum());
    for &i in order.iter().take(short) {
        sizes[i] += 1;
    }
    Ok(sizes)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Splits {
    pub train: Vec<UtteranceRecord>,
    pub dev: Vec<UtteranceRecord>,
    pub test: Vec<UtteranceRecord>,
}

impl Splits {
    pub fn named(&self) -> [(&'static str, &[UtteranceRecord]); 3] {
        [("train", &self.train), ("dev", &self.dev), ("test", &self.test)]
    }
}

/// Seeded shuffle within each class, then an even interleave of the two
/// classes so every contiguous split keeps the overall class ratio.
pub fn emit_splits(records: Vec<UtteranceRecord>, fractions: [f64; 3], seed: u64) -> Result<Splits> {
    if let Some(r) = records.iter().find(|r| r.label.is_none()) {
        return Err(Error::PipelineOrder(format!("record {:?} is unlabelled", r.id)));
    }
    let sizes = split_sizes(records.len(), fractions)?;
    let (mut qs, mut ns): (Vec<_>, Vec<_>) = records.into_iter().partition(UtteranceRecord::is_question);
    let mut keyed = Vec::with_capacity(qs.len() + ns.len());
    for (class, group) in [&mut qs, &mut ns].into_iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(100 + class as u64);
        group.shuffle(&mut rng);
        let count = group.len() as f64;
        keyed.extend(
            group
                .drain(..)
                .enumerate()
                .map(|(rank, r)| ((rank as f64 + 0.5) / count, class, r)),
        );
    }
    keyed.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut it = keyed.into_iter().map(|(_, _, r)| r);
    let train = it.by_ref().take(sizes[0]).collect();
    let dev = it.by_ref().take(sizes[1]).collect();
    let test = it.collect();
    Ok(Splits { train, dev, test })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CurationConfig {
    pub min_duration_s: f64,
    pub bins: usize,
    pub fractions: [f64; 3],
    pub seed: u64,
}

impl Default for CurationConfig {
    fn default() -> Self {
        CurationConfig {
            min_duration_s: DEFAULT_MIN_DURATION_S,
            bins: DEFAULT_BINS,
            fractions: DEFAULT_FRACTIONS,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassCounts {
    pub question: usize,
    pub non_question: usize,
}

impl ClassCounts {
    pub fn of(records: &[UtteranceRecord]) -> Self {
        let question = records.iter().filter(|r| r.is_question()).count();
        ClassCounts {
            question,
            non_question: records.len() - question,
        }
    }

    pub fn total(&self) -> usize {
        self.question + self.non_question
    }
}

impl std::ops::Add for ClassCounts {
    type Output = ClassCounts;
    fn add(self, o: ClassCounts) -> ClassCounts {
        ClassCounts {
            question: self.question + o.question,
            non_question: self.non_question + o.non_question,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Drops {
    pub empty_after_strip: ClassCounts,
    pub too_short: ClassCounts,
    pub downsampled: ClassCounts,
}

impl Drops {
    pub fn total(&self) -> ClassCounts {
        self.empty_after_strip + self.too_short + self.downsampled
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitCounts {
    pub train: ClassCounts,
    pub dev: ClassCounts,
    pub test: ClassCounts,
}

impl SplitCounts {
    pub fn total(&self) -> ClassCounts {
        self.train + self.dev + self.test
    }
}

/// Audit of one curation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurationReport {
    pub config: CurationConfig,
    pub input: ClassCounts,
    pub dropped: Drops,
    #[serde(rename = "final")]
    pub final_counts: SplitCounts,
    pub bins: Vec<BinAudit>,
    pub reference_split_sizes: [usize; 3],
}

impl CurationReport {
    /// Input equals drops plus final counts, for each class.
    pub fn is_conserved(&self) -> bool {
        self.dropped.total() + self.final_counts.total() == self.input
    }

    pub fn total_shortfall(&self) -> usize {
        self.bins.iter().map(|b| b.shortfall).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Curated {
    pub splits: Splits,
    pub report: CurationReport,
}

/// Runs the whole pipeline.
pub fn curate(records: Vec<UtteranceRecord>, cfg: &CurationConfig) -> Result<Curated> {
    split_sizes(0, cfg.fractions)?;
    if cfg.bins == 0 {
        return Err(Error::InvalidInput("bin count must be at least 1".into()));
    }
    let labeled = label_questionhood(records);
    let input = ClassCounts::of(&labeled);

    let stripped = strip_terminal_punct(labeled)?;
    let (long_enough, short) = filter_min_duration(stripped.kept, cfg.min_duration_s);
    let (questions, non_questions): (Vec<_>, Vec<_>) =
        long_enough.into_iter().partition(UtteranceRecord::is_question);
    let down = duration_matched_downsample(&questions, non_questions, cfg.bins, cfg.seed)?;

    let dropped = Drops {
        empty_after_strip: ClassCounts::of(&stripped.dropped),
        too_short: ClassCounts::of(&short),
        downsampled: ClassCounts::of(&down.dropped),
    };
    let mut balanced = questions;
    balanced.extend(down.kept);
    let splits = emit_splits(balanced, cfg.fractions, cfg.seed)?;
    let final_counts = SplitCounts {
        train: ClassCounts::of(&splits.train),
        dev: ClassCounts::of(&splits.dev),
        test: ClassCounts::of(&splits.test),
    };
    let report = CurationReport {
        config: *cfg,
        input,
        dropped,
        final_counts,
        bins: down.bins,
        reference_split_sizes: REFERENCE_SPLIT_SIZES,
    };
    debug_assert!(report.is_conserved());
    Ok(Curated { splits, report })
}

/// Writes `train.jsonl`, `dev.jsonl`, `test.jsonl` and `report.json` into
/// `dir`, returning the paths written.
pub fn write_curated(curated: &Curated, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    let mut paths = Vec::new();
    for (name, records) in curated.splits.named() {
        let path = dir.join(format!("{name}.jsonl"));
        write_records(records, BufWriter::new(File::create(&path)?))?;
        paths.push(path);
    }
    let path = dir.join("report.json");
    let mut w = BufWriter::new(File::create(&path)?);
    serde_json::to_writer_pretty(&mut w, &curated.report)?;
    w.write_all(b"\n")?;
    w.flush()?;
    paths.push(path);
    Ok(paths)
}
