//! The prediction-log wire format.
//!
//! One JSON object per line, UTF-8, LF newlines. Line 1 is the header:
//!
//! ```text
//! {"task": "sarcasm", "channel": "audio", "model": "whisper-medium", "labels": ["no", "yes"], "unit": "bits"}
//! ```
//!
//! and every following line is a record:
//!
//! ```text
//! {"id": "utt-17", "gold": 1, "p": [0.3, 0.7], "split": "test", "fold": null}
//! ```

use std::collections::HashSet;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::info::{LabelSpace, ProbVector, PROB_SUM_TOLERANCE};
use crate::units::Unit;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Dev,
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Dev => "dev",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "dev" => Ok(Split::Dev),
            "test" => Ok(Split::Test),
            other => Err(Error::InvalidInput(format!(
                "unknown split {other:?}; expected train, dev or test"
            ))),
        }
    }
}

/// Communication channel a classifier read its input from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    Text,
    Audio,
    AudioText,
    Other,
}

impl FromStr for Channel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" => Ok(Channel::Text),
            "audio" => Ok(Channel::Audio),
            "audio_text" => Ok(Channel::AudioText),
            "other" => Ok(Channel::Other),
            other => Err(Error::InvalidInput(format!(
                "unknown channel {other:?}; expected text, audio, audio_text or other"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogHeader {
    pub task: String,
    pub channel: Channel,
    pub model: String,
    pub labels: LabelSpace,
    #[serde(default)]
    pub unit: Unit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredictionRecord {
    #[serde(rename = "id")]
    pub example_id: String,
    pub gold: usize,
    #[serde(rename = "p")]
    pub predicted: ProbVector,
    pub split: Split,
    #[serde(default)]
    pub fold: Option<u32>,
}

/// Gold labels and predicted distributions from one classifier on one channel.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionLog {
    header: LogHeader,
    records: Vec<PredictionRecord>,
}

impl PredictionLog {
    pub fn new(header: LogHeader, records: Vec<PredictionRecord>) -> Result<Self> {
        let mut log = PredictionLog {
            header,
            records: Vec::with_capacity(records.len()),
        };
        let mut seen = HashSet::new();
        for rec in records {
            log.check_record(&rec, &mut seen)?;
            log.records.push(rec);
        }
        Ok(log)
    }

    fn check_record(
        &self,
        rec: &PredictionRecord,
        seen: &mut HashSet<(Split, Option<u32>, String)>,
    ) -> Result<()> {
        let k = self.header.labels.len();
        if rec.gold >= k {
            return Err(Error::InvalidInput(format!(
                "record {:?}: gold {} out of range for {k} labels",
                rec.example_id, rec.gold
            )));
        }
        if rec.predicted.len() != k {
            return Err(Error::LabelSpaceMismatch(format!(
                "record {:?}: {} probabilities for {k} labels",
                rec.example_id,
                rec.predicted.len()
            )));
        }
        if !seen.insert((rec.split, rec.fold, rec.example_id.clone())) {
            return Err(Error::InvalidInput(format!(
                "duplicate id {:?} within split {} fold {:?}",
                rec.example_id, rec.split, rec.fold
            )));
        }
        Ok(())
    }

    pub fn header(&self) -> &LogHeader {
        &self.header
    }

    pub fn label_space(&self) -> &LabelSpace {
        &self.header.labels
    }

    pub fn records(&self) -> &[PredictionRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn in_split(&self, split: Split) -> impl Iterator<Item = &PredictionRecord> {
        self.records.iter().filter(move |r| r.split == split)
    }

    /// Parses the JSONL wire format; errors carry 1-based line numbers.
    pub fn read_jsonl<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = reader.lines().enumerate();
        let header: LogHeader = loop {
            match lines.next() {
                None => {
                    return Err(Error::Schema {
                        line: 1,
                        message: "missing header line".into(),
                    })
                }
                Some((i, line)) => {
                    let line = line?;
                    if line.trim().is_empty() {
                        continue;
                    }
                    break serde_json::from_str(&line).map_err(|e| Error::Schema {
                        line: i + 1,
                        message: format!("header: {e}"),
                    })?;
                }
            }
        };
        let mut log = PredictionLog {
            header,
            records: Vec::new(),
        };
        let mut seen = HashSet::new();
        for (i, line) in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let schema = |message: String| Error::Schema {
                line: i + 1,
                message,
            };
            let rec: PredictionRecord =
                serde_json::from_str(&line).map_err(|e| schema(e.to_string()))?;
            log.check_record(&rec, &mut seen)
                .map_err(|e| schema(e.to_string()))?;
            log.records.push(rec);
        }
        Ok(log)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let file = File::open(path.as_ref())?;
        Self::read_jsonl(BufReader::new(file))
    }

    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<()> {
        serde_json::to_writer(&mut w, &self.header)?;
        w.write_all(b"\n")?;
        for rec in &self.records {
            serde_json::to_writer(&mut w, rec)?;
            w.write_all(b"\n")?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_path(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = File::create(path.as_ref())?;
        self.write_jsonl(BufWriter::new(file))
    }

    /// Renormalizes a raw score vector so that it passes [`ProbVector`]
    /// validation. Used by producers that accumulate rounding error.
    pub fn normalize(raw: Vec<f64>) -> Result<ProbVector> {
        let total: f64 = raw.iter().sum();
        if !(total.is_finite() && total > 0.0) {
            return Err(Error::InvalidProbVector(format!("cannot normalize mass {total}")));
        }
        let probs: Vec<f64> = raw.into_iter().map(|p| p / total).collect();
        debug_assert!((probs.iter().sum::<f64>() - 1.0).abs() <= PROB_SUM_TOLERANCE);
        ProbVector::new(probs)
    }
}
