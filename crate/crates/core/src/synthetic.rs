//! Discrete joint distributions `P(F, C)` with exactly known information
//! content.
//!
//! These are the ground truth the estimators are validated against: every
//! exact quantity here is a finite sum over the joint table, no sampling
//! involved.

use std::fs;
use std::path::Path;

use rand::distributions::{Distribution, WeightedIndex};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::{Channel, LogHeader, PredictionLog, PredictionRecord, Split};
use crate::info::{entropy_bits, LabelSpace, ProbVector};
use crate::units::Unit;

/// Tolerance on the total mass of a joint table.
pub const JOINT_SUM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct SpecFile {
    name: String,
    f_labels: Vec<String>,
    c_labels: Vec<String>,
    joint: Vec<Vec<f64>>,
}

/// A joint distribution over feature values (rows) and channel symbols
/// (columns).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpecFile", into = "SpecFile")]
pub struct SyntheticSpec {
    name: String,
    feature_space: LabelSpace,
    channel_space: LabelSpace,
    joint: Vec<Vec<f64>>,
}

impl TryFrom<SpecFile> for SyntheticSpec {
    type Error = Error;

    fn try_from(f: SpecFile) -> Result<Self> {
        SyntheticSpec::new(
            f.name,
            LabelSpace::new(f.f_labels)?,
            LabelSpace::new(f.c_labels)?,
            f.joint,
        )
    }
}

impl From<SyntheticSpec> for SpecFile {
    fn from(s: SyntheticSpec) -> Self {
        SpecFile {
            name: s.name,
            f_labels: s.feature_space.into(),
            c_labels: s.channel_space.into(),
            joint: s.joint,
        }
    }
}

impl SyntheticSpec {
    pub fn new(
        name: impl Into<String>,
        feature_space: LabelSpace,
        channel_space: LabelSpace,
        joint: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let invalid = |m: String| Error::InvalidInput(format!("joint table: {m}"));
        if joint.len() != feature_space.len() {
            return Err(invalid(format!(
                "{} rows for {} feature labels",
                joint.len(),
                feature_space.len()
            )));
        }
        let mut total = 0.0;
        for (f, row) in joint.iter().enumerate() {
            if row.len() != channel_space.len() {
                return Err(invalid(format!(
                    "row {f} has {} entries for {} channel symbols",
                    row.len(),
                    channel_space.len()
                )));
            }
            for (c, &p) in row.iter().enumerate() {
                if !p.is_finite() || p < 0.0 {
                    return Err(invalid(format!("entry ({f}, {c}) = {p} is not a probability")));
                }
            }
            let row_mass: f64 = row.iter().sum();
            if row_mass == 0.0 {
                return Err(invalid(format!("feature row {f} is all zero")));
            }
            total += row_mass;
        }
        if (total - 1.0).abs() > JOINT_SUM_TOLERANCE {
            return Err(invalid(format!(
                "entries sum to {total}, not 1 within {JOINT_SUM_TOLERANCE:e}"
            )));
        }
        Ok(SyntheticSpec {
            name: name.into(),
            feature_space,
            channel_space,
            joint,
        })
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn feature_space(&self) -> &LabelSpace {
        &self.feature_space
    }

    pub fn channel_space(&self) -> &LabelSpace {
        &self.channel_space
    }

    pub fn joint(&self) -> &[Vec<f64>] {
        &self.joint
    }

    /// `P(F)`.
    pub fn feature_marginal(&self) -> Vec<f64> {
        self.joint.iter().map(|row| row.iter().sum()).collect()
    }

    /// `P(C)`.
    pub fn channel_marginal(&self) -> Vec<f64> {
        (0..self.channel_space.len())
            .map(|c| self.joint.iter().map(|row| row[c]).sum())
            .collect()
    }

    /// `H(F)` by direct summation.
    pub fn feature_entropy(&self) -> f64 {
        entropy_bits(&self.feature_marginal())
    }
}

/// `I(F;C) = Σ p(f,c) log2 p(f,c) / (p(f) p(c))`, summed cell by cell.
pub fn exact_mi(spec: &SyntheticSpec) -> f64 {
    let pf = spec.feature_marginal();
    let pc = spec.channel_marginal();
    let mut mi = 0.0;
    for (f, row) in spec.joint.iter().enumerate() {
        for (c, &p) in row.iter().enumerate() {
            if p > 0.0 {
                mi += p * (p / (pf[f] * pc[c])).log2();
            }
        }
    }
    mi
}

/// `H(F|C) = -Σ p(f,c) log2 p(f|c)`.
pub fn exact_conditional_entropy(spec: &SyntheticSpec) -> f64 {
    let pc = spec.channel_marginal();
    let mut h = 0.0;
    for row in &spec.joint {
        for (c, &p) in row.iter().enumerate() {
            if p > 0.0 {
                h -= p * (p / pc[c]).log2();
            }
        }
    }
    h.max(0.0)
}

/// Draws `n` i.i.d. `(feature, channel)` index pairs.
pub fn sample(spec: &SyntheticSpec, n: usize, seed: u64) -> Result<Vec<(usize, usize)>> {
    if n == 0 {
        return Err(Error::InvalidInput("sample size must be at least 1".into()));
    }
    let k = spec.channel_space.len();
    let weights: Vec<f64> = spec.joint.iter().flatten().copied().collect();
    let dist = WeightedIndex::new(&weights)
        .map_err(|e| Error::InvalidInput(format!("joint table: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n)
        .map(|_| {
            let cell = dist.sample(&mut rng);
            (cell / k, cell % k)
        })
        .collect())
}

/// Exact `P(F | C = c)`.
pub fn bayes_posterior(spec: &SyntheticSpec, c: usize) -> Result<ProbVector> {
    if c >= spec.channel_space.len() {
        return Err(Error::InvalidInput(format!(
            "channel symbol {c} out of range for {} symbols",
            spec.channel_space.len()
        )));
    }
    let column: Vec<f64> = spec.joint.iter().map(|row| row[c]).collect();
    let pc: f64 = column.iter().sum();
    if pc <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "channel symbol {:?} has zero probability",
            spec.channel_space.name(c).unwrap_or("?")
        )));
    }
    PredictionLog::normalize(column)
}

/// A deterministic coarsening of channel symbols.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Garbling {
    map: Vec<usize>,
    coarse: LabelSpace,
}

impl Garbling {
    /// `map[c]` is the coarse symbol for fine symbol `c`.
    pub fn new(map: Vec<usize>, coarse: LabelSpace) -> Result<Self> {
        if let Some(&bad) = map.iter().find(|&&t| t >= coarse.len()) {
            return Err(Error::InvalidInput(format!(
                "garbling target {bad} out of range for {} coarse symbols",
                coarse.len()
            )));
        }
        Ok(Garbling { map, coarse })
    }

    pub fn identity(space: &LabelSpace) -> Self {
        Garbling {
            map: (0..space.len()).collect(),
            coarse: space.clone(),
        }
    }

    pub fn merge_all(fine_symbols: usize) -> Self {
        Garbling {
            map: vec![0; fine_symbols],
            coarse: LabelSpace::new(["*"]).expect("single label"),
        }
    }

    pub fn apply(&self, c: usize) -> usize {
        self.map[c]
    }

    pub fn coarse_space(&self) -> &LabelSpace {
        &self.coarse
    }
}

/// Merges channel symbols according to `g`, summing their probability mass.
pub fn garble(spec: &SyntheticSpec, g: &Garbling) -> Result<SyntheticSpec> {
    if g.map.len() != spec.channel_space.len() {
        return Err(Error::InvalidInput(format!(
            "garbling covers {} symbols, spec has {}",
            g.map.len(),
            spec.channel_space.len()
        )));
    }
    let joint = spec
        .joint
        .iter()
        .map(|row| {
            let mut out = vec![0.0; g.coarse.len()];
            for (c, &p) in row.iter().enumerate() {
                out[g.map[c]] += p;
            }
            out
        })
        .collect();
    SyntheticSpec::new(
        format!("{}/garbled", spec.name),
        spec.feature_space.clone(),
        g.coarse.clone(),
        joint,
    )
}

/// Predictors that can be run over samples of a spec.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Predictor {
    /// Exact posterior `P(F|C=c)`.
    Bayes,
    /// `P(F)`, ignoring the channel.
    Marginal,
    Uniform,
}

/// Runs `predictor` over sampled pairs and records the result as a log.
/// Record ids are `"s{index}"`.
pub fn prediction_log(
    spec: &SyntheticSpec,
    pairs: &[(usize, usize)],
    predictor: Predictor,
    channel: Channel,
    split: Split,
) -> Result<PredictionLog> {
    let k = spec.feature_space.len();
    let posteriors: Vec<ProbVector> = match predictor {
        Predictor::Bayes => (0..spec.channel_space.len())
            .map(|c| bayes_posterior(spec, c).or_else(|_| ProbVector::uniform(k)))
            .collect::<Result<_>>()?,
        Predictor::Marginal => {
            vec![PredictionLog::normalize(spec.feature_marginal())?; spec.channel_space.len()]
        }
        Predictor::Uniform => vec![ProbVector::uniform(k)?; spec.channel_space.len()],
    };
    let header = LogHeader {
        task: spec.name.clone(),
        channel,
        model: format!("{predictor:?}").to_lowercase(),
        labels: spec.feature_space.clone(),
        unit: Unit::Bits,
    };
    let records = pairs
        .iter()
        .enumerate()
        .map(|(i, &(f, c))| PredictionRecord {
            example_id: format!("s{i}"),
            gold: f,
            predicted: posteriors[c].clone(),
            split,
            fold: None,
        })
        .collect();
    PredictionLog::new(header, records)
}

/// Shipped fixtures.
pub mod fixtures {
    use super::*;

    fn labels(names: &[&str]) -> LabelSpace {
        LabelSpace::new(names.iter().copied()).expect("fixture labels are distinct")
    }

    /// Binary symmetric channel, uniform feature, flip probability 0.1.
    pub fn s1() -> SyntheticSpec {
        SyntheticSpec::new(
            "S1",
            labels(&["f0", "f1"]),
            labels(&["c0", "c1"]),
            vec![vec![0.45, 0.05], vec![0.05, 0.45]],
        )
        .expect("valid fixture")
    }

    /// Four-symbol "audio" channel over a uniform binary feature. Merging
    /// symbols pairwise with [`s2_text_garbling`] yields the "text" channel.
    pub fn s2() -> SyntheticSpec {
        // P(c) = 1/4 each; P(f0 | c) = 0.95, 0.55, 0.45, 0.05
        SyntheticSpec::new(
            "S2",
            labels(&["f0", "f1"]),
            labels(&["a0", "a1", "a2", "a3"]),
            vec![
                vec![0.2375, 0.1375, 0.1125, 0.0125],
                vec![0.0125, 0.1125, 0.1375, 0.2375],
            ],
        )
        .expect("valid fixture")
    }

    pub fn s2_text_garbling() -> Garbling {
        Garbling::new(vec![0, 0, 1, 1], labels(&["t0", "t1"])).expect("valid garbling")
    }

    /// Ten-class feature with a skewed marginal, read through a ten-symbol
    /// channel that reports the true class with probability 0.6.
    pub fn s3() -> SyntheticSpec {
        let marginal = [0.30, 0.18, 0.12, 0.10, 0.08, 0.07, 0.05, 0.04, 0.03, 0.03];
        let names: Vec<String> = (0..10).map(|i| format!("affect{i}")).collect();
        let symbols: Vec<String> = (0..10).map(|i| format!("s{i}")).collect();
        let joint = marginal
            .iter()
            .enumerate()
            .map(|(f, &pf)| {
                (0..10)
                    .map(|c| pf * if c == f { 0.6 } else { 0.4 / 9.0 })
                    .collect()
            })
            .collect();
        SyntheticSpec::new(
            "S3",
            LabelSpace::new(names).expect("distinct"),
            LabelSpace::new(symbols).expect("distinct"),
            joint,
        )
        .expect("valid fixture")
    }

    pub fn all() -> Vec<SyntheticSpec> {
        vec![s1(), s2(), s3()]
    }
}
