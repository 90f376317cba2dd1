//! Information-theoretic arithmetic over discrete features.
//!
//! Everything here is a pure function of its inputs. Values are in bits;
//! [`ChannelDecomposition::in_unit`] rescales a finished decomposition for
//! reporting.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::Unit;

/// Tolerance on the total mass of a probability vector.
pub const PROB_SUM_TOLERANCE: f64 = 1e-9;

/// Tolerance used when re-checking decomposition identities on values that
/// have travelled through a file.
pub const IDENTITY_TOLERANCE: f64 = 1e-9;

pub const NEGATIVE_MI_NOTE: &str = "classifier underperforms marginal; MI lower bound is negative";

/// Ordered, non-empty set of class names. A label's index is its identity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct LabelSpace(Vec<String>);

impl LabelSpace {
    pub fn new<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::InvalidLabelSpace("label list is empty".into()));
        }
        let mut seen = HashSet::new();
        for label in &labels {
            if !seen.insert(label.as_str()) {
                return Err(Error::InvalidLabelSpace(format!(
                    "duplicate label {label:?}"
                )));
            }
        }
        Ok(LabelSpace(labels))
    }

    /// Labels `"0"`, `"1"`, ... for data that only carries class indices.
    pub fn numbered(k: usize) -> Result<Self> {
        Self::new((0..k).map(|i| i.to_string()))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.0
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.0.iter().position(|l| l == label)
    }

    pub fn name(&self, index: usize) -> Option<&str> {
        self.0.get(index).map(String::as_str)
    }
}

impl TryFrom<Vec<String>> for LabelSpace {
    type Error = Error;

    fn try_from(labels: Vec<String>) -> Result<Self> {
        LabelSpace::new(labels)
    }
}

impl From<LabelSpace> for Vec<String> {
    fn from(space: LabelSpace) -> Self {
        space.0
    }
}

/// A probability distribution over a label space.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct ProbVector(Vec<f64>);

impl ProbVector {
    /// Validates non-negativity, finiteness and unit mass.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidProbVector("no entries".into()));
        }
        for (i, &p) in probs.iter().enumerate() {
            if !p.is_finite() {
                return Err(Error::InvalidProbVector(format!(
                    "entry {i} is not finite ({p})"
                )));
            }
            if p < 0.0 {
                return Err(Error::InvalidProbVector(format!(
                    "entry {i} is negative ({p})"
                )));
            }
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > PROB_SUM_TOLERANCE {
            return Err(Error::InvalidProbVector(format!(
                "entries sum to {total}, not 1 within {PROB_SUM_TOLERANCE:e}"
            )));
        }
        Ok(ProbVector(probs))
    }

    /// Like [`ProbVector::new`], additionally requiring one entry per label.
    pub fn for_space(probs: Vec<f64>, space: &LabelSpace) -> Result<Self> {
        if probs.len() != space.len() {
            return Err(Error::InvalidProbVector(format!(
                "length {} does not match label space of size {}",
                probs.len(),
                space.len()
            )));
        }
        Self::new(probs)
    }

    pub fn uniform(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidProbVector("no entries".into()));
        }
        Ok(ProbVector(vec![1.0 / k as f64; k]))
    }

    pub fn one_hot(k: usize, index: usize) -> Result<Self> {
        if index >= k {
            return Err(Error::InvalidProbVector(format!(
                "index {index} out of range for {k} entries"
            )));
        }
        let mut probs = vec![0.0; k];
        probs[index] = 1.0;
        Ok(ProbVector(probs))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn get(&self, index: usize) -> Option<f64> {
        self.0.get(index).copied()
    }

    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &p) in self.0.iter().enumerate() {
            if p > self.0[best] {
                best = i;
            }
        }
        best
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl<'de> Deserialize<'de> for ProbVector {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let probs = Vec::<f64>::deserialize(d)?;
        ProbVector::new(probs).map_err(serde::de::Error::custom)
    }
}

/// Shannon entropy in bits, with `0 log 0 = 0`.
pub fn entropy_of(dist: &ProbVector) -> f64 {
    entropy_bits(dist.as_slice())
}

/// Entropy of an unchecked slice of probabilities. Crate-internal callers
/// guarantee validity.
pub(crate) fn entropy_bits(probs: &[f64]) -> f64 {
    let h: f64 = probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum();
    // -0.0 for degenerate inputs
    h.max(0.0)
}

/// How an [`InfoEstimate`] was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    Plugin,
    CrossEntropy,
    Difference,
}

/// A point estimate of an information quantity, with provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfoEstimate {
    pub value: f64,
    pub estimator: Estimator,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ci_low: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ci_high: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl InfoEstimate {
    pub fn new(value: f64, estimator: Estimator, n: usize) -> Self {
        InfoEstimate {
            value,
            estimator,
            n: n.max(1),
            ci_low: None,
            ci_high: None,
            notes: Vec::new(),
        }
    }

    /// Attaches a confidence interval. A percentile interval can miss its own
    /// point estimate; in that case the interval is widened to include it and
    /// a note records the adjustment.
    pub fn with_ci(mut self, low: f64, high: f64) -> Self {
        let (mut low, mut high) = if low <= high { (low, high) } else { (high, low) };
        if self.value < low || self.value > high {
            self.notes.push(format!(
                "percentile interval [{low}, {high}] excluded the point estimate; widened to include it"
            ));
            low = low.min(self.value);
            high = high.max(self.value);
        }
        self.ci_low = Some(low);
        self.ci_high = Some(high);
        self
    }

    pub fn ci(&self) -> Option<(f64, f64)> {
        self.ci_low.zip(self.ci_high)
    }

    pub fn in_unit(&self, unit: Unit) -> Self {
        let k = unit.per_bit();
        InfoEstimate {
            value: self.value * k,
            ci_low: self.ci_low.map(|v| v * k),
            ci_high: self.ci_high.map(|v| v * k),
            ..self.clone()
        }
    }
}

/// `I(F;C) = H(F) - H(F|C)` where the conditional entropy is a classifier's
/// cross-entropy. A negative result is kept and flagged, never clamped.
pub fn mi_from_entropies(h_f: f64, ce_f_given_c: f64, n: usize) -> Result<InfoEstimate> {
    if !h_f.is_finite() || h_f < 0.0 {
        return Err(Error::InvalidInput(format!("H(F) must be finite and >= 0, got {h_f}")));
    }
    if !ce_f_given_c.is_finite() || ce_f_given_c < 0.0 {
        return Err(Error::InvalidInput(format!(
            "cross-entropy must be finite and >= 0, got {ce_f_given_c}"
        )));
    }
    let mut est = InfoEstimate::new(h_f - ce_f_given_c, Estimator::Difference, n);
    if est.value < 0.0 {
        est.notes.push(NEGATIVE_MI_NOTE.to_string());
    }
    Ok(est)
}

/// `I(F;A|T) = I(F;A) - I(F;T)`, valid when audio determines text.
pub fn conditional_mi(
    mi_f_audio: &InfoEstimate,
    audio_space: &LabelSpace,
    mi_f_text: &InfoEstimate,
    text_space: &LabelSpace,
) -> Result<InfoEstimate> {
    if audio_space != text_space {
        return Err(Error::LabelSpaceMismatch(format!(
            "audio labels {:?} vs text labels {:?}",
            audio_space.labels(),
            text_space.labels()
        )));
    }
    for (name, est) in [("I(F;A)", mi_f_audio), ("I(F;T)", mi_f_text)] {
        if est.estimator != Estimator::Difference {
            return Err(Error::InvalidInput(format!(
                "{name} must be a difference estimate, got {:?}",
                est.estimator
            )));
        }
    }
    let mut est = InfoEstimate::new(
        mi_f_audio.value - mi_f_text.value,
        Estimator::Difference,
        mi_f_audio.n.min(mi_f_text.n),
    );
    if est.value < 0.0 {
        est.notes.push(
            "text channel appears more informative than audio; nested-channel premise violated by the estimates"
                .to_string(),
        );
    }
    Ok(est)
}

/// Fraction of the feature's entropy carried by a channel.
pub fn uncertainty_coefficient(mi: f64, h_f: f64) -> Result<f64> {
    if h_f <= 0.0 {
        return Err(Error::NoInformation);
    }
    Ok(mi / h_f)
}

/// The measured quantities for one feature over a text and an audio channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelDecomposition {
    pub feature_name: String,
    pub label_space: LabelSpace,
    #[serde(default)]
    pub unit: Unit,
    pub h_f: InfoEstimate,
    pub ce_f_given_text: InfoEstimate,
    pub ce_f_given_audio: InfoEstimate,
    pub mi_f_text: InfoEstimate,
    pub mi_f_audio: InfoEstimate,
    pub mi_f_audio_given_text: InfoEstimate,
    /// `None` when `H(F) = 0`.
    pub uc_text: Option<f64>,
    pub uc_audio: Option<f64>,
}

impl ChannelDecomposition {
    /// Derives every difference quantity from the three measured entropies.
    pub fn from_entropies(
        feature_name: impl Into<String>,
        label_space: LabelSpace,
        h_f: InfoEstimate,
        ce_f_given_text: InfoEstimate,
        ce_f_given_audio: InfoEstimate,
    ) -> Result<Self> {
        let mi_f_text = mi_from_entropies(h_f.value, ce_f_given_text.value, ce_f_given_text.n)?;
        let mi_f_audio =
            mi_from_entropies(h_f.value, ce_f_given_audio.value, ce_f_given_audio.n)?;
        let mi_f_audio_given_text =
            conditional_mi(&mi_f_audio, &label_space, &mi_f_text, &label_space)?;
        let uc_text = uncertainty_coefficient(mi_f_text.value, h_f.value).ok();
        let uc_audio = uncertainty_coefficient(mi_f_audio.value, h_f.value).ok();
        Ok(ChannelDecomposition {
            feature_name: feature_name.into(),
            label_space,
            unit: Unit::Bits,
            h_f,
            ce_f_given_text,
            ce_f_given_audio,
            mi_f_text,
            mi_f_audio,
            mi_f_audio_given_text,
            uc_text,
            uc_audio,
        })
    }

    /// Rescales every estimate into `unit`. Coefficients are unit-free.
    pub fn in_unit(&self, unit: Unit) -> Self {
        let to_bits = 1.0 / self.unit.per_bit();
        let k = to_bits * unit.per_bit();
        let scale = |e: &InfoEstimate| InfoEstimate {
            value: e.value * k,
            ci_low: e.ci_low.map(|v| v * k),
            ci_high: e.ci_high.map(|v| v * k),
            ..e.clone()
        };
        ChannelDecomposition {
            unit,
            h_f: scale(&self.h_f),
            ce_f_given_text: scale(&self.ce_f_given_text),
            ce_f_given_audio: scale(&self.ce_f_given_audio),
            mi_f_text: scale(&self.mi_f_text),
            mi_f_audio: scale(&self.mi_f_audio),
            mi_f_audio_given_text: scale(&self.mi_f_audio_given_text),
            ..self.clone()
        }
    }

    /// Lists every defining identity that fails by more than `tol`.
    pub fn violated_identities(&self, tol: f64) -> Vec<String> {
        let mut out = Vec::new();
        let check = |out: &mut Vec<String>, name: &str, lhs: f64, rhs: f64| {
            if !(lhs - rhs).abs().le(&tol) {
                out.push(format!("{name}: {lhs} != {rhs}"));
            }
        };
        check(
            &mut out,
            "I(F;T) = H(F) - CE(F|T)",
            self.mi_f_text.value,
            self.h_f.value - self.ce_f_given_text.value,
        );
        check(
            &mut out,
            "I(F;A) = H(F) - CE(F|A)",
            self.mi_f_audio.value,
            self.h_f.value - self.ce_f_given_audio.value,
        );
        check(
            &mut out,
            "I(F;A|T) = I(F;A) - I(F;T)",
            self.mi_f_audio_given_text.value,
            self.mi_f_audio.value - self.mi_f_text.value,
        );
        if self.h_f.value > 0.0 {
            match self.uc_text {
                Some(uc) => check(&mut out, "uc_text = I(F;T) / H(F)", uc, self.mi_f_text.value / self.h_f.value),
                None => out.push("uc_text missing although H(F) > 0".into()),
            }
            match self.uc_audio {
                Some(uc) => check(&mut out, "uc_audio = I(F;A) / H(F)", uc, self.mi_f_audio.value / self.h_f.value),
                None => out.push("uc_audio missing although H(F) > 0".into()),
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionStatus {
    Determined,
    Underdetermined,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub index: u8,
    pub quantity: String,
    pub status: RegionStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
}

/// Optional estimates that involve a prosody-valued channel. Without them the
/// prosody regions stay underdetermined.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ProsodyEstimates {
    /// `I(T;P)`
    pub text_prosody_mi: Option<f64>,
    /// `I(F;P|T)`
    pub feature_prosody_given_text_mi: Option<f64>,
    /// `I(F;P)`
    pub feature_prosody_mi: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionReport {
    pub unit: Unit,
    pub regions: Vec<Region>,
}

impl RegionReport {
    /// Region by its 1-based legend index.
    pub fn region(&self, index: u8) -> Option<&Region> {
        self.regions.iter().find(|r| r.index == index)
    }

    pub fn value(&self, index: u8) -> Option<f64> {
        self.region(index).and_then(|r| r.value)
    }

    pub fn is_determined(&self, index: u8) -> bool {
        self.region(index)
            .map(|r| r.status == RegionStatus::Determined)
            .unwrap_or(false)
    }
}

impl fmt::Display for RegionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.regions {
            match r.value {
                Some(v) => writeln!(f, "{:>3}  {:<14} {:>9.4} {}", r.index, r.quantity, v, self.unit)?,
                None => writeln!(f, "{:>3}  {:<14} {:>9}", r.index, r.quantity, "--")?,
            }
        }
        Ok(())
    }
}

const REGION_QUANTITIES: [&str; 10] = [
    "I(T;P)",
    "I(F;P|T)",
    "I(F;T)",
    "I(F;A)",
    "I(F;P;T)",
    "H(F|P)",
    "H(F|T)",
    "H(F|A)",
    "I(F;A|T)",
    "I(F;A|T,P)",
];

/// Resolves the ten information-diagram regions from a decomposition.
///
/// Regions 3, 4, 7, 8 and 9 follow from text and audio estimates alone. The
/// prosody regions are filled only from supplied prosody estimates; region 5
/// (the three-way co-information) is never resolved because its sign
/// convention is not fixed here.
pub fn solve_regions(
    decomp: &ChannelDecomposition,
    prosody: Option<&ProsodyEstimates>,
) -> Result<RegionReport> {
    let violated = decomp.violated_identities(IDENTITY_TOLERANCE);
    if !violated.is_empty() {
        return Err(Error::InconsistentDecomposition(violated.join("; ")));
    }
    let h = decomp.h_f.value;
    let i_t = decomp.mi_f_text.value;
    let i_a = decomp.mi_f_audio.value;
    let i_a_given_t = decomp.mi_f_audio_given_text.value;

    let mut values: [Option<f64>; 10] = [None; 10];
    values[2] = Some(i_t);
    values[3] = Some(i_a);
    values[6] = Some(h - i_t);
    values[7] = Some(h - i_a);
    values[8] = Some(i_a_given_t);

    if let Some(p) = prosody {
        values[0] = p.text_prosody_mi;
        if let Some(i_fp_t) = p.feature_prosody_given_text_mi {
            values[1] = Some(i_fp_t);
            values[9] = Some(i_a_given_t - i_fp_t);
        }
        if let Some(i_fp) = p.feature_prosody_mi {
            values[5] = Some(h - i_fp);
        }
    }

    let regions = REGION_QUANTITIES
        .iter()
        .zip(values)
        .enumerate()
        .map(|(i, (q, v))| Region {
            index: (i + 1) as u8,
            quantity: (*q).to_string(),
            status: if v.is_some() {
                RegionStatus::Determined
            } else {
                RegionStatus::Underdetermined
            },
            value: v,
        })
        .collect();
    Ok(RegionReport {
        unit: decomp.unit,
        regions,
    })
}
