use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::Split;
use crate::info::LabelSpace;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct FeatureVector(Vec<f64>);

impl FeatureVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("feature {i} is not finite")));
        }
        Ok(FeatureVector(values))
    }

    /// Indicator vector of length `dim` with a 1 at `index`.
    pub fn one_hot(dim: usize, index: usize) -> Self {
        let mut v = vec![0.0; dim];
        v[index] = 1.0;
        FeatureVector(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

impl<'de> Deserialize<'de> for FeatureVector {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        FeatureVector::new(Vec::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

/// One labelled example. Serializes to the tabular dataset line format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Row {
    pub id: String,
    pub x: FeatureVector,
    #[serde(rename = "y")]
    pub label: usize,
    pub split: Split,
}

/// Feature vectors with gold labels and split assignments.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    label_space: LabelSpace,
    dim: usize,
    rows: Vec<Row>,
}

impl LabeledDataset {
    pub fn new(label_space: LabelSpace, rows: Vec<Row>) -> Result<Self> {
        let dim = rows.first().map(|r| r.x.dim()).ok_or_else(|| Error::Empty("dataset has no rows".into()))?;
        let mut seen = HashSet::new();
        for row in &rows {
            Self::check_row(row, dim, &label_space, &mut seen)?;
        }
        Ok(LabeledDataset {
            label_space,
            dim,
            rows,
        })
    }

    fn check_row<'a>(
        row: &'a Row,
        dim: usize,
        space: &LabelSpace,
        seen: &mut HashSet<&'a str>,
    ) -> Result<()> {
        if row.x.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: row.x.dim(),
            });
        }
        if row.label >= space.len() {
            return Err(Error::InvalidInput(format!(
                "row {:?}: label {} out of range for {} labels",
                row.id,
                row.label,
                space.len()
            )));
        }
        if !seen.insert(row.id.as_str()) {
            return Err(Error::InvalidInput(format!("duplicate id {:?}", row.id)));
        }
        Ok(())
    }

    /// Builds a dataset whose features are one-hot encodings of discrete
    /// channel symbols. Each item is `(id, symbol, label, split)`.
    pub fn one_hot<I>(label_space: LabelSpace, symbols: usize, items: I) -> Result<Self>
    where
        I: IntoIterator<Item = (String, usize, usize, Split)>,
    {
        let rows = items
            .into_iter()
            .map(|(id, c, label, split)| {
                if c >= symbols {
                    return Err(Error::InvalidInput(format!(
                        "symbol {c} out of range for {symbols} symbols"
                    )));
                }
                Ok(Row {
                    id,
                    x: FeatureVector::one_hot(symbols, c),
                    label,
                    split,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(label_space, rows)
    }

    /// Reads the JSONL tabular format. Without `labels`, classes are named by
    /// index up to the largest `y` seen.
    pub fn read_jsonl<R: BufRead>(reader: R, labels: Option<LabelSpace>) -> Result<Self> {
        let mut rows: Vec<Row> = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let row: Row = serde_json::from_str(&line).map_err(|e| Error::Schema {
                line: i + 1,
                message: e.to_string(),
            })?;
            if let Some(first) = rows.first() {
                if first.x.dim() != row.x.dim() {
                    return Err(Error::Schema {
                        line: i + 1,
                        message: format!("x has {} values, expected {}", row.x.dim(), first.x.dim()),
                    });
                }
            }
            rows.push(row);
        }
        if rows.is_empty() {
            return Err(Error::Empty("dataset has no rows".into()));
        }
        let space = match labels {
            Some(s) => s,
            None => LabelSpace::numbered(rows.iter().map(|r| r.label).max().unwrap_or(0) + 1)?,
        };
        Self::new(space, rows)
    }

    pub fn from_path(path: impl AsRef<Path>, labels: Option<LabelSpace>) -> Result<Self> {
        Self::read_jsonl(BufReader::new(File::open(path)?), labels)
    }

    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<()> {
        for row in &self.rows {
            serde_json::to_writer(&mut w, row)?;
            w.write_all(b"\n")?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn label_space(&self) -> &LabelSpace {
        &self.label_space
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn rows_in(&self, split: Split) -> impl Iterator<Item = &Row> {
        self.rows.iter().filter(move |r| r.split == split)
    }

    /// Copy of the dataset with every row's split replaced by `assign`.
    pub(crate) fn reassigned(&self, assign: impl Fn(usize) -> Option<Split>) -> Self {
        let rows = self
            .rows
            .iter()
            .enumerate()
            .filter_map(|(i, r)| {
                assign(i).map(|split| Row {
                    split,
                    ..r.clone()
                })
            })
            .collect();
        LabeledDataset {
            label_space: self.label_space.clone(),
            dim: self.dim,
            rows,
        }
    }
}
