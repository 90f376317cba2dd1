//! Estimates how much information about a discrete feature (sarcasm,
//! emotion, questionhood) each communication channel carries.
//!
//! `H(F)` comes from plug-in counts of the gold labels. A classifier's test
//! cross-entropy upper-bounds `H(F|C)`, so `H(F) - CE` is a lower bound on
//! `I(F;C)`. Estimating the text channel and the audio channel separately,
//! with audio assumed to contain everything text does, gives
//! `I(F;A|T) = I(F;A) - I(F;T)`: what prosody adds beyond the words.
//!
//! The runnable examples show one capability each:
//!
//! - `estimate_channels`: decompose text and audio prediction logs
//! - `bootstrap_intervals`: percentile intervals for every quantity
//! - `region_report`: resolve the ten information-diagram regions
//! - `synthetic_oracle`: compare estimates with exact values on known joints
//! - `train_sweep`: sweep a log-linear classifier and export its predictions
//! - `kfold_cv`: cross-validated losses for small corpora
//! - `curate_questions`: build a balanced questionhood corpus
//! - `info_diagram`: render a proportional-area diagram

pub mod classifier;
pub mod cli;
pub mod diagram;
pub mod error;
pub mod estimation;
pub mod info;
pub mod questions;
pub mod synthetic;
pub mod units;

pub use error::{Error, Result};
pub use estimation::{decompose, decompose_split, PredictionLog, Split};
pub use info::{ChannelDecomposition, InfoEstimate, LabelSpace, ProbVector};
pub use units::Unit;
