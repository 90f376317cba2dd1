//! Command-line surface.
//!
//! Exit codes: 0 success, 2 input or schema error, 3 inconsistency between
//! inputs (or between an estimate and its oracle), 4 computation failure.

mod commands;

pub use commands::{
    dataset, diagram, estimate, synth_validate, train, Check, CheckStatus, DatasetArgs, DiagramArgs,
    DiagramReport, EstimateArgs, EstimateReport, SynthArgs, SynthReport, TrainArgs, TrainReport,
};

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::units::Unit;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INCONSISTENT: i32 = 3;
pub const EXIT_COMPUTATION: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "chanmi", version, about = "Channel-wise information estimates for discrete features")]
pub struct Cli {
    /// Unit for every reported quantity.
    #[arg(long, global = true, default_value = "bits")]
    pub unit: Unit,

    /// Worker threads for sweeps and bootstrap; defaults to all cores.
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decompose a feature's information over text and audio prediction logs.
    Estimate(EstimateArgs),
    /// Check the estimators against a synthetic joint distribution.
    SynthValidate(SynthArgs),
    /// Build a balanced questionhood corpus.
    Dataset(DatasetArgs),
    /// Run a hyperparameter sweep and export the selected run's predictions.
    Train(TrainArgs),
    /// Draw a proportional-area diagram from a decomposition.
    Diagram(DiagramArgs),
}

/// Exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::GoldMismatch(_)
        | Error::LabelSpaceMismatch(_)
        | Error::InconsistentDecomposition(_)
        | Error::OrderingViolation(_) => EXIT_INCONSISTENT,
        Error::Diverged | Error::NoInformation => EXIT_COMPUTATION,
        _ => EXIT_INPUT,
    }
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

/// Runs `f` on a dedicated pool when a worker count is given.
pub(crate) fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(f()),
        Some(0) => Err(Error::InvalidInput("workers must be at least 1".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Executes a parsed command line, printing the human-readable table to
/// `out`. Returns the process exit code.
pub fn run(cli: Cli, out: &mut dyn Write) -> i32 {
    let result = match cli.command {
        Command::Estimate(a) => estimate(&a, cli.unit, cli.workers).map(|r| (r.table(), r.exit_code())),
        Command::SynthValidate(a) => synth_validate(&a, cli.unit).map(|r| (r.table(), r.exit_code())),
        Command::Dataset(a) => dataset(&a).map(|r| (commands::dataset_table(&r), EXIT_OK)),
        Command::Train(a) => train(&a, cli.unit, cli.workers).map(|r| (r.table(), EXIT_OK)),
        Command::Diagram(a) => diagram(&a).map(|r| (r.table(), EXIT_OK)),
    };
    match result {
        Ok((table, code)) => {
            let _ = out.write_all(table.as_bytes());
            code
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(cli, &mut std::io::stdout().lock()),
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                EXIT_INPUT
            } else {
                EXIT_OK
            }
        }
    }
}
