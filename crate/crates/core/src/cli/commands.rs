use std::fmt::Write as _;
use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

use clap::Args;
use serde::{Deserialize, Serialize};

use super::{with_workers, write_json, EXIT_INCONSISTENT, EXIT_OK};
use crate::classifier::{run_sweep, LabeledDataset, LogMeta, RunResult, RunStatus, Selection, SweepConfig, SweepMode};
use crate::diagram::{layout, render_svg, DiagramSpec, LayoutOptions, DEFAULT_CANVAS};
use crate::error::{Error, Result};
use crate::estimation::{
    bootstrap_decomposition, clamped_count, cross_entropy_of_log, decompose_split, attach_intervals,
    plugin_entropy, split_dist, BootstrapConfig, Channel, DecompositionIntervals, PredictionLog,
    ResampleFrame, Split,
};
use crate::info::{ChannelDecomposition, InfoEstimate, LabelSpace, ProsodyEstimates, RegionReport};
use crate::questions::{
    curate, read_records_path, write_curated, Curated, CurationConfig, DEFAULT_BINS, DEFAULT_MIN_DURATION_S,
};
use crate::synthetic::{
    exact_conditional_entropy, exact_mi, prediction_log, sample, Predictor, SyntheticSpec,
};
use crate::units::Unit;

/// Sample size below which oracle checks are advisory only.
pub const MIN_VALIDATION_N: usize = 1000;

fn parse_fractions(s: &str) -> std::result::Result<[f64; 3], String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<std::result::Result<_, _>>()?;
    <[f64; 3]>::try_from(parts).map_err(|v| format!("expected three fractions, got {}", v.len()))
}

fn fmt4(v: f64) -> String {
    format!("{v:.4}")
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EstimateArgs {
    #[arg(long)]
    pub text_log: PathBuf,
    #[arg(long)]
    pub audio_log: PathBuf,
    /// Split evaluated; H(F) is computed from its gold labels.
    #[arg(long, default_value = "test")]
    pub split: Split,
    /// Bootstrap replicates; 0 disables intervals.
    #[arg(long, default_value_t = 0)]
    pub bootstrap: usize,
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    #[arg(long, env = "CHANMI_SEED", default_value_t = 0)]
    pub seed: u64,
    /// JSON file with optional prosody estimates in bits.
    #[arg(long)]
    pub prosody: Option<PathBuf>,
    /// Where to write the JSON report.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EstimateConfig {
    #[serde(flatten)]
    pub args: EstimateArgs,
    pub unit: Unit,
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ClampCounts {
    pub text: usize,
    pub audio: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct EstimateReport {
    pub config: EstimateConfig,
    pub h_f_split: Split,
    pub decomposition: ChannelDecomposition,
    pub regions: RegionReport,
    /// Bootstrap intervals in bits.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub intervals: Option<DecompositionIntervals>,
    pub clamped: ClampCounts,
}

impl EstimateReport {
    pub fn exit_code(&self) -> i32 {
        EXIT_OK
    }

    pub fn table(&self) -> String {
        let d = &self.decomposition;
        let mut s = String::new();
        writeln!(
            s,
            "feature {}  split {}  unit {}  n {}",
            d.feature_name, self.h_f_split, d.unit, d.h_f.n
        )
        .unwrap();
        writeln!(s, "{:<10} {:>9} {:>9} {:>9}  notes", "quantity", "value", "ci_low", "ci_high").unwrap();
        let rows: [(&str, &InfoEstimate); 6] = [
            ("H(F)", &d.h_f),
            ("CE(F|T)", &d.ce_f_given_text),
            ("CE(F|A)", &d.ce_f_given_audio),
            ("I(F;T)", &d.mi_f_text),
            ("I(F;A)", &d.mi_f_audio),
            ("I(F;A|T)", &d.mi_f_audio_given_text),
        ];
        for (name, e) in rows {
            let (lo, hi) = e.ci().map_or(("--".into(), "--".into()), |(l, h)| (fmt4(l), fmt4(h)));
            writeln!(s, "{name:<10} {:>9} {lo:>9} {hi:>9}  {}", fmt4(e.value), e.notes.join("; ")).unwrap();
        }
        for (name, uc) in [("uc_text", d.uc_text), ("uc_audio", d.uc_audio)] {
            writeln!(s, "{name:<10} {:>9}", uc.map_or("--".into(), fmt4)).unwrap();
        }
        if self.clamped.text + self.clamped.audio > 0 {
            writeln!(
                s,
                "clamped records: text {}, audio {}",
                self.clamped.text, self.clamped.audio
            )
            .unwrap();
        }
        writeln!(s, "regions").unwrap();
        write!(s, "{}", self.regions).unwrap();
        s
    }
}

pub fn estimate(args: &EstimateArgs, unit: Unit, workers: Option<usize>) -> Result<EstimateReport> {
    let text = PredictionLog::from_path(&args.text_log)?;
    let audio = PredictionLog::from_path(&args.audio_log)?;
    let mut decomp = decompose_split(&text, &audio, args.split)?;

    let intervals = if args.bootstrap > 0 {
        let cfg = BootstrapConfig {
            workers,
            ..BootstrapConfig::new(args.bootstrap, args.seed, args.level)
        };
        let frame = ResampleFrame::paired(&text, &audio, args.split)?;
        let ci = bootstrap_decomposition(&frame, &cfg)?;
        attach_intervals(&mut decomp, &ci);
        Some(ci)
    } else {
        None
    };

    let prosody: Option<ProsodyEstimates> = match &args.prosody {
        Some(p) => Some(serde_json::from_reader(std::io::BufReader::new(File::open(p)?))?),
        None => None,
    };
    let prosody = prosody.map(|p| {
        let k = unit.per_bit();
        ProsodyEstimates {
            text_prosody_mi: p.text_prosody_mi.map(|v| v * k),
            feature_prosody_given_text_mi: p.feature_prosody_given_text_mi.map(|v| v * k),
            feature_prosody_mi: p.feature_prosody_mi.map(|v| v * k),
        }
    });
    let decomposition = decomp.in_unit(unit);
    let regions = crate::info::solve_regions(&decomposition, prosody.as_ref())?;

    let report = EstimateReport {
        config: EstimateConfig {
            args: args.clone(),
            unit,
            workers,
        },
        h_f_split: args.split,
        decomposition,
        regions,
        intervals,
        clamped: ClampCounts {
            text: clamped_count(&text, args.split),
            audio: clamped_count(&audio, args.split),
        },
    };
    if let Some(out) = &args.out {
        write_json(out, &report)?;
    }
    Ok(report)
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SynthArgs {
    /// Joint-distribution spec (JSON).
    pub spec: PathBuf,
    #[arg(long, default_value_t = 100_000)]
    pub n: usize,
    #[arg(long, env = "CHANMI_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Absolute tolerance in bits.
    #[arg(long, default_value_t = 0.01)]
    pub tolerance: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    /// Outside tolerance, but the sample is too small to judge.
    Advisory,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub estimate: f64,
    pub exact: f64,
    pub tolerance: f64,
    pub status: CheckStatus,
}

#[derive(Debug, Clone, Serialize)]
pub struct SynthConfig {
    #[serde(flatten)]
    pub args: SynthArgs,
    pub unit: Unit,
}

#[derive(Debug, Clone, Serialize)]
pub struct SynthReport {
    pub config: SynthConfig,
    pub spec_name: String,
    pub checks: Vec<Check>,
    pub advisories: Vec<String>,
}

impl SynthReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != CheckStatus::Fail)
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            EXIT_OK
        } else {
            EXIT_INCONSISTENT
        }
    }

    pub fn table(&self) -> String {
        let mut s = String::new();
        writeln!(
            s,
            "spec {}  n {}  seed {}  unit {}",
            self.spec_name, self.config.args.n, self.config.args.seed, self.config.unit
        )
        .unwrap();
        writeln!(s, "{:<10} {:>9} {:>9} {:>9}  status", "check", "estimate", "exact", "tol").unwrap();
        for c in &self.checks {
            writeln!(
                s,
                "{:<10} {:>9} {:>9} {:>9}  {:?}",
                c.name,
                fmt4(c.estimate),
                fmt4(c.exact),
                fmt4(c.tolerance),
                c.status
            )
            .unwrap();
        }
        for a in &self.advisories {
            writeln!(s, "advisory: {a}").unwrap();
        }
        writeln!(s, "{}", if self.passed() { "PASS" } else { "FAIL" }).unwrap();
        s
    }
}

/// Samples from a spec, estimates with plug-in entropy and Bayes-posterior
/// cross-entropy, and compares against the exact values.
pub fn synth_validate(args: &SynthArgs, unit: Unit) -> Result<SynthReport> {
    if !(args.tolerance > 0.0 && args.tolerance.is_finite()) {
        return Err(Error::InvalidInput(format!("tolerance must be > 0, got {}", args.tolerance)));
    }
    if args.n == 0 {
        return Err(Error::InvalidInput("n must be at least 1".into()));
    }
    let spec = SyntheticSpec::from_path(&args.spec)?;
    let pairs = sample(&spec, args.n, args.seed)?;
    let log = prediction_log(&spec, &pairs, Predictor::Bayes, Channel::Other, Split::Test)?;
    let h = plugin_entropy(&split_dist(&log, Split::Test)?).value;
    let ce = cross_entropy_of_log(&log, Split::Test)?.value;

    let small = args.n < MIN_VALIDATION_N;
    let k = unit.per_bit();
    let checks = [
        ("H(F)", h, spec.feature_entropy()),
        ("CE(F|C)", ce, exact_conditional_entropy(&spec)),
        ("I(F;C)", h - ce, exact_mi(&spec)),
    ]
    .into_iter()
    .map(|(name, est, exact)| {
        let status = if (est - exact).abs() <= args.tolerance {
            CheckStatus::Pass
        } else if small {
            CheckStatus::Advisory
        } else {
            CheckStatus::Fail
        };
        Check {
            name: name.into(),
            estimate: est * k,
            exact: exact * k,
            tolerance: args.tolerance * k,
            status,
        }
    })
    .collect();
    let advisories = if small {
        vec![format!(
            "insufficient n: {} < {MIN_VALIDATION_N}; deviations are not treated as failures",
            args.n
        )]
    } else {
        Vec::new()
    };
    let report = SynthReport {
        config: SynthConfig {
            args: args.clone(),
            unit,
        },
        spec_name: spec.name().to_string(),
        checks,
        advisories,
    };
    if let Some(out) = &args.out {
        write_json(out, &report)?;
    }
    Ok(report)
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DatasetArgs {
    /// Utterance records, one JSON object per line.
    pub input: PathBuf,
    /// Output directory for the splits and the report.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = DEFAULT_MIN_DURATION_S)]
    pub min_duration: f64,
    #[arg(long, default_value_t = DEFAULT_BINS)]
    pub bins: usize,
    #[arg(long, default_value = "0.72,0.08,0.20", value_parser = parse_fractions)]
    pub fractions: [f64; 3],
    #[arg(long, env = "CHANMI_SEED", default_value_t = 0)]
    pub seed: u64,
}

impl DatasetArgs {
    pub fn config(&self) -> CurationConfig {
        CurationConfig {
            min_duration_s: self.min_duration,
            bins: self.bins,
            fractions: self.fractions,
            seed: self.seed,
        }
    }
}

pub fn dataset(args: &DatasetArgs) -> Result<Curated> {
    let records = read_records_path(&args.input)?;
    let curated = curate(records, &args.config())?;
    if !curated.report.is_conserved() {
        return Err(Error::InconsistentDecomposition("curation report does not conserve records".into()));
    }
    write_curated(&curated, &args.out)?;
    Ok(curated)
}

pub(crate) fn dataset_table(c: &Curated) -> String {
    let r = &c.report;
    let mut s = String::new();
    writeln!(s, "{:<18} {:>9} {:>12}", "", "question", "non_question").unwrap();
    let mut row = |name: &str, q: usize, n: usize| writeln!(s, "{name:<18} {q:>9} {n:>12}").unwrap();
    row("input", r.input.question, r.input.non_question);
    row("empty after strip", r.dropped.empty_after_strip.question, r.dropped.empty_after_strip.non_question);
    row("too short", r.dropped.too_short.question, r.dropped.too_short.non_question);
    row("downsampled", r.dropped.downsampled.question, r.dropped.downsampled.non_question);
    row("train", r.final_counts.train.question, r.final_counts.train.non_question);
    row("dev", r.final_counts.dev.question, r.final_counts.dev.non_question);
    row("test", r.final_counts.test.question, r.final_counts.test.non_question);
    let shortfall = r.total_shortfall();
    if shortfall > 0 {
        writeln!(s, "downsampling shortfall: {shortfall}").unwrap();
    }
    s
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TrainArgs {
    /// Tabular dataset, one JSON object per line.
    pub dataset: PathBuf,
    /// Sweep configuration (TOML); defaults to a 20-run random search.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Overrides the sweep seed.
    #[arg(long, env = "CHANMI_SEED")]
    pub seed: Option<u64>,
    /// Overrides the number of random-search runs.
    #[arg(long)]
    pub runs: Option<usize>,
    /// Cross-validate each run with this many folds.
    #[arg(long)]
    pub folds: Option<usize>,
    /// Comma-separated class names; defaults to the label indices.
    #[arg(long)]
    pub labels: Option<String>,
    #[arg(long, default_value = "task")]
    pub task: String,
    #[arg(long, default_value = "other")]
    pub channel: Channel,
    /// Output directory for `runs.json`, `predictions.jsonl` and `model.json`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrainConfigEcho {
    pub dataset: PathBuf,
    pub sweep: SweepConfig,
    pub task: String,
    pub channel: Channel,
    pub unit: Unit,
    pub workers: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct TrainReport {
    pub config: TrainConfigEcho,
    pub mode: SweepMode,
    pub selection: Selection,
    pub best: usize,
    /// Losses already converted to the report unit.
    pub runs: Vec<RunResult>,
    pub log: PredictionLog,
}

#[derive(Serialize)]
struct TrainJson<'a> {
    config: &'a TrainConfigEcho,
    mode: SweepMode,
    selection: Selection,
    best: usize,
    runs: &'a [RunResult],
}

impl TrainReport {
    pub fn best_run(&self) -> &RunResult {
        &self.runs[self.best]
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(TrainJson {
            config: &self.config,
            mode: self.mode,
            selection: self.selection,
            best: self.best,
            runs: &self.runs,
        })
        .expect("report serializes")
    }

    pub fn table(&self) -> String {
        let mut s = String::new();
        writeln!(
            s,
            "{} runs  selection {:?}  unit {}",
            self.runs.len(),
            self.selection,
            self.config.unit
        )
        .unwrap();
        writeln!(
            s,
            "{:>4} {:>10} {:>6} {:>6} {:>6} {:>9} {:>9} {:>9}",
            "run", "lr", "epochs", "batch", "wd", "dev", "test", "cv"
        )
        .unwrap();
        let opt = |v: Option<f64>| v.map_or("--".into(), fmt4);
        for r in &self.runs {
            let mark = if r.index == self.best { "*" } else { " " };
            let c = &r.config;
            writeln!(
                s,
                "{:>3}{mark} {:>10.3e} {:>6} {:>6} {:>6} {:>9} {:>9} {:>9}{}",
                r.index,
                c.learning_rate,
                c.epochs,
                c.batch_size,
                c.weight_decay,
                opt(r.dev_loss),
                opt(r.test_loss),
                opt(r.cv_loss),
                if r.status == RunStatus::Diverged { "  diverged" } else { "" }
            )
            .unwrap();
        }
        s
    }
}

pub fn train(args: &TrainArgs, unit: Unit, workers: Option<usize>) -> Result<TrainReport> {
    let mut sweep = match &args.config {
        Some(p) => SweepConfig::from_path(p)?,
        None => SweepConfig::default(),
    };
    if let Some(seed) = args.seed {
        sweep.seed = seed;
    }
    if args.runs.is_some() {
        sweep.runs = args.runs;
    }
    if args.folds.is_some() {
        sweep.folds = args.folds;
    }
    let labels = args
        .labels
        .as_deref()
        .map(|l| LabelSpace::new(l.split(',').map(str::trim)))
        .transpose()?;
    let data = LabeledDataset::from_path(&args.dataset, labels)?;
    let meta = LogMeta {
        task: args.task.clone(),
        channel: args.channel,
        model: "log-linear".into(),
    };
    let outcome = with_workers(workers, || run_sweep(&data, &sweep, &meta))??;

    let k = unit.per_bit();
    let runs = outcome
        .runs
        .iter()
        .map(|r| RunResult {
            dev_loss: r.dev_loss.map(|v| v * k),
            test_loss: r.test_loss.map(|v| v * k),
            cv_loss: r.cv_loss.map(|v| v * k),
            ..r.clone()
        })
        .collect();
    let report = TrainReport {
        config: TrainConfigEcho {
            dataset: args.dataset.clone(),
            sweep,
            task: args.task.clone(),
            channel: args.channel,
            unit,
            workers,
        },
        mode: outcome.mode,
        selection: outcome.selection,
        best: outcome.best,
        runs,
        log: outcome.log,
    };
    if let Some(dir) = &args.out {
        std::fs::create_dir_all(dir)?;
        write_json(&dir.join("runs.json"), &report.to_json())?;
        report.log.write_jsonl(BufWriter::new(File::create(dir.join("predictions.jsonl"))?))?;
        if let Some(model) = &outcome.model {
            write_json(&dir.join("model.json"), model)?;
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DiagramArgs {
    /// A decomposition, or an `estimate` report containing one (JSON).
    pub input: PathBuf,
    /// SVG file to write.
    #[arg(long)]
    pub out: PathBuf,
    /// 0 is concentric; 1 pushes inner disks to the edge.
    #[arg(long, default_value_t = 0.0)]
    pub offset: f64,
    #[arg(long, default_value_t = DEFAULT_CANVAS)]
    pub canvas: f64,
    /// List the underdetermined regions under the figure.
    #[arg(long)]
    pub legend: bool,
    /// Also write the laid-out geometry as JSON.
    #[arg(long)]
    pub sidecar: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DiagramReport {
    pub config: DiagramArgs,
    pub spec: DiagramSpec,
}

impl DiagramReport {
    pub fn table(&self) -> String {
        let mut s = String::new();
        for c in &self.spec.circles {
            writeln!(s, "{:<8} {:>9} bits  r {:>9}", c.label, fmt4(c.bits), fmt4(c.r)).unwrap();
        }
        writeln!(s, "wrote {}", self.config.out.display()).unwrap();
        s
    }
}

pub fn diagram(args: &DiagramArgs) -> Result<DiagramReport> {
    let mut value: serde_json::Value = serde_json::from_reader(std::io::BufReader::new(File::open(&args.input)?))?;
    if let Some(inner) = value.get_mut("decomposition") {
        value = inner.take();
    }
    let decomp: ChannelDecomposition = serde_json::from_value(value)?;
    let mut opts = LayoutOptions {
        canvas: args.canvas,
        offset: args.offset,
        ..LayoutOptions::default()
    };
    if args.legend {
        opts = opts.with_region_legend(&crate::info::solve_regions(&decomp, None)?);
    }
    let mut spec = layout(&decomp, &opts)?;
    spec.description = serde_json::to_string(args)?;
    if let Some(dir) = args.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(&args.out, render_svg(&spec))?;
    if let Some(side) = &args.sidecar {
        write_json(side, &spec)?;
    }
    Ok(DiagramReport {
        config: args.clone(),
        spec,
    })
}
