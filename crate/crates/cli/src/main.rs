#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{CommandFactory, Parser, Subcommand};
use serde::Serialize;

mod commands;
mod config;
mod inputs;
mod run;

use commands::{analysis, compose, filters, metrics, synth};

#[derive(Debug, Parser, Serialize)]
#[command(name = "disbench", version, about = "Disentanglement and compositional generalization benchmarks for embeddings")]
pub struct Cli {
    /// JSON file of option values; command-line flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true, env = "DISBENCH_THREADS")]
    pub threads: Option<usize>,

    /// Where to write the run record (defaults to `run.json` next to the
    /// main output).
    #[arg(long, global = true)]
    pub run_json: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(untagged)]
pub enum Command {
    /// Generate a synthetic dataset.
    Synth(synth::SynthArgs),
    /// DCI, Z-diff and explicitness of a dataset.
    Metrics(metrics::MetricsArgs),
    /// Soft rank of an embedding matrix.
    Softrank(metrics::SoftRankArgs),
    /// Zero-shot classification against template-averaged text embeddings.
    Zeroshot(compose::ZeroShotArgs),
    /// Text or image±text retrieval recall.
    Retrieve(compose::RetrieveArgs),
    /// Most important dimensions per factor.
    Topdims(metrics::TopDimsArgs),
    /// Overlap between per-factor top-dimension lists.
    Commondims(metrics::CommonDimsArgs),
    /// Fewest swapped dimensions that flip the caption match.
    Switchdims(compose::SwitchArgs),
    /// Linear recovery of attribute and object parts from combined embeddings.
    Decompose(compose::DecomposeArgs),
    /// Drop attribute-object pairs that co-occur in captions.
    FilterCaptions(filters::CaptionArgs),
    /// Drop candidates too similar to a reference set.
    FilterKnn(filters::KnnArgs),
    /// Correlation of metrics with an accuracy across models.
    Correlate(analysis::CorrelateArgs),
    /// Sorted CSV and JSON table of model records.
    Report(analysis::ReportArgs),
    /// SVG scatter plot of two record keys.
    Scatter(analysis::ScatterArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Synth(_) => "synth",
            Command::Metrics(_) => "metrics",
            Command::Softrank(_) => "softrank",
            Command::Zeroshot(_) => "zeroshot",
            Command::Retrieve(_) => "retrieve",
            Command::Topdims(_) => "topdims",
            Command::Commondims(_) => "commondims",
            Command::Switchdims(_) => "switchdims",
            Command::Decompose(_) => "decompose",
            Command::FilterCaptions(_) => "filter-captions",
            Command::FilterKnn(_) => "filter-knn",
            Command::Correlate(_) => "correlate",
            Command::Report(_) => "report",
            Command::Scatter(_) => "scatter",
        }
    }
}

/// A problem with how the tool was invoked, as opposed to with its data.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn parse(argv: Vec<OsString>) -> Result<Cli, ExitCode> {
    let report = |e: clap::Error| {
        let _ = e.print();
        if e.use_stderr() {
            ExitCode::from(1)
        } else {
            ExitCode::SUCCESS
        }
    };
    let config = config::lenient(&Cli::command())
        .try_get_matches_from(&argv)
        .ok()
        .and_then(|m| m.get_one::<PathBuf>("config").cloned());
    let Some(path) = config else {
        return Cli::try_parse_from(argv).map_err(report);
    };
    let merged = match config::merge(&Cli::command(), argv, &path) {
        Ok(argv) => argv,
        Err(e) => {
            eprintln!("error: {e:#}");
            return Err(ExitCode::from(if e.is::<UsageError>() { 1 } else { 2 }));
        }
    };
    Cli::try_parse_from(merged).map_err(report)
}

fn main() -> ExitCode {
    let cli = match parse(std::env::args_os().collect()) {
        Ok(cli) => cli,
        Err(code) => return code,
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(1);
        }
        // fails only if a pool already exists
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match run::execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.is::<UsageError>() {
                eprintln!("run `disbench {} --help` for usage", cli.command.name());
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
