use std::path::PathBuf;

use anyhow::Result;
use clap::Args;
use disbench_core::analysis::{correlate, render_scatter, render_table, REPORT_KEYS};
use serde::Serialize;

use crate::inputs;
use crate::run::RunContext;

fn report_keys() -> Vec<String> {
    REPORT_KEYS.iter().map(|k| k.to_string()).collect()
}

#[derive(Debug, Args, Serialize)]
pub struct CorrelateArgs {
    /// JSON array of model records.
    #[arg(long)]
    pub records: PathBuf,
    /// Metric keys to correlate (default: every report key).
    #[arg(long, value_delimiter = ',')]
    pub metrics: Vec<String>,
    /// Accuracy key, e.g. `cood_top1`.
    #[arg(long)]
    pub target: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run_correlate(args: &CorrelateArgs, ctx: &mut RunContext) -> Result<()> {
    let records = inputs::records(ctx, &args.records)?;
    let metrics = if args.metrics.is_empty() { report_keys() } else { args.metrics.clone() };
    let rows = correlate(&records, &metrics, &args.target)?;
    ctx.emit_json(args.out.as_deref(), &rows)
}

#[derive(Debug, Args, Serialize)]
pub struct ReportArgs {
    #[arg(long)]
    pub records: PathBuf,
    /// Columns after model and source (default: every report key).
    #[arg(long, value_delimiter = ',')]
    pub columns: Vec<String>,
    /// Key to sort by, descending.
    #[arg(long)]
    pub sort_by: String,
    /// CSV path; a JSON twin is written next to it.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run_report(args: &ReportArgs, ctx: &mut RunContext) -> Result<()> {
    let records = inputs::records(ctx, &args.records)?;
    let columns = if args.columns.is_empty() { report_keys() } else { args.columns.clone() };
    let table = render_table(&records, &columns, &args.sort_by)?;
    ctx.write_bytes(&args.out, table.csv.as_bytes())?;
    ctx.write_bytes(&args.out.with_extension("json"), table.json.as_bytes())
}

#[derive(Debug, Args, Serialize)]
pub struct ScatterArgs {
    #[arg(long)]
    pub records: PathBuf,
    #[arg(long)]
    pub x: String,
    #[arg(long)]
    pub y: String,
    /// SVG output path.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run_scatter(args: &ScatterArgs, ctx: &mut RunContext) -> Result<()> {
    let records = inputs::records(ctx, &args.records)?;
    let svg = render_scatter(&records, &args.x, &args.y)?;
    ctx.write_bytes(&args.out, svg.as_bytes())
}
