use std::path::PathBuf;

use anyhow::{anyhow, Result};
use clap::Args;
use disbench_core::compose::{caption_cooccurrence_filter, knn_novelty_filter, DEFAULT_KNN_THRESHOLD};
use serde::Serialize;
use serde_json::json;

use super::check_positive;
use crate::inputs;
use crate::run::RunContext;
use crate::usage;

#[derive(Debug, Args, Serialize)]
pub struct CaptionArgs {
    /// TSV with `attribute` and `object` columns.
    #[arg(long)]
    pub pairs: PathBuf,
    /// One caption per line, or a `.tsv` file with a `caption` column.
    #[arg(long)]
    pub captions: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run_captions(args: &CaptionArgs, ctx: &mut RunContext) -> Result<()> {
    let pairs_tsv = inputs::tsv(ctx, &args.pairs)?;
    let (a, o) = (pairs_tsv.column("attribute")?, pairs_tsv.column("object")?);
    let mut pairs = Vec::with_capacity(pairs_tsv.rows.len());
    for row in &pairs_tsv.rows {
        match (row.get(a), row.get(o)) {
            (Some(a), Some(o)) => pairs.push((a.clone(), o.clone())),
            _ => return Err(anyhow!("{}: short row {row:?}", args.pairs.display())),
        }
    }
    let captions: Vec<String> = if args.captions.extension().is_some_and(|e| e == "tsv") {
        let t = inputs::tsv(ctx, &args.captions)?;
        let c = t.column("caption")?;
        t.rows.iter().map(|r| r.get(c).cloned().unwrap_or_default()).collect()
    } else {
        inputs::lines(ctx, &args.captions)?
    };
    let report = caption_cooccurrence_filter(&pairs, &captions)?;
    let pair = |(a, o): &(String, String)| json!({ "attribute": a, "object": o });
    let out = json!({
        "captions": report.captions,
        "pairs": pairs.len(),
        "seen": report.seen.iter().map(pair).collect::<Vec<_>>(),
        "kept": report.kept.iter().map(pair).collect::<Vec<_>>(),
    });
    ctx.emit_json(args.out.as_deref(), &out)
}

#[derive(Debug, Args, Serialize)]
pub struct KnnArgs {
    #[arg(long)]
    pub candidates: PathBuf,
    #[arg(long)]
    pub references: PathBuf,
    /// Neighbors reported per candidate.
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    /// Candidates whose nearest reference reaches this cosine similarity are dropped.
    #[arg(long, default_value_t = DEFAULT_KNN_THRESHOLD)]
    pub threshold: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run_knn(args: &KnnArgs, ctx: &mut RunContext) -> Result<()> {
    check_positive("k", args.k)?;
    if !(-1.0..=1.0).contains(&args.threshold) {
        return Err(usage(format!("--threshold must lie in [-1, 1], got {}", args.threshold)));
    }
    let candidates = inputs::embeddings(ctx, &args.candidates)?;
    let references = inputs::embeddings(ctx, &args.references)?;
    let report = knn_novelty_filter(&candidates, &references, args.k, args.threshold)?;
    let rows: Vec<_> = candidates
        .ids()
        .iter()
        .zip(report.keep.iter().zip(&report.neighbors))
        .map(|(id, (keep, nn))| json!({ "id": id, "keep": keep, "neighbors": nn }))
        .collect();
    let out = json!({
        "k": report.k,
        "threshold": report.threshold,
        "kept": report.kept(),
        "candidates": rows,
    });
    ctx.emit_json(args.out.as_deref(), &out)
}
