use std::path::PathBuf;

use anyhow::{anyhow, Result};
use clap::{Args, ValueEnum};
use disbench_core::compose::{common_dimensions, top_dimensions, ImportanceSource};
use disbench_core::metrics::{
    dci_scores, explicitness, importance_matrix, soft_rank, zdiff_score, MetricReport, MetricsConfig,
    DEFAULT_SOFT_RANK_THRESHOLD,
};
use serde::{Deserialize, Serialize};

use super::{check_fraction, check_positive, factor_indices};
use crate::inputs;
use crate::run::RunContext;

#[derive(Debug, Args, Serialize)]
pub struct MetricsArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Share of ids used to train the DCI probes.
    #[arg(long, default_value_t = 0.8)]
    pub train_fraction: f64,
    #[arg(long, default_value_t = 2000)]
    pub zdiff_points: usize,
    #[arg(long, default_value_t = 32)]
    pub zdiff_pairs: usize,
    /// L1 strength of the importance probes.
    #[arg(long, default_value_t = 1e-3)]
    pub importance_reg: f64,
    #[arg(long, default_value_t = 500)]
    pub max_epochs: usize,
    #[arg(long, default_value_t = DEFAULT_SOFT_RANK_THRESHOLD)]
    pub softrank_threshold: f64,
}

impl MetricsArgs {
    fn config(&self, seed: u64) -> Result<MetricsConfig> {
        check_fraction("train-fraction", self.train_fraction)?;
        check_fraction("softrank-threshold", self.softrank_threshold)?;
        check_positive("zdiff-points", self.zdiff_points)?;
        check_positive("zdiff-pairs", self.zdiff_pairs)?;
        check_positive("max-epochs", self.max_epochs)?;
        if !(self.importance_reg >= 0.0) {
            return Err(crate::usage("--importance-reg must be >= 0"));
        }
        let mut cfg = MetricsConfig::with_seed(seed);
        cfg.train_fraction = self.train_fraction;
        cfg.zdiff_points = self.zdiff_points;
        cfg.zdiff_pairs = self.zdiff_pairs;
        cfg.importance.reg_strength = self.importance_reg;
        for t in [&mut cfg.importance, &mut cfg.zdiff, &mut cfg.explicitness] {
            t.max_epochs = self.max_epochs;
        }
        Ok(cfg)
    }
}

pub fn run_metrics(args: &MetricsArgs, ctx: &mut RunContext) -> Result<()> {
    let cfg = args.config(ctx.seed)?;
    let bundle = inputs::bundle(ctx, &args.manifest)?;
    let dci = dci_scores(&bundle, &cfg)?;
    let z = zdiff_score(&bundle, cfg.zdiff_points, cfg.zdiff_pairs, &cfg)?;
    let e = explicitness(&bundle, &cfg)?;
    let s = soft_rank(&bundle.embeddings, args.softrank_threshold)?;
    let mut config = serde_json::to_value(&cfg)?;
    config["softrank_threshold"] = args.softrank_threshold.into();
    let report = MetricReport::new(ctx.seed, config)
        .with_dci(&dci)
        .with_zdiff(&z)
        .with_explicitness(&e)
        .with_soft_rank(&s);
    ctx.emit_json(args.out.as_deref(), &report)
}

#[derive(Debug, Args, Serialize)]
pub struct SoftRankArgs {
    #[arg(long)]
    pub embeddings: PathBuf,
    /// Singular values above this fraction of the largest count toward the rank.
    #[arg(long, default_value_t = DEFAULT_SOFT_RANK_THRESHOLD)]
    pub threshold: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run_softrank(args: &SoftRankArgs, ctx: &mut RunContext) -> Result<()> {
    check_fraction("threshold", args.threshold)?;
    let table = inputs::embeddings(ctx, &args.embeddings)?;
    let report = soft_rank(&table, args.threshold)?;
    ctx.emit_json(args.out.as_deref(), &report)
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum ImportanceKind {
    /// Columns of the L1-probe importance matrix.
    Dci,
    /// Weights of the Z-diff factor classifier.
    Zdiff,
}

#[derive(Debug, Args, Serialize)]
pub struct TopDimsArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long, value_enum, default_value = "dci")]
    pub source: ImportanceKind,
    /// Dimensions kept per factor (capped at the embedding width).
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    /// Factors to rank (default: all).
    #[arg(long, value_delimiter = ',')]
    pub factors: Vec<String>,
    #[arg(long, default_value_t = 2000)]
    pub zdiff_points: usize,
    #[arg(long, default_value_t = 32)]
    pub zdiff_pairs: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Ranked dimensions per factor, as written by `topdims`.
#[derive(Debug, Serialize, Deserialize)]
pub struct TopDims {
    pub source: ImportanceKind,
    pub dims: usize,
    pub factors: Vec<String>,
    pub top: Vec<Vec<usize>>,
}

impl TopDims {
    pub fn for_factor(&self, name: &str) -> Result<&[usize]> {
        self.factors
            .iter()
            .position(|f| f == name)
            .map(|j| self.top[j].as_slice())
            .ok_or_else(|| anyhow!("no ranking for factor {name:?}; have {:?}", self.factors))
    }
}

pub fn run_topdims(args: &TopDimsArgs, ctx: &mut RunContext) -> Result<()> {
    check_positive("n", args.n)?;
    let mut cfg = MetricsConfig::with_seed(ctx.seed);
    cfg.zdiff_points = args.zdiff_points;
    cfg.zdiff_pairs = args.zdiff_pairs;
    let bundle = inputs::bundle(ctx, &args.manifest)?;
    let which = factor_indices(&bundle.factors, &args.factors)?;
    let n = args.n.min(bundle.embeddings.cols());
    let names = which.iter().map(|&j| bundle.factors.factor_names()[j].clone()).collect();
    let top = match args.source {
        ImportanceKind::Dci => {
            let m = importance_matrix(&bundle, &cfg.importance)?;
            which
                .iter()
                .map(|&j| top_dimensions(ImportanceSource::Matrix(&m), j, n))
                .collect::<Result<Vec<_>, _>>()?
        }
        ImportanceKind::Zdiff => {
            let z = zdiff_score(&bundle, cfg.zdiff_points, cfg.zdiff_pairs, &cfg)?;
            which
                .iter()
                .map(|&j| top_dimensions(ImportanceSource::Classifier(&z.classifier), j, n))
                .collect::<Result<Vec<_>, _>>()?
        }
    };
    let out = TopDims {
        source: args.source,
        dims: bundle.embeddings.cols(),
        factors: names,
        top,
    };
    ctx.emit_json(args.out.as_deref(), &out)
}

#[derive(Debug, Args, Serialize)]
pub struct CommonDimsArgs {
    /// `topdims` outputs; their rankings are compared together.
    #[arg(long, required = true, value_delimiter = ',')]
    pub topdims: Vec<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run_commondims(args: &CommonDimsArgs, ctx: &mut RunContext) -> Result<()> {
    let mut labels = Vec::new();
    let mut lists = Vec::new();
    for path in &args.topdims {
        let t: TopDims = inputs::json(ctx, path)?;
        if t.factors.len() != t.top.len() {
            return Err(anyhow!("{}: {} factors but {} rankings", path.display(), t.factors.len(), t.top.len()));
        }
        for (name, dims) in t.factors.into_iter().zip(t.top) {
            labels.push(format!("{}:{name}", path.display()));
            lists.push(dims);
        }
    }
    let common = common_dimensions(&lists)?;
    let out = serde_json::json!({
        "lists": labels,
        "pairwise": common.pairwise,
        "total": common.total,
        "shared": common.shared,
    });
    ctx.emit_json(args.out.as_deref(), &out)
}
