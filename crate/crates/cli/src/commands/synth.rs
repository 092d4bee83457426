use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, ValueEnum};
use disbench_core::store::{encode_embeddings, write_factors, DatasetBundle, EmbeddingTable, Manifest, Modality};
use disbench_core::synth::{gen_composed, gen_entangled, gen_factorized, shuffle_factors, BlockLayout, SyntheticSpec};
use serde::Serialize;
use serde_json::json;

use crate::run::RunContext;
use crate::usage;

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    /// One-hot block per factor level.
    Factorized,
    /// Factorized codes under a seeded random rotation.
    Entangled,
    /// Every attribute-object pair once, with its component parts.
    Composed,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Layout {
    Orthogonal,
    Overlapping,
}

#[derive(Debug, Args, Serialize)]
pub struct SynthArgs {
    #[arg(long, value_enum, default_value = "factorized")]
    pub kind: Kind,
    #[arg(long, default_value_t = 8)]
    pub attributes: usize,
    #[arg(long, default_value_t = 16)]
    pub objects: usize,
    /// Ignored for composed data, which has one row per pair.
    #[arg(long, default_value_t = 2000)]
    pub samples: usize,
    /// Standard deviation of the additive Gaussian noise.
    #[arg(long, default_value_t = 0.01)]
    pub noise: f64,
    #[arg(long, default_value_t = 1)]
    pub dims_per_level: usize,
    /// Enumerate level combinations instead of sampling them.
    #[arg(long)]
    pub exhaustive: bool,
    #[arg(long, value_enum, default_value = "orthogonal")]
    pub layout: Layout,
    /// Permute factor rows across samples (a chance-level control).
    #[arg(long)]
    pub shuffle_labels: bool,
    #[arg(long)]
    pub out_dir: PathBuf,
}

pub fn run(args: &SynthArgs, ctx: &mut RunContext) -> Result<()> {
    let mut spec = SyntheticSpec::attribute_object(args.attributes, args.objects, args.samples, args.noise, ctx.seed);
    spec.dims_per_level = args.dims_per_level;
    spec.exhaustive = args.exhaustive;
    spec.layout = match args.layout {
        Layout::Orthogonal => BlockLayout::Orthogonal,
        Layout::Overlapping => BlockLayout::Overlapping,
    };
    std::fs::create_dir_all(&args.out_dir)?;
    match args.kind {
        Kind::Factorized | Kind::Entangled => {
            let mut bundle = match args.kind {
                Kind::Factorized => gen_factorized(&spec)?,
                _ => gen_entangled(&spec)?,
            };
            if args.shuffle_labels {
                bundle = shuffle_factors(&bundle, ctx.seed)?;
            }
            write_bundle(args, ctx, &bundle)
        }
        Kind::Composed => {
            if args.shuffle_labels {
                return Err(usage("--shuffle-labels does not apply to composed data"));
            }
            if args.dims_per_level != 1 || args.exhaustive {
                return Err(usage("composed data takes neither --dims-per-level nor --exhaustive"));
            }
            let data = gen_composed(&spec)?;
            let bundle = DatasetBundle {
                embeddings: data.combined.clone(),
                factors: data.factors.clone(),
                modality: Modality::Image,
                source: "synthetic:composed".into(),
            };
            write_bundle(args, ctx, &bundle)?;
            write_table(ctx, &args.out_dir.join("attribute.bin"), &data.attribute_part)?;
            write_table(ctx, &args.out_dir.join("object.bin"), &data.object_part)?;
            let ids = data.combined.ids();
            let pick = |rows: &[usize]| rows.iter().map(|&i| ids[i].clone()).collect::<Vec<_>>();
            let split = json!({ "train": pick(&data.split.train), "test": pick(&data.split.test) });
            ctx.write_json(&args.out_dir.join("split.json"), &split)
        }
    }
}

fn write_table(ctx: &mut RunContext, path: &std::path::Path, table: &EmbeddingTable) -> Result<()> {
    ctx.write_bytes(path, &encode_embeddings(table)?)
}

fn write_bundle(args: &SynthArgs, ctx: &mut RunContext, bundle: &DatasetBundle) -> Result<()> {
    let dir = &args.out_dir;
    let manifest = Manifest {
        embeddings: "embeddings.bin".into(),
        factors: "factors.tsv".into(),
        vocab: "vocab.json".into(),
        modality: bundle.modality,
        source: bundle.source.clone(),
    };
    let manifest_path = dir.join("manifest.json");
    manifest.write(&manifest_path)?;
    ctx.wrote(&manifest_path);
    write_table(ctx, &dir.join("embeddings.bin"), &bundle.embeddings)?;
    let (tsv, vocab) = (dir.join("factors.tsv"), dir.join("vocab.json"));
    write_factors(&bundle.factors, &tsv, &vocab)?;
    ctx.wrote(&tsv);
    ctx.wrote(&vocab);
    Ok(())
}
