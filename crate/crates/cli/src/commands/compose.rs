use std::collections::{BTreeMap, HashMap};
use std::path::PathBuf;

use anyhow::{anyhow, Context, Result};
use clap::Args;
use disbench_core::compose::{
    build_class_embeddings, compose_query, decompose_linear, dimension_switch_min_k, retrieval_recall_at_k,
    zero_shot_accuracy, CompositionalSplit, RetrievalTask, Sign, DEFAULT_SWITCH_SCHEDULE,
};
use disbench_core::learners::TrainConfig;
use disbench_core::store::EmbeddingTable;
use disbench_core::synth::ComposedDataset;
use ndarray::Array2;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::metrics::TopDims;
use super::{check_positive, factor_indices, joint_label};
use crate::inputs;
use crate::run::RunContext;
use crate::usage;

#[derive(Debug, Args, Serialize)]
pub struct ZeroShotArgs {
    /// Image embeddings with their factor annotations.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Factors whose labels, joined by spaces, name an image's class
    /// (default: all, in file order).
    #[arg(long, value_delimiter = ',')]
    pub label_factors: Vec<String>,
    /// Text embeddings of one prompt template, ids equal to class labels;
    /// repeat for more templates.
    #[arg(long, required = true)]
    pub text: Vec<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn rows_by_id(table: &EmbeddingTable, ids: &[String], what: &str) -> Result<Array2<f64>> {
    let mut m = Array2::zeros((ids.len(), table.cols()));
    for (r, id) in ids.iter().enumerate() {
        let i = table
            .index_of(id)
            .ok_or_else(|| anyhow!("{what} has no row {id:?}"))?;
        for (dst, &v) in m.row_mut(r).iter_mut().zip(table.row(i)) {
            *dst = f64::from(v);
        }
    }
    Ok(m)
}

pub fn run_zeroshot(args: &ZeroShotArgs, ctx: &mut RunContext) -> Result<()> {
    let bundle = inputs::bundle(ctx, &args.manifest)?;
    let which = factor_indices(&bundle.factors, &args.label_factors)?;
    let mut tables = Vec::with_capacity(args.text.len());
    for p in &args.text {
        tables.push(inputs::embeddings(ctx, p)?);
    }
    let classes: Vec<String> = tables[0].ids().to_vec();
    let mut per_template = Vec::with_capacity(tables.len());
    for (t, p) in tables.iter().zip(&args.text) {
        if t.rows() != classes.len() {
            return Err(anyhow!("{} has {} classes, expected {}", p.display(), t.rows(), classes.len()));
        }
        per_template.push(rows_by_id(t, &classes, &p.display().to_string())?);
    }
    let class_matrix = build_class_embeddings(classes, &per_template)?;
    let images = &bundle.embeddings;
    let mut labels = Vec::with_capacity(images.rows());
    for n in 0..images.rows() {
        let label = joint_label(&bundle.factors, n, &which);
        let c = class_matrix
            .index_of(&label)
            .ok_or_else(|| anyhow!("image {:?} has class {label:?} with no text embedding", images.ids()[n]))?;
        labels.push(c);
    }
    let report = zero_shot_accuracy(images, &labels, &class_matrix)?;
    let per_class: Vec<_> = class_matrix
        .class_labels
        .iter()
        .zip(&report.per_class)
        .map(|(c, acc)| json!({ "class": c, "accuracy": acc }))
        .collect();
    let predictions: Vec<_> = images
        .ids()
        .iter()
        .zip(labels.iter().zip(&report.predictions))
        .map(|(id, (&truth, &pred))| {
            json!({
                "id": id,
                "truth": class_matrix.class_labels[truth],
                "predicted": class_matrix.class_labels[pred],
            })
        })
        .collect();
    let out = json!({
        "top1": report.top1,
        "templates": class_matrix.templates_used,
        "classes": per_class,
        "predictions": predictions,
    });
    ctx.emit_json(args.out.as_deref(), &out)
}

#[derive(Debug, Args, Serialize)]
pub struct RetrieveArgs {
    /// Gallery embeddings with their factor annotations.
    #[arg(long)]
    pub gallery: PathBuf,
    /// Factors forming the gallery label a query must hit (default: all).
    #[arg(long, value_delimiter = ',')]
    pub label_factors: Vec<String>,
    /// TSV with columns query_id, image, text, sign, target. An empty image
    /// makes a text-only query; sign is `+` or `-`.
    #[arg(long)]
    pub queries: PathBuf,
    /// Embeddings holding the query images.
    #[arg(long)]
    pub images: Option<PathBuf>,
    /// Embeddings holding the query texts.
    #[arg(long)]
    pub texts: PathBuf,
    #[arg(long, value_delimiter = ',', default_values_t = [1usize, 5, 10])]
    pub k: Vec<usize>,
    /// Queries drawn (seeded, without replacement); 0 keeps all.
    #[arg(long, default_value_t = 200)]
    pub sample: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Image and text are summed as unit vectors.
fn unit(v: Vec<f64>) -> Result<Vec<f64>> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm < 1e-12 {
        return Err(anyhow!("zero-norm embedding"));
    }
    Ok(v.into_iter().map(|x| x / norm).collect())
}

pub fn run_retrieve(args: &RetrieveArgs, ctx: &mut RunContext) -> Result<()> {
    if args.k.is_empty() || args.k.contains(&0) {
        return Err(usage("--k values must be at least 1"));
    }
    let bundle = inputs::bundle(ctx, &args.gallery)?;
    let which = factor_indices(&bundle.factors, &args.label_factors)?;
    let mut label_ids: BTreeMap<String, usize> = BTreeMap::new();
    let mut gallery_labels = Vec::with_capacity(bundle.rows());
    for n in 0..bundle.rows() {
        let label = joint_label(&bundle.factors, n, &which);
        let next = label_ids.len();
        gallery_labels.push(*label_ids.entry(label).or_insert(next));
    }

    let tsv = inputs::tsv(ctx, &args.queries)?;
    let (qid, text_col, target_col) = (tsv.column("query_id")?, tsv.column("text")?, tsv.column("target")?);
    let (image_col, sign_col) = (tsv.optional("image"), tsv.optional("sign"));
    let texts = inputs::embeddings(ctx, &args.texts)?;
    let images = match &args.images {
        Some(p) => Some(inputs::embeddings(ctx, p)?),
        None => None,
    };

    let mut rows: Vec<usize> = (0..tsv.rows.len()).collect();
    if args.sample > 0 && args.sample < rows.len() {
        let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
        rows = sample(&mut rng, tsv.rows.len(), args.sample).into_vec();
        rows.sort_unstable();
    }
    if rows.is_empty() {
        return Err(anyhow!("{} has no queries", args.queries.display()));
    }
    let d = bundle.embeddings.cols();
    let mut queries = Array2::zeros((rows.len(), d));
    let mut targets = Vec::with_capacity(rows.len());
    let mut query_ids = Vec::with_capacity(rows.len());
    for (r, &i) in rows.iter().enumerate() {
        let row = &tsv.rows[i];
        let cell = |c: usize| row.get(c).map(String::as_str).unwrap_or("");
        let text_id = cell(text_col);
        let t = texts
            .index_of(text_id)
            .ok_or_else(|| anyhow!("query {:?}: no text {text_id:?}", cell(qid)))?;
        let text = unit(texts.row_f64(t)).with_context(|| format!("text {text_id:?}"))?;
        let image_id = image_col.map_or("", cell);
        let q = if image_id.is_empty() {
            text
        } else {
            let table = images
                .as_ref()
                .ok_or_else(|| usage("queries name images but --images was not given"))?;
            let m = table
                .index_of(image_id)
                .ok_or_else(|| anyhow!("query {:?}: no image {image_id:?}", cell(qid)))?;
            let sign = match sign_col.map_or("", cell) {
                "" | "+" => Sign::Plus,
                "-" => Sign::Minus,
                other => return Err(anyhow!("query {:?}: sign {other:?} is not + or -", cell(qid))),
            };
            let image = unit(table.row_f64(m)).with_context(|| format!("image {image_id:?}"))?;
            compose_query(&image, &text, sign).with_context(|| format!("query {:?}", cell(qid)))?
        };
        if q.len() != d {
            return Err(anyhow!("query {:?} has {} dims, gallery {d}", cell(qid), q.len()));
        }
        queries.row_mut(r).assign(&ndarray::ArrayView1::from(&q));
        let target = cell(target_col);
        targets.push(
            *label_ids
                .get(target)
                .ok_or_else(|| anyhow!("query {:?}: target {target:?} is not a gallery label", cell(qid)))?,
        );
        query_ids.push(cell(qid).to_string());
    }
    let gallery = bundle.embeddings.to_array();
    let mut recalls = Vec::with_capacity(args.k.len());
    for &k in &args.k {
        let task = RetrievalTask {
            queries: queries.clone(),
            gallery: gallery.clone(),
            query_targets: targets.clone(),
            gallery_labels: gallery_labels.clone(),
            k,
        };
        recalls.push(json!({ "k": k, "recall": retrieval_recall_at_k(&task)? }));
    }
    let out = json!({
        "queries": tsv.rows.len(),
        "evaluated": query_ids,
        "recall": recalls,
    });
    ctx.emit_json(args.out.as_deref(), &out)
}

#[derive(Debug, Args, Serialize)]
pub struct SwitchArgs {
    /// Embeddings of the source and donor images.
    #[arg(long)]
    pub images: PathBuf,
    /// Embeddings of the captions.
    #[arg(long)]
    pub texts: PathBuf,
    /// TSV with columns source, donor, caption_source, caption_target.
    #[arg(long)]
    pub pairs: PathBuf,
    /// A `topdims` output ranking the image dimensions.
    #[arg(long)]
    pub ranked: PathBuf,
    /// Factor whose ranking is used.
    #[arg(long)]
    pub factor: String,
    /// Ascending dimension counts to try; entries beyond the available
    /// dimensions are dropped.
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_SWITCH_SCHEDULE)]
    pub schedule: Vec<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run_switch(args: &SwitchArgs, ctx: &mut RunContext) -> Result<()> {
    if args.schedule.is_empty() || args.schedule.windows(2).any(|w| w[0] >= w[1]) || args.schedule[0] == 0 {
        return Err(usage("--schedule must be positive and strictly ascending"));
    }
    let images = inputs::embeddings(ctx, &args.images)?;
    let texts = inputs::embeddings(ctx, &args.texts)?;
    let tsv = inputs::tsv(ctx, &args.pairs)?;
    let ranked: TopDims = inputs::json(ctx, &args.ranked)?;
    let dims = ranked.for_factor(&args.factor)?;
    let limit = dims.len().min(images.cols());
    let schedule: Vec<usize> = args.schedule.iter().copied().filter(|&k| k <= limit).collect();
    if schedule.is_empty() {
        return Err(anyhow!("no schedule entry fits {limit} ranked dimensions"));
    }
    let cols = [
        tsv.column("source")?,
        tsv.column("donor")?,
        tsv.column("caption_source")?,
        tsv.column("caption_target")?,
    ];
    let lookup = |table: &EmbeddingTable, id: &str, what: &str| -> Result<Vec<f64>> {
        let i = table.index_of(id).ok_or_else(|| anyhow!("no {what} {id:?}"))?;
        Ok(table.row_f64(i))
    };
    let mut results = Vec::with_capacity(tsv.rows.len());
    let mut found = Vec::new();
    for row in &tsv.rows {
        let cell = |c: usize| row.get(c).map(String::as_str).unwrap_or("");
        let [s, d, cs, ct] = cols.map(cell);
        let r = dimension_switch_min_k(
            &lookup(&images, s, "image")?,
            &lookup(&images, d, "image")?,
            dims,
            &lookup(&texts, cs, "caption")?,
            &lookup(&texts, ct, "caption")?,
            &schedule,
        )?;
        if let Some(k) = r.min_k {
            found.push(k);
        }
        results.push(json!({
            "source": s,
            "donor": d,
            "caption_source": cs,
            "caption_target": ct,
            "min_k": r.min_k,
            "steps": r.steps,
        }));
    }
    let mean_min_k = (!found.is_empty()).then(|| found.iter().sum::<usize>() as f64 / found.len() as f64);
    let out = json!({
        "factor": args.factor,
        "schedule": schedule,
        "pairs": results.len(),
        "switched": found.len(),
        "mean_min_k": mean_min_k,
        "results": results,
    });
    ctx.emit_json(args.out.as_deref(), &out)
}

#[derive(Debug, Args, Serialize)]
pub struct DecomposeArgs {
    /// Combined embeddings with attribute and object factors (first two).
    #[arg(long)]
    pub manifest: PathBuf,
    /// Attribute-part embeddings, same ids as the combined table.
    #[arg(long)]
    pub attribute: PathBuf,
    /// Object-part embeddings, same ids as the combined table.
    #[arg(long)]
    pub object: PathBuf,
    /// JSON `{"train": [ids], "test": [ids]}`; defaults to holding out the
    /// last quarter of attribute and object levels.
    #[arg(long)]
    pub split: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-6)]
    pub ridge: f64,
    /// Fit `x ↦ Wᵀ W x` instead of a free matrix.
    #[arg(long)]
    pub tied: bool,
    #[arg(long, default_value_t = 5000)]
    pub max_epochs: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Deserialize)]
struct SplitFile {
    train: Vec<String>,
    test: Vec<String>,
}

pub fn run_decompose(args: &DecomposeArgs, ctx: &mut RunContext) -> Result<()> {
    check_positive("max-epochs", args.max_epochs)?;
    if !(args.ridge >= 0.0) {
        return Err(usage("--ridge must be >= 0"));
    }
    let bundle = inputs::bundle(ctx, &args.manifest)?;
    let attribute_part = inputs::embeddings(ctx, &args.attribute)?;
    let object_part = inputs::embeddings(ctx, &args.object)?;
    let factors = bundle.factors.clone();
    if factors.num_factors() < 2 {
        return Err(anyhow!("decomposition needs attribute and object factors"));
    }
    let split = match &args.split {
        Some(p) => {
            let s: SplitFile = inputs::json(ctx, p)?;
            let index: HashMap<&str, usize> = bundle
                .embeddings
                .ids()
                .iter()
                .enumerate()
                .map(|(i, id)| (id.as_str(), i))
                .collect();
            let resolve = |ids: &[String]| -> Result<Vec<usize>> {
                ids.iter()
                    .map(|id| index.get(id.as_str()).copied().ok_or_else(|| anyhow!("split names unknown id {id:?}")))
                    .collect()
            };
            CompositionalSplit {
                train: resolve(&s.train)?,
                test: resolve(&s.test)?,
            }
        }
        None => {
            let cards = factors.cardinalities();
            CompositionalSplit::holdout(&factors.column(0), &factors.column(1), cards[0], cards[1])?
        }
    };
    let data = ComposedDataset {
        combined: bundle.embeddings,
        attribute_part,
        object_part,
        factors,
        split,
    };
    let cfg = TrainConfig {
        max_epochs: args.max_epochs,
        seed: ctx.seed,
        ..TrainConfig::default()
    };
    let report = decompose_linear(&data, args.ridge, args.tied, &cfg)?;
    let components: Vec<_> = report
        .components
        .iter()
        .map(|c| json!({ "component": c.component, "train_mse": c.train_mse, "test_mse": c.test_mse }))
        .collect();
    let mean_test_mse =
        report.components.iter().map(|c| c.test_mse).sum::<f64>() / report.components.len() as f64;
    let out = json!({
        "ridge": report.ridge,
        "tied": report.tied,
        "train_rows": report.train_rows,
        "test_rows": report.test_rows,
        "components": components,
        "mean_test_mse": mean_test_mse,
    });
    ctx.emit_json(args.out.as_deref(), &out)
}
