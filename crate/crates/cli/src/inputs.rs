//! Loading command inputs while recording them for the run record.

use std::path::Path;

use anyhow::{anyhow, Context, Result};
use disbench_core::analysis::ModelRecord;
use disbench_core::store::{load_embeddings, DatasetBundle, EmbeddingTable, Manifest};
use serde::de::DeserializeOwned;

use crate::run::RunContext;

/// Loads the bundle a manifest describes; the manifest and the three files
/// it names all count as inputs.
pub fn bundle(ctx: &mut RunContext, manifest: &Path) -> Result<DatasetBundle> {
    ctx.input(manifest);
    let m = Manifest::load(manifest).with_context(|| format!("loading manifest {}", manifest.display()))?;
    for p in m.inputs() {
        ctx.input(p);
    }
    m.load_bundle()
        .with_context(|| format!("loading dataset of {}", manifest.display()))
}

pub fn embeddings(ctx: &mut RunContext, path: &Path) -> Result<EmbeddingTable> {
    ctx.input(path);
    load_embeddings(path).with_context(|| format!("loading embeddings {}", path.display()))
}

pub fn json<T: DeserializeOwned>(ctx: &mut RunContext, path: &Path) -> Result<T> {
    ctx.input(path);
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn records(ctx: &mut RunContext, path: &Path) -> Result<Vec<ModelRecord>> {
    let records: Vec<ModelRecord> = json(ctx, path)?;
    if records.is_empty() {
        return Err(anyhow!("{} holds no model records", path.display()));
    }
    for r in &records {
        r.validate()?;
    }
    Ok(records)
}

/// A tab-separated file with a header row.
pub struct Tsv {
    path: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Tsv {
    pub fn column(&self, name: &str) -> Result<usize> {
        self.header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| anyhow!("{} has no {name:?} column", self.path))
    }

    /// The column if present.
    pub fn optional(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }
}

pub fn tsv(ctx: &mut RunContext, path: &Path) -> Result<Tsv> {
    ctx.input(path);
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(b'\t')
        .quoting(false)
        .from_path(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let header = reader
        .headers()
        .with_context(|| format!("reading header of {}", path.display()))?
        .iter()
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.with_context(|| format!("parsing {}", path.display()))?;
        rows.push(record.iter().map(str::to_string).collect());
    }
    Ok(Tsv {
        path: path.display().to_string(),
        header,
        rows,
    })
}

pub fn lines(ctx: &mut RunContext, path: &Path) -> Result<Vec<String>> {
    ctx.input(path);
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(text.lines().map(str::to_string).collect())
}
