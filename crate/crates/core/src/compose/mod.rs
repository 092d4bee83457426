//! Task-level evaluations: zero-shot classification, image±text retrieval,
//! top-dimension analysis, dimension switching, linear decomposition and
//! the two embedding-level dataset filters.

mod decompose;
mod dims;
mod filters;
mod retrieval;
mod zeroshot;

pub use decompose::{decompose_linear, CompositionalSplit, ComponentFit, DecompositionReport};
pub use dims::{
    common_dimensions, dimension_switch_min_k, top_dimensions, CommonDimensions, ImportanceSource,
    SwitchResult, SwitchStep, DEFAULT_SWITCH_SCHEDULE,
};
pub use filters::{
    caption_cooccurrence_filter, knn_novelty_filter, tokenize, CaptionFilterReport, KnnFilterReport, Neighbor,
    DEFAULT_KNN_THRESHOLD,
};
pub use retrieval::{compose_query, retrieval_recall_at_k, top_k, RetrievalTask, Sign};
pub use zeroshot::{build_class_embeddings, zero_shot_accuracy, ClassEmbeddingMatrix, ZeroShotReport};

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::store::EmbeddingTable;

/// Rows scaled to unit norm in f64; a row with norm below 1e-12 is an error.
pub(crate) fn unit_rows(table: &EmbeddingTable) -> Result<Array2<f64>> {
    let mut x = table.to_array();
    for (i, mut row) in x.outer_iter_mut().enumerate() {
        let norm = row.dot(&row).sqrt();
        if norm < 1e-12 {
            return Err(Error::DegenerateRow(table.ids()[i].clone()));
        }
        row /= norm;
    }
    Ok(x)
}

pub(crate) fn normalize_array_rows(x: &mut Array2<f64>, what: &str) -> Result<()> {
    for (i, mut row) in x.outer_iter_mut().enumerate() {
        let norm = row.dot(&row).sqrt();
        if norm < 1e-12 {
            return Err(Error::DegenerateRow(format!("{what} row {i}")));
        }
        row /= norm;
    }
    Ok(())
}

pub(crate) fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}
