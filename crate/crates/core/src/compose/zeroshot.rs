use ndarray::Array2;
use serde::Serialize;

use super::{normalize_array_rows, unit_rows};
use crate::error::{Error, Result};
use crate::learners::argmax_first;
use crate::store::EmbeddingTable;

/// Template-averaged class text embeddings, one unit row per class.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassEmbeddingMatrix {
    pub embeddings: Array2<f64>,
    pub class_labels: Vec<String>,
    pub templates_used: usize,
}

impl ClassEmbeddingMatrix {
    pub fn num_classes(&self) -> usize {
        self.class_labels.len()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.class_labels.iter().position(|l| l == label)
    }
}

/// Normalizes each template's rows, averages across templates and
/// re-normalizes. Row `c` of every template must belong to class
/// `class_labels[c]`.
pub fn build_class_embeddings(class_labels: Vec<String>, per_template: &[Array2<f64>]) -> Result<ClassEmbeddingMatrix> {
    let first = per_template
        .first()
        .ok_or_else(|| Error::Invalid("at least one template is required".into()))?;
    let (c, d) = first.dim();
    if class_labels.len() != c {
        return Err(Error::DimensionMismatch(format!("{} labels for {c} class rows", class_labels.len())));
    }
    let mut unique = class_labels.clone();
    unique.sort();
    unique.dedup();
    if unique.len() != c {
        return Err(Error::Invalid("class labels must be unique".into()));
    }
    let mut sum = Array2::<f64>::zeros((c, d));
    for (t, m) in per_template.iter().enumerate() {
        if m.dim() != (c, d) {
            return Err(Error::DimensionMismatch(format!(
                "template {t} is {:?}, expected {:?}",
                m.dim(),
                (c, d)
            )));
        }
        let mut m = m.clone();
        normalize_array_rows(&mut m, &format!("template {t}"))?;
        sum += &m;
    }
    normalize_array_rows(&mut sum, "averaged class")?;
    Ok(ClassEmbeddingMatrix {
        embeddings: sum,
        class_labels,
        templates_used: per_template.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZeroShotReport {
    pub top1: f64,
    /// Accuracy over the images of each class; `None` for classes without
    /// images.
    pub per_class: Vec<Option<f64>>,
    pub predictions: Vec<usize>,
}

/// Assigns each image the class of highest cosine similarity (ties to the
/// lowest class index) and scores against `labels`.
pub fn zero_shot_accuracy(
    images: &EmbeddingTable,
    labels: &[usize],
    classes: &ClassEmbeddingMatrix,
) -> Result<ZeroShotReport> {
    if labels.len() != images.rows() {
        return Err(Error::DimensionMismatch(format!("{} labels for {} images", labels.len(), images.rows())));
    }
    if images.cols() != classes.embeddings.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "images have {} dims, classes {}",
            images.cols(),
            classes.embeddings.ncols()
        )));
    }
    let c = classes.num_classes();
    if let Some(&bad) = labels.iter().find(|&&l| l >= c) {
        return Err(Error::Invalid(format!("label {bad} out of range for {c} classes")));
    }
    let x = unit_rows(images)?;
    let sims = x.dot(&classes.embeddings.t());
    let predictions: Vec<usize> = sims.outer_iter().map(|r| argmax_first(r.iter().copied())).collect();
    let mut hits = vec![0usize; c];
    let mut totals = vec![0usize; c];
    for (&p, &y) in predictions.iter().zip(labels) {
        totals[y] += 1;
        if p == y {
            hits[y] += 1;
        }
    }
    let correct: usize = hits.iter().sum();
    Ok(ZeroShotReport {
        top1: correct as f64 / labels.len() as f64,
        per_class: hits
            .iter()
            .zip(&totals)
            .map(|(&h, &t)| (t > 0).then(|| h as f64 / t as f64))
            .collect(),
        predictions,
    })
}
