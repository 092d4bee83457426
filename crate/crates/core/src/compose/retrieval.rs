use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::normalize_array_rows;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// `normalize(image ± text)`.
pub fn compose_query(image: &[f64], text: &[f64], sign: Sign) -> Result<Vec<f64>> {
    if image.len() != text.len() {
        return Err(Error::DimensionMismatch(format!("image {} vs text {}", image.len(), text.len())));
    }
    let s = sign.factor();
    let sum: Vec<f64> = image.iter().zip(text).map(|(a, b)| a + s * b).collect();
    let norm = sum.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm < 1e-9 {
        return Err(Error::Invalid(format!("composed query cancels (norm {norm:e})")));
    }
    Ok(sum.into_iter().map(|v| v / norm).collect())
}

/// Indices of the `k` largest similarities, descending; ties go to the
/// lower index.
pub fn top_k(similarities: &[f64], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..similarities.len()).collect();
    let order = |a: &usize, b: &usize| similarities[*b].total_cmp(&similarities[*a]).then(a.cmp(b));
    let k = k.min(idx.len());
    if k == 0 {
        return Vec::new();
    }
    if k < idx.len() {
        idx.select_nth_unstable_by(k - 1, order);
        idx.truncate(k);
    }
    idx.sort_by(order);
    idx
}

#[derive(Debug, Clone)]
pub struct RetrievalTask {
    pub queries: Array2<f64>,
    pub gallery: Array2<f64>,
    pub query_targets: Vec<usize>,
    pub gallery_labels: Vec<usize>,
    pub k: usize,
}

/// Fraction of queries whose `k` nearest gallery rows by cosine similarity
/// include a row labeled with the query's target.
pub fn retrieval_recall_at_k(task: &RetrievalTask) -> Result<f64> {
    let (q, d) = task.queries.dim();
    if task.k == 0 || q == 0 || task.gallery.nrows() == 0 {
        return Err(Error::Invalid("retrieval needs k >= 1 and nonempty queries and gallery".into()));
    }
    if task.gallery.ncols() != d {
        return Err(Error::DimensionMismatch(format!("queries {d} dims, gallery {}", task.gallery.ncols())));
    }
    if task.query_targets.len() != q || task.gallery_labels.len() != task.gallery.nrows() {
        return Err(Error::DimensionMismatch("labels do not match rows".into()));
    }
    let mut queries = task.queries.clone();
    normalize_array_rows(&mut queries, "query")?;
    let mut gallery = task.gallery.clone();
    normalize_array_rows(&mut gallery, "gallery")?;
    let hits: usize = (0..q)
        .into_par_iter()
        .map(|i| {
            let sims: Vec<f64> = gallery.dot(&queries.row(i)).to_vec();
            let hit = top_k(&sims, task.k)
                .iter()
                .any(|&g| task.gallery_labels[g] == task.query_targets[i]);
            usize::from(hit)
        })
        .sum();
    Ok(hits as f64 / q as f64)
}
