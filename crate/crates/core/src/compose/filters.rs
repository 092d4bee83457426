use std::collections::{BTreeSet, HashMap};

use rayon::prelude::*;
use serde::Serialize;

use super::{retrieval::top_k, unit_rows};
use crate::error::{Error, Result};
use crate::store::EmbeddingTable;

pub const DEFAULT_KNN_THRESHOLD: f64 = 0.92;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Neighbor {
    pub id: String,
    pub similarity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KnnFilterReport {
    pub k: usize,
    pub threshold: f64,
    pub keep: Vec<bool>,
    /// Top-`k` references per candidate, most similar first.
    pub neighbors: Vec<Vec<Neighbor>>,
}

impl KnnFilterReport {
    pub fn kept(&self) -> usize {
        self.keep.iter().filter(|&&k| k).count()
    }
}

/// Exact cosine k-nearest-neighbor search of every candidate among the
/// references. A candidate is kept iff its closest reference has similarity
/// below `threshold`.
pub fn knn_novelty_filter(
    candidates: &EmbeddingTable,
    references: &EmbeddingTable,
    k: usize,
    threshold: f64,
) -> Result<KnnFilterReport> {
    if k == 0 || k > references.rows() {
        return Err(Error::Invalid(format!("k={k} with {} references", references.rows())));
    }
    if candidates.cols() != references.cols() {
        return Err(Error::DimensionMismatch(format!(
            "candidates have {} dims, references {}",
            candidates.cols(),
            references.cols()
        )));
    }
    let c = unit_rows(candidates)?;
    let r = unit_rows(references)?;
    let neighbors: Vec<Vec<Neighbor>> = (0..c.nrows())
        .into_par_iter()
        .map(|i| {
            let sims = r.dot(&c.row(i)).to_vec();
            top_k(&sims, k)
                .into_iter()
                .map(|j| Neighbor {
                    id: references.ids()[j].clone(),
                    similarity: sims[j],
                })
                .collect()
        })
        .collect();
    let keep = neighbors.iter().map(|n: &Vec<Neighbor>| n[0].similarity < threshold).collect();
    Ok(KnnFilterReport {
        k,
        threshold,
        keep,
        neighbors,
    })
}

/// Lowercased alphanumeric runs.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CaptionFilterReport {
    /// Pairs whose two labels co-occur in some caption, in input order.
    pub seen: Vec<(String, String)>,
    pub kept: Vec<(String, String)>,
    pub captions: usize,
}

/// Marks an (attribute, object) pair as seen when a single caption contains
/// both labels as whole-word, case-insensitive token runs, anywhere and in
/// any order.
pub fn caption_cooccurrence_filter<I, S>(pairs: &[(String, String)], captions: I) -> Result<CaptionFilterReport>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut labels: Vec<Vec<String>> = Vec::new();
    let mut label_index: HashMap<Vec<String>, usize> = HashMap::new();
    let mut pair_labels = Vec::with_capacity(pairs.len());
    for (a, o) in pairs {
        let mut ids = [0usize; 2];
        for (slot, label) in ids.iter_mut().zip([a, o]) {
            let tokens = tokenize(label);
            if tokens.is_empty() {
                return Err(Error::Invalid(format!("label {label:?} has no word characters")));
            }
            *slot = *label_index.entry(tokens.clone()).or_insert_with(|| {
                labels.push(tokens);
                labels.len() - 1
            });
        }
        pair_labels.push(ids);
    }
    let mut by_first: HashMap<&str, Vec<usize>> = HashMap::new();
    for (i, tokens) in labels.iter().enumerate() {
        by_first.entry(tokens[0].as_str()).or_default().push(i);
    }

    let mut seen = vec![false; pairs.len()];
    let mut count = 0;
    for caption in captions {
        count += 1;
        let tokens = tokenize(caption.as_ref());
        let mut present = BTreeSet::new();
        for start in 0..tokens.len() {
            if let Some(candidates) = by_first.get(tokens[start].as_str()) {
                for &l in candidates {
                    if tokens[start..].starts_with(&labels[l]) {
                        present.insert(l);
                    }
                }
            }
        }
        if present.len() < 2 {
            continue;
        }
        for (flag, [a, o]) in seen.iter_mut().zip(&pair_labels) {
            if !*flag && present.contains(a) && present.contains(o) {
                *flag = true;
            }
        }
    }
    let (seen_pairs, kept): (Vec<_>, Vec<_>) = pairs.iter().cloned().zip(seen).partition(|(_, s)| *s);
    Ok(CaptionFilterReport {
        seen: seen_pairs.into_iter().map(|(p, _)| p).collect(),
        kept: kept.into_iter().map(|(p, _)| p).collect(),
        captions: count,
    })
}
