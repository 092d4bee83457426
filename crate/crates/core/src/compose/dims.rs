use std::collections::BTreeMap;

use serde::Serialize;

use super::cosine;
use crate::error::{Error, Result};
use crate::learners::LinearModel;
use crate::metrics::ImportanceMatrix;

pub const DEFAULT_SWITCH_SCHEDULE: [usize; 11] = [5, 10, 20, 30, 40, 60, 90, 120, 160, 200, 250];

/// Where per-factor dimension importances come from.
#[derive(Debug, Clone, Copy)]
pub enum ImportanceSource<'a> {
    /// Column `j` of the raw importance matrix.
    Matrix(&'a ImportanceMatrix),
    /// Absolute weights of row `j` of a Z-diff classifier (one class per
    /// factor).
    Classifier(&'a LinearModel),
}

impl ImportanceSource<'_> {
    fn num_factors(&self) -> usize {
        match self {
            Self::Matrix(m) => m.num_factors(),
            Self::Classifier(c) => c.num_classes(),
        }
    }

    fn dims(&self) -> usize {
        match self {
            Self::Matrix(m) => m.dims(),
            Self::Classifier(c) => c.num_features(),
        }
    }

    fn importances(&self, factor: usize) -> Vec<f64> {
        match self {
            Self::Matrix(m) => m.raw.column(factor).to_vec(),
            Self::Classifier(c) => c.weights.row(factor).iter().map(|w| w.abs()).collect(),
        }
    }
}

/// The `n` most important dimensions for `factor`, descending, ties toward
/// the lower index.
pub fn top_dimensions(source: ImportanceSource<'_>, factor: usize, n: usize) -> Result<Vec<usize>> {
    if factor >= source.num_factors() {
        return Err(Error::Invalid(format!(
            "factor {factor} out of range for {} factors",
            source.num_factors()
        )));
    }
    if n > source.dims() {
        return Err(Error::Invalid(format!("asked for {n} of {} dimensions", source.dims())));
    }
    let imp = source.importances(factor);
    let mut idx: Vec<usize> = (0..imp.len()).collect();
    idx.sort_by(|&a, &b| imp[b].total_cmp(&imp[a]).then(a.cmp(&b)));
    idx.truncate(n);
    Ok(idx)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CommonDimensions {
    /// `pairwise[j][k] = |tops_j ∩ tops_k|`.
    pub pairwise: Vec<Vec<usize>>,
    /// Dimensions appearing in at least two lists.
    pub total: usize,
    pub shared: Vec<usize>,
}

pub fn common_dimensions(tops: &[Vec<usize>]) -> Result<CommonDimensions> {
    if tops.len() < 2 {
        return Err(Error::Invalid("common dimensions need at least 2 factors".into()));
    }
    let sets: Vec<Vec<usize>> = tops
        .iter()
        .map(|t| {
            let mut s = t.clone();
            s.sort_unstable();
            s.dedup();
            s
        })
        .collect();
    let pairwise = sets
        .iter()
        .map(|a| {
            sets.iter()
                .map(|b| a.iter().filter(|d| b.binary_search(d).is_ok()).count())
                .collect()
        })
        .collect();
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for s in &sets {
        for &d in s {
            *counts.entry(d).or_default() += 1;
        }
    }
    let shared: Vec<usize> = counts.into_iter().filter(|&(_, c)| c >= 2).map(|(d, _)| d).collect();
    Ok(CommonDimensions {
        pairwise,
        total: shared.len(),
        shared,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SwitchStep {
    pub k: usize,
    pub source_similarity: f64,
    pub target_similarity: f64,
    pub success: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SwitchResult {
    pub min_k: Option<usize>,
    pub schedule: Vec<usize>,
    pub steps: Vec<SwitchStep>,
}

/// For each `k` of the schedule, copies the donor's values into the first
/// `k` ranked dimensions of the source, re-normalizes, and checks whether
/// the result is closer to the target caption than to the source caption.
pub fn dimension_switch_min_k(
    source: &[f64],
    donor: &[f64],
    ranked_dims: &[usize],
    caption_source: &[f64],
    caption_target: &[f64],
    schedule: &[usize],
) -> Result<SwitchResult> {
    let d = source.len();
    if [donor.len(), caption_source.len(), caption_target.len()].iter().any(|&l| l != d) {
        return Err(Error::DimensionMismatch("switch vectors differ in length".into()));
    }
    if schedule.is_empty() || schedule.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Invalid("schedule must be nonempty and strictly ascending".into()));
    }
    let max_k = *schedule.last().unwrap();
    if max_k > d || max_k > ranked_dims.len() {
        return Err(Error::Invalid(format!(
            "schedule reaches k={max_k} with {d} dimensions and {} ranked",
            ranked_dims.len()
        )));
    }
    if let Some(&bad) = ranked_dims[..max_k].iter().find(|&&i| i >= d) {
        return Err(Error::Invalid(format!("ranked dimension {bad} out of range")));
    }
    let mut steps = Vec::with_capacity(schedule.len());
    for &k in schedule {
        let mut v = source.to_vec();
        for &dim in &ranked_dims[..k] {
            v[dim] = donor[dim];
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-12 {
            return Err(Error::DegenerateRow(format!("switched vector at k={k}")));
        }
        v.iter_mut().for_each(|x| *x /= norm);
        let source_similarity = cosine(&v, caption_source);
        let target_similarity = cosine(&v, caption_target);
        steps.push(SwitchStep {
            k,
            source_similarity,
            target_similarity,
            success: target_similarity > source_similarity,
        });
    }
    Ok(SwitchResult {
        min_k: steps.iter().find(|s| s.success).map(|s| s.k),
        schedule: schedule.to_vec(),
        steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(raw: ndarray::Array2<f64>) -> ImportanceMatrix {
        let m = raw.ncols();
        ImportanceMatrix::from_raw(raw, (0..m).map(|j| format!("f{j}")).collect()).unwrap()
    }

    #[test]
    fn top_dims_examples() {
        let mut raw = ndarray::Array2::zeros((10, 2));
        raw[[7, 0]] = 1.0;
        let m = matrix(raw);
        assert_eq!(top_dimensions(ImportanceSource::Matrix(&m), 0, 1).unwrap(), vec![7]);
        assert_eq!(top_dimensions(ImportanceSource::Matrix(&m), 1, 3).unwrap(), vec![0, 1, 2]);
        assert!(top_dimensions(ImportanceSource::Matrix(&m), 2, 1).is_err());
        assert!(top_dimensions(ImportanceSource::Matrix(&m), 0, 11).is_err());
    }

    #[test]
    fn common_dims_hand_count() {
        let r = common_dimensions(&[vec![1, 2, 3], vec![3, 4, 5], vec![3, 9]]).unwrap();
        assert_eq!(r.pairwise[0][1], 1);
        assert_eq!(r.pairwise[0][2], 1);
        assert_eq!(r.pairwise[1][2], 1);
        assert_eq!(r.total, 1);
        let disjoint = common_dimensions(&[vec![0, 1], vec![2, 3]]).unwrap();
        assert_eq!((disjoint.pairwise[0][1], disjoint.total), (0, 0));
        let same: Vec<usize> = (0..100).collect();
        let r = common_dimensions(&[same.clone(), same]).unwrap();
        assert_eq!((r.pairwise[0][1], r.total), (100, 100));
    }

    #[test]
    fn switch_examples() {
        let source = [1.0, 1.0, 0.0, 0.0];
        let donor = [-1.0, 1.0, 0.0, 0.0];
        let cap_src = [1.0, 0.0, 0.0, 0.0];
        let cap_tgt = [-1.0, 0.0, 0.0, 0.0];
        let r = dimension_switch_min_k(&source, &donor, &[0, 1, 2, 3], &cap_src, &cap_tgt, &[1, 2]).unwrap();
        assert_eq!(r.min_k, Some(1));
        let never = dimension_switch_min_k(&source, &source, &[0, 1, 2, 3], &cap_src, &cap_tgt, &[1, 2]).unwrap();
        assert_eq!(never.min_k, None);
        assert!(dimension_switch_min_k(&source, &donor, &[0, 1], &cap_src, &cap_tgt, &[2, 1]).is_err());
    }
}
