//! Disentanglement metrics: DCI, Z-diff, explicitness and soft rank.
//!
//! Every metric first puts the bundle in canonical (id-sorted) order and
//! derives its train/test split from a hash of `(seed, id)`, so results do
//! not depend on the row order of the input files.

mod dci;
mod explicitness;
mod report;
mod softrank;
mod zdiff;

pub use dci::{dci_from_importance, dci_scores, importance_matrix, DciReport, ImportanceMatrix};
pub use explicitness::{explicitness, explicitness_from_aucs, ExplicitnessReport};
pub use report::MetricReport;
pub use softrank::{soft_rank, SoftRankReport, DEFAULT_SOFT_RANK_THRESHOLD};
pub use zdiff::{scale_zdiff, zdiff_score, ZDiffReport};

use ndarray::{Array1, Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fnv1a64;
use crate::learners::{ClassWeighting, Penalty, TrainConfig};
use crate::store::FactorTable;

/// Reseeds allowed when a split leaves a class out of training.
pub const MAX_SPLIT_ATTEMPTS: usize = 10;

/// Knobs shared by the metric suite. Every sampling and split is keyed to
/// `seed`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsConfig {
    pub seed: u64,
    pub train_fraction: f64,
    /// L1 probes whose weights give the DCI importance matrix.
    pub importance: TrainConfig,
    /// Z-diff factor classifier.
    pub zdiff: TrainConfig,
    /// Balanced per-factor probes for explicitness.
    pub explicitness: TrainConfig,
    pub zdiff_points: usize,
    pub zdiff_pairs: usize,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        Self::with_seed(0)
    }
}

impl MetricsConfig {
    pub fn with_seed(seed: u64) -> Self {
        let base = TrainConfig {
            seed,
            ..TrainConfig::default()
        };
        Self {
            seed,
            train_fraction: 0.8,
            importance: TrainConfig {
                penalty: Penalty::L1,
                reg_strength: 1e-3,
                ..base.clone()
            },
            zdiff: base.clone(),
            explicitness: TrainConfig {
                class_weighting: ClassWeighting::Balanced,
                ..base
            },
            zdiff_points: 2000,
            zdiff_pairs: 32,
        }
    }
}

/// Per-column standardization fitted on a subset of rows.
#[derive(Debug, Clone)]
pub(crate) struct Standardizer {
    mean: Array1<f64>,
    /// 0 marks a constant column, which maps to 0.
    inv_std: Array1<f64>,
}

impl Standardizer {
    pub(crate) fn fit(x: &Array2<f64>) -> Self {
        let n = x.nrows() as f64;
        let mean = x.sum_axis(Axis(0)) / n;
        let mut var = Array1::<f64>::zeros(x.ncols());
        for row in x.outer_iter() {
            for ((v, m), out) in row.iter().zip(mean.iter()).zip(var.iter_mut()) {
                *out += (v - m) * (v - m);
            }
        }
        let inv_std = var.mapv(|v| {
            let sd = (v / n).sqrt();
            if sd > 1e-12 {
                1.0 / sd
            } else {
                0.0
            }
        });
        Self { mean, inv_std }
    }

    pub(crate) fn apply(&self, x: &Array2<f64>) -> Array2<f64> {
        let mut out = x - &self.mean;
        out *= &self.inv_std;
        out
    }

    pub(crate) fn all_constant(&self) -> bool {
        self.inv_std.iter().all(|&v| v == 0.0)
    }
}

/// Deterministic split of `ids` into (train, test) row indices, both
/// ascending. Rows are ranked by `fnv1a64(seed ‖ id)`; the first
/// `round(fraction · N)` go to training. If some level of some factor is
/// missing from training, the seed is incremented and the split redrawn.
pub(crate) fn id_split(
    ids: &[String],
    factors: &FactorTable,
    fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::Invalid(format!("train fraction {fraction} not in (0, 1)")));
    }
    let n = ids.len();
    if n < 2 {
        return Err(Error::Invalid("need at least 2 samples to split".into()));
    }
    let n_train = ((fraction * n as f64).round() as usize).clamp(1, n - 1);
    for attempt in 0..MAX_SPLIT_ATTEMPTS {
        let s = seed.wrapping_add(attempt as u64);
        let mut keyed: Vec<(u64, usize)> = ids
            .iter()
            .enumerate()
            .map(|(i, id)| {
                let mut bytes = s.to_le_bytes().to_vec();
                bytes.extend_from_slice(id.as_bytes());
                (fnv1a64(&bytes), i)
            })
            .collect();
        keyed.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| ids[a.1].cmp(&ids[b.1])));
        let mut train: Vec<usize> = keyed[..n_train].iter().map(|k| k.1).collect();
        let mut test: Vec<usize> = keyed[n_train..].iter().map(|k| k.1).collect();
        train.sort_unstable();
        test.sort_unstable();
        let covered = (0..factors.num_factors()).all(|j| {
            let mut seen = vec![false; factors.vocab()[j].len()];
            for &i in &train {
                seen[factors.value(i, j)] = true;
            }
            seen.iter().all(|&b| b)
        });
        if covered {
            return Ok((train, test));
        }
    }
    Err(Error::SplitExhausted {
        attempts: MAX_SPLIT_ATTEMPTS,
    })
}

pub(crate) fn select(x: &Array2<f64>, rows: &[usize]) -> Array2<f64> {
    x.select(Axis(0), rows)
}

pub(crate) fn accuracy(pred: &[usize], truth: &[usize]) -> f64 {
    if truth.is_empty() {
        return 0.0;
    }
    pred.iter().zip(truth).filter(|(a, b)| a == b).count() as f64 / truth.len() as f64
}

/// Rejects factor levels with fewer than `needed` samples.
pub(crate) fn check_level_counts(factors: &FactorTable, needed: usize) -> Result<()> {
    for j in 0..factors.num_factors() {
        let mut counts = vec![0usize; factors.vocab()[j].len()];
        for n in 0..factors.rows() {
            counts[factors.value(n, j)] += 1;
        }
        if let Some(level) = counts.iter().position(|&c| c < needed) {
            return Err(Error::StarvedLevel {
                factor: factors.factor_names()[j].clone(),
                level: factors.vocab()[j][level].clone(),
                count: counts[level],
                needed,
            });
        }
    }
    Ok(())
}
