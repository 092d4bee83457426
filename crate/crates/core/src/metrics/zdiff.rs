use std::collections::HashSet;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{accuracy, check_level_counts, MetricsConfig, Standardizer};
use crate::error::{Error, Result};
use crate::learners::{fit_logistic, predict_labels, LinearModel};
use crate::store::DatasetBundle;

/// Draws per pair before accepting a repeated sample pair inside one point.
const PAIR_RETRIES: usize = 64;

#[derive(Debug, Clone, Serialize)]
pub struct ZDiffReport {
    pub raw_accuracy: f64,
    pub scaled: f64,
    /// Trained on standardized mean absolute differences; one row per factor.
    pub classifier: LinearModel,
    pub pairs_per_point: usize,
    pub points: usize,
}

/// `(raw − 1/M) / (1 − 1/M)`.
pub fn scale_zdiff(raw: f64, num_factors: usize) -> f64 {
    let chance = 1.0 / num_factors as f64;
    (raw - chance) / (1.0 - chance)
}

/// Z-diff score.
///
/// Each training point fixes one uniformly drawn factor, averages the
/// elementwise absolute code differences of `pairs_per_point` sample pairs
/// that agree on that factor, and is labeled with the factor. A logistic
/// classifier trained on the first 80% of points is scored on the rest.
pub fn zdiff_score(
    bundle: &DatasetBundle,
    points: usize,
    pairs_per_point: usize,
    cfg: &MetricsConfig,
) -> Result<ZDiffReport> {
    let m = bundle.factors.num_factors();
    if m < 2 {
        return Err(Error::Invalid("Z-diff needs at least 2 factors".into()));
    }
    if points < 2 || pairs_per_point == 0 {
        return Err(Error::Invalid("Z-diff needs points >= 2 and pairs_per_point >= 1".into()));
    }
    check_level_counts(&bundle.factors, 2)?;
    let bundle = bundle.canonical()?;
    let factors = &bundle.factors;
    let codes = bundle.embeddings.to_array();
    let d = codes.ncols();

    // members[j][v] = rows whose factor j takes level v
    let members: Vec<Vec<Vec<usize>>> = (0..m)
        .map(|j| {
            let mut groups = vec![Vec::new(); factors.vocab()[j].len()];
            for n in 0..factors.rows() {
                groups[factors.value(n, j)].push(n);
            }
            groups
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut features = Array2::<f64>::zeros((points, d));
    let mut labels = Vec::with_capacity(points);
    for p in 0..points {
        let j = rng.random_range(0..m);
        let groups = &members[j];
        let mut used: HashSet<(usize, usize)> = HashSet::with_capacity(pairs_per_point);
        let mut row = features.row_mut(p);
        for _ in 0..pairs_per_point {
            let mut pair = (0, 0);
            for _ in 0..PAIR_RETRIES {
                let group = &groups[rng.random_range(0..groups.len())];
                let a = rng.random_range(0..group.len());
                let mut b = rng.random_range(0..group.len() - 1);
                if b >= a {
                    b += 1;
                }
                let (a, b) = (group[a], group[b]);
                pair = (a.min(b), a.max(b));
                if !used.contains(&pair) {
                    break;
                }
            }
            used.insert(pair);
            let (a, b) = pair;
            for ((out, x1), x2) in row.iter_mut().zip(codes.row(a)).zip(codes.row(b)) {
                *out += (x1 - x2).abs();
            }
        }
        row /= pairs_per_point as f64;
        labels.push(j);
    }

    let n_train = ((0.8 * points as f64).round() as usize).clamp(1, points - 1);
    let train_x = features.slice(ndarray::s![..n_train, ..]).to_owned();
    let test_x = features.slice(ndarray::s![n_train.., ..]).to_owned();
    let standardizer = Standardizer::fit(&train_x);
    let train_x = standardizer.apply(&train_x);
    let test_x = standardizer.apply(&test_x);
    let classifier = fit_logistic(train_x.view(), &labels[..n_train], m, &cfg.zdiff)?;
    let pred = predict_labels(&classifier, test_x.view())?;
    let raw_accuracy = accuracy(&pred, &labels[n_train..]);
    Ok(ZDiffReport {
        raw_accuracy,
        scaled: scale_zdiff(raw_accuracy, m),
        classifier,
        pairs_per_point,
        points,
    })
}
