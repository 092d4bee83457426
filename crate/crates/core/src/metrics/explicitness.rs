use serde::Serialize;

use super::{check_level_counts, id_split, select, MetricsConfig, Standardizer};
use crate::error::{Error, Result};
use crate::learners::{auc_roc_ovr, fit_logistic, predict_scores};
use crate::store::DatasetBundle;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExplicitnessReport {
    pub overall: f64,
    /// Held-out one-vs-rest AUC per class of each factor; `None` where the
    /// test split lacks positives or negatives for that class.
    pub per_factor_per_class_auc: Vec<Vec<Option<f64>>>,
}

/// Mean of `(AUC − 0.5)/0.5` over every defined class of every factor,
/// clamped to `[0, 1]`.
pub fn explicitness_from_aucs(aucs: &[Vec<Option<f64>>]) -> Result<f64> {
    let defined: Vec<f64> = aucs.iter().flatten().flatten().copied().collect();
    if defined.is_empty() {
        return Err(Error::Invalid("no class has a defined AUC".into()));
    }
    let mean = defined.iter().map(|a| (a - 0.5) / 0.5).sum::<f64>() / defined.len() as f64;
    Ok(mean.clamp(0.0, 1.0))
}

/// Explicitness: balanced logistic probe per factor on the whole
/// representation, scored by held-out one-vs-rest AUC.
pub fn explicitness(bundle: &DatasetBundle, cfg: &MetricsConfig) -> Result<ExplicitnessReport> {
    check_level_counts(&bundle.factors, 2)?;
    let bundle = bundle.canonical()?;
    let factors = &bundle.factors;
    let (train, test) = id_split(bundle.embeddings.ids(), factors, cfg.train_fraction, cfg.seed)?;
    let raw_x = bundle.embeddings.to_array();
    let standardizer = Standardizer::fit(&select(&raw_x, &train));
    let x = standardizer.apply(&raw_x);
    let x_train = select(&x, &train);
    let x_test = select(&x, &test);

    let mut per_factor = Vec::with_capacity(factors.num_factors());
    for j in 0..factors.num_factors() {
        let y_train: Vec<usize> = train.iter().map(|&i| factors.value(i, j)).collect();
        let y_test: Vec<usize> = test.iter().map(|&i| factors.value(i, j)).collect();
        let model = fit_logistic(x_train.view(), &y_train, factors.vocab()[j].len(), &cfg.explicitness)?;
        let scores = predict_scores(&model, x_test.view())?;
        per_factor.push(auc_roc_ovr(&scores, &y_test));
    }
    Ok(ExplicitnessReport {
        overall: explicitness_from_aucs(&per_factor)?,
        per_factor_per_class_auc: per_factor,
    })
}
