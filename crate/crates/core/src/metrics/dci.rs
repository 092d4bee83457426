use ndarray::{Array2, Axis};
use rayon::prelude::*;
use serde::Serialize;

use super::{accuracy, check_level_counts, id_split, select, MetricsConfig, Standardizer};
use crate::error::{Error, Result};
use crate::learners::{entropy_base_k, fit_logistic, predict_labels, LinearModel, TrainConfig};
use crate::store::DatasetBundle;

/// Importance of each code dimension (rows) for each factor (columns).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImportanceMatrix {
    /// D×M raw importances R.
    #[serde(serialize_with = "serialize_rows")]
    pub raw: Array2<f64>,
    /// R normalized along each row (P).
    #[serde(serialize_with = "serialize_rows")]
    pub row_norm: Array2<f64>,
    /// R normalized along each column (P̃).
    #[serde(serialize_with = "serialize_rows")]
    pub col_norm: Array2<f64>,
    pub factor_names: Vec<String>,
}

fn serialize_rows<S: serde::Serializer>(
    m: &Array2<f64>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    let rows: Vec<Vec<f64>> = m.outer_iter().map(|r| r.to_vec()).collect();
    rows.serialize(s)
}

impl ImportanceMatrix {
    /// Derives both normalizations from a raw nonnegative D×M matrix.
    /// Rows or columns summing to zero stay zero.
    pub fn from_raw(raw: Array2<f64>, factor_names: Vec<String>) -> Result<Self> {
        if raw.ncols() != factor_names.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} importance columns for {} factors",
                raw.ncols(),
                factor_names.len()
            )));
        }
        if raw.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
            return Err(Error::Invalid("importances must be finite and nonnegative".into()));
        }
        let mut row_norm = raw.clone();
        for mut row in row_norm.outer_iter_mut() {
            let s: f64 = row.sum();
            if s > 0.0 {
                row.mapv_inplace(|v| v / s);
            }
        }
        let mut col_norm = raw.clone();
        for mut col in col_norm.axis_iter_mut(Axis(1)) {
            let s: f64 = col.sum();
            if s > 0.0 {
                col.mapv_inplace(|v| v / s);
            }
        }
        Ok(Self {
            raw,
            row_norm,
            col_norm,
            factor_names,
        })
    }

    pub fn dims(&self) -> usize {
        self.raw.nrows()
    }

    pub fn num_factors(&self) -> usize {
        self.raw.ncols()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DciReport {
    pub per_dim_d: Vec<f64>,
    pub per_factor_c: Vec<f64>,
    pub overall_d: f64,
    pub overall_c: f64,
    pub informativeness: Vec<f64>,
    pub importance: ImportanceMatrix,
}

/// Mean absolute class weight per feature: the D-vector of importances of
/// one probe.
fn weight_importance(model: &LinearModel) -> Vec<f64> {
    let c = model.num_classes() as f64;
    model
        .weights
        .axis_iter(Axis(1))
        .map(|col| col.iter().map(|w| w.abs()).sum::<f64>() / c)
        .collect()
}

struct FactorProbe {
    model: LinearModel,
    importance: Vec<f64>,
}

fn fit_probes(
    x: &Array2<f64>,
    bundle: &DatasetBundle,
    rows: &[usize],
    cfg: &TrainConfig,
) -> Result<Vec<FactorProbe>> {
    let factors = &bundle.factors;
    (0..factors.num_factors())
        .into_par_iter()
        .map(|j| {
            let y: Vec<usize> = rows.iter().map(|&i| factors.value(i, j)).collect();
            let model = fit_logistic(x.view(), &y, factors.vocab()[j].len(), cfg)?;
            let importance = weight_importance(&model);
            Ok(FactorProbe { model, importance })
        })
        .collect()
}

fn raw_from_probes(probes: &[FactorProbe], dims: usize) -> Array2<f64> {
    Array2::from_shape_fn((dims, probes.len()), |(i, j)| probes[j].importance[i])
}

/// Importance matrix from L1 probes fitted on every sample of the bundle.
pub fn importance_matrix(bundle: &DatasetBundle, cfg: &TrainConfig) -> Result<ImportanceMatrix> {
    check_level_counts(&bundle.factors, 2)?;
    let bundle = bundle.canonical()?;
    let raw_x = bundle.embeddings.to_array();
    let standardizer = Standardizer::fit(&raw_x);
    if standardizer.all_constant() {
        return Err(Error::Invalid("every embedding dimension is constant".into()));
    }
    let x = standardizer.apply(&raw_x);
    let rows: Vec<usize> = (0..bundle.rows()).collect();
    let probes = fit_probes(&x, &bundle, &rows, cfg)?;
    ImportanceMatrix::from_raw(
        raw_from_probes(&probes, x.ncols()),
        bundle.factors.factor_names().to_vec(),
    )
}

/// Per-dimension disentanglement, per-factor completeness and their
/// aggregates from an importance matrix.
///
/// `D_i = 1 − H_M(P_i·)` and `C_j = 1 − H_D(P̃_·j)`. `overall_D` weights
/// each dimension by its share of total importance; `overall_C` is the
/// plain mean. Dimensions with zero importance score 0 (and carry no
/// weight); factors with zero importance score 0.
pub fn dci_from_importance(importance: &ImportanceMatrix) -> Result<(Vec<f64>, Vec<f64>, f64, f64)> {
    let (d, m) = importance.raw.dim();
    let mut per_dim = Vec::with_capacity(d);
    for (i, row) in importance.row_norm.outer_iter().enumerate() {
        if importance.raw.row(i).sum() <= 0.0 {
            per_dim.push(0.0);
        } else if m < 2 {
            per_dim.push(1.0);
        } else {
            per_dim.push(1.0 - entropy_base_k(&row.to_vec(), m)?);
        }
    }
    let mut per_factor = Vec::with_capacity(m);
    for (j, col) in importance.col_norm.axis_iter(Axis(1)).enumerate() {
        if importance.raw.column(j).sum() <= 0.0 {
            per_factor.push(0.0);
        } else if d < 2 {
            per_factor.push(1.0);
        } else {
            per_factor.push(1.0 - entropy_base_k(&col.to_vec(), d)?);
        }
    }
    let total: f64 = importance.raw.sum();
    let overall_d = if total > 0.0 {
        importance
            .raw
            .outer_iter()
            .zip(&per_dim)
            .map(|(row, di)| row.sum() / total * di)
            .sum::<f64>()
            .clamp(0.0, 1.0)
    } else {
        0.0
    };
    let overall_c = if m > 0 {
        per_factor.iter().sum::<f64>() / m as f64
    } else {
        0.0
    };
    Ok((per_dim, per_factor, overall_d, overall_c))
}

/// DCI triple. Probes train on the id-keyed training split; the importance
/// matrix comes from their weights and informativeness from their
/// held-out accuracy, normalized as `(acc − 1/K)/(1 − 1/K)` and clamped to
/// `[0, 1]`.
pub fn dci_scores(bundle: &DatasetBundle, cfg: &MetricsConfig) -> Result<DciReport> {
    check_level_counts(&bundle.factors, 2)?;
    let bundle = bundle.canonical()?;
    let (train, test) = id_split(bundle.embeddings.ids(), &bundle.factors, cfg.train_fraction, cfg.seed)?;
    let raw_x = bundle.embeddings.to_array();
    let standardizer = Standardizer::fit(&select(&raw_x, &train));
    if standardizer.all_constant() {
        return Err(Error::Invalid("every embedding dimension is constant".into()));
    }
    let x = standardizer.apply(&raw_x);
    let x_train = select(&x, &train);
    let x_test = select(&x, &test);
    let probes = fit_probes(&x_train, &bundle, &train, &cfg.importance)?;

    let mut informativeness = Vec::with_capacity(probes.len());
    for (j, probe) in probes.iter().enumerate() {
        let truth: Vec<usize> = test.iter().map(|&i| bundle.factors.value(i, j)).collect();
        let pred = predict_labels(&probe.model, x_test.view())?;
        let k = bundle.factors.vocab()[j].len() as f64;
        let chance = 1.0 / k;
        let score = (accuracy(&pred, &truth) - chance) / (1.0 - chance);
        informativeness.push(score.clamp(0.0, 1.0));
    }

    let importance = ImportanceMatrix::from_raw(
        raw_from_probes(&probes, x.ncols()),
        bundle.factors.factor_names().to_vec(),
    )?;
    let (per_dim_d, per_factor_c, overall_d, overall_c) = dci_from_importance(&importance)?;
    Ok(DciReport {
        per_dim_d,
        per_factor_c,
        overall_d,
        overall_c,
        informativeness,
        importance,
    })
}
