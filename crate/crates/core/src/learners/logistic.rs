use ndarray::{Array1, Array2, ArrayView2, Axis};
use serde::{Serialize, Serializer};

use super::{ClassWeighting, Penalty, TrainConfig};
use crate::error::{Error, Result};

/// Multinomial logistic regression weights.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    /// C×D.
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
    pub classes: Vec<usize>,
    pub train_config: TrainConfig,
    pub epochs: usize,
    pub final_loss: f64,
}

impl LinearModel {
    pub fn num_classes(&self) -> usize {
        self.weights.nrows()
    }

    pub fn num_features(&self) -> usize {
        self.weights.ncols()
    }

    /// Bitwise equality of weights and bias.
    pub fn bit_eq(&self, other: &Self) -> bool {
        self.weights.dim() == other.weights.dim()
            && self
                .weights
                .iter()
                .chain(self.bias.iter())
                .zip(other.weights.iter().chain(other.bias.iter()))
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

impl Serialize for LinearModel {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Json<'a> {
            weights: Vec<Vec<f64>>,
            bias: Vec<f64>,
            classes: &'a [usize],
            train_config: &'a TrainConfig,
            epochs: usize,
            final_loss: f64,
        }
        Json {
            weights: self.weights.outer_iter().map(|r| r.to_vec()).collect(),
            bias: self.bias.to_vec(),
            classes: &self.classes,
            train_config: &self.train_config,
            epochs: self.epochs,
            final_loss: self.final_loss,
        }
        .serialize(serializer)
    }
}

fn softmax_rows(logits: &mut Array2<f64>) {
    for mut row in logits.outer_iter_mut() {
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        row.mapv_inplace(|v| (v - max).exp());
        let sum: f64 = row.sum();
        row.mapv_inplace(|v| v / sum);
    }
}

fn logits(weights: &Array2<f64>, bias: &Array1<f64>, x: ArrayView2<f64>) -> Array2<f64> {
    let mut z = x.dot(&weights.t());
    z += bias;
    z
}

/// Fits a multinomial logistic model by full-batch gradient descent from
/// zero initialization.
///
/// L2 adds `reg/2 · ‖W‖²` to the mean cross-entropy; L1 adds `reg · ‖W‖₁`
/// and is applied as a soft-threshold after each gradient step. The bias is
/// never penalized. Labels must cover every class in `0..n_classes`.
pub fn fit_logistic(
    x: ArrayView2<f64>,
    y: &[usize],
    n_classes: usize,
    cfg: &TrainConfig,
) -> Result<LinearModel> {
    cfg.validate()?;
    let (n, d) = x.dim();
    if y.len() != n {
        return Err(Error::DimensionMismatch(format!("{} labels for {n} rows", y.len())));
    }
    if n_classes < 2 {
        return Err(Error::Invalid("logistic regression needs at least 2 classes".into()));
    }
    if n < n_classes {
        return Err(Error::Invalid(format!("{n} samples for {n_classes} classes")));
    }
    let mut counts = vec![0usize; n_classes];
    for &label in y {
        if label >= n_classes {
            return Err(Error::Invalid(format!("label {label} >= {n_classes} classes")));
        }
        counts[label] += 1;
    }
    if let Some(c) = counts.iter().position(|&k| k == 0) {
        return Err(Error::ClassAbsent(c));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Invalid("non-finite feature value".into()));
    }

    let sample_weight: Vec<f64> = match cfg.class_weighting {
        ClassWeighting::Uniform => vec![1.0; n],
        ClassWeighting::Balanced => y
            .iter()
            .map(|&c| n as f64 / (n_classes as f64 * counts[c] as f64))
            .collect(),
    };
    let inv_n = 1.0 / n as f64;

    let mut weights = Array2::<f64>::zeros((n_classes, d));
    let mut bias = Array1::<f64>::zeros(n_classes);
    let lr = cfg.learning_rate;
    let reg = cfg.reg_strength;
    let mut prev_loss = f64::INFINITY;
    let mut epochs = 0;
    let mut final_loss = f64::NAN;

    for epoch in 0..cfg.max_epochs {
        let mut probs = logits(&weights, &bias, x);
        softmax_rows(&mut probs);

        let mut data_loss = 0.0;
        for (i, row) in probs.outer_iter().enumerate() {
            data_loss -= sample_weight[i] * row[y[i]].max(f64::MIN_POSITIVE).ln();
        }
        data_loss *= inv_n;
        let penalty = match cfg.penalty {
            Penalty::L2 => 0.5 * reg * weights.iter().map(|w| w * w).sum::<f64>(),
            Penalty::L1 => reg * weights.iter().map(|w| w.abs()).sum::<f64>(),
        };
        let loss = data_loss + penalty;
        if !loss.is_finite() {
            return Err(Error::Diverged { epoch });
        }
        epochs = epoch;
        final_loss = loss;
        if prev_loss.is_finite() && prev_loss - loss < cfg.tolerance * prev_loss.abs().max(1e-12) {
            break;
        }
        prev_loss = loss;

        // dL/dlogits = w_n (p - onehot) / N
        let mut grad_logits = probs;
        for (i, mut row) in grad_logits.outer_iter_mut().enumerate() {
            row[y[i]] -= 1.0;
            row *= sample_weight[i] * inv_n;
        }
        let mut grad_w = grad_logits.t().dot(&x);
        let grad_b = grad_logits.sum_axis(Axis(0));
        if cfg.penalty == Penalty::L2 {
            grad_w.scaled_add(reg, &weights);
        }
        weights.scaled_add(-lr, &grad_w);
        bias.scaled_add(-lr, &grad_b);
        if cfg.penalty == Penalty::L1 {
            let threshold = lr * reg;
            weights.mapv_inplace(|w| w.signum() * (w.abs() - threshold).max(0.0));
        }
        epochs = epoch + 1;
    }

    if weights.iter().any(|w| !w.is_finite()) {
        return Err(Error::Diverged { epoch: epochs });
    }
    Ok(LinearModel {
        weights,
        bias,
        classes: (0..n_classes).collect(),
        train_config: cfg.clone(),
        epochs,
        final_loss,
    })
}

/// Class probabilities, one softmax row per sample.
pub fn predict_scores(model: &LinearModel, x: ArrayView2<f64>) -> Result<Array2<f64>> {
    if x.ncols() != model.num_features() {
        return Err(Error::DimensionMismatch(format!(
            "model expects {} features, got {}",
            model.num_features(),
            x.ncols()
        )));
    }
    let mut z = logits(&model.weights, &model.bias, x);
    softmax_rows(&mut z);
    Ok(z)
}

/// Argmax class per row, ties toward the lowest class index.
pub fn predict_labels(model: &LinearModel, x: ArrayView2<f64>) -> Result<Vec<usize>> {
    let scores = predict_scores(model, x)?;
    Ok(scores.outer_iter().map(|row| argmax_first(row.iter().copied())).collect())
}

pub(crate) fn argmax_first(values: impl Iterator<Item = f64>) -> usize {
    let mut best = 0;
    let mut best_value = f64::NEG_INFINITY;
    for (i, v) in values.enumerate() {
        if v > best_value {
            best = i;
            best_value = v;
        }
    }
    best
}
