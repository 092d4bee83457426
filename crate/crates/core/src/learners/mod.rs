//! Self-contained numerical learners shared by every metric.

mod auc;
mod entropy;
mod linear_map;
mod logistic;
mod svd;

pub use auc::{auc_binary, auc_roc_ovr};
pub use entropy::entropy_base_k;
pub use linear_map::{fit_linear_map, LinearMap};
pub use logistic::{fit_logistic, predict_labels, predict_scores, LinearModel};
pub(crate) use linear_map::mse as linear_map_mse;
pub(crate) use logistic::argmax_first;
pub use svd::singular_values;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Penalty {
    L1,
    L2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassWeighting {
    Uniform,
    /// Each sample's loss scaled by N / (C · count(class)).
    Balanced,
}

/// Optimizer settings recorded alongside every fitted model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub penalty: Penalty,
    pub reg_strength: f64,
    pub max_epochs: usize,
    pub learning_rate: f64,
    /// Stop once the relative loss improvement drops below this.
    pub tolerance: f64,
    pub seed: u64,
    pub class_weighting: ClassWeighting,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            penalty: Penalty::L2,
            reg_strength: 1e-3,
            max_epochs: 500,
            learning_rate: 1.0,
            tolerance: 1e-7,
            seed: 0,
            class_weighting: ClassWeighting::Uniform,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> crate::Result<()> {
        if !(self.reg_strength >= 0.0) {
            return Err(crate::Error::Invalid("reg_strength must be >= 0".into()));
        }
        if self.max_epochs == 0 {
            return Err(crate::Error::Invalid("max_epochs must be >= 1".into()));
        }
        if !(self.learning_rate > 0.0) {
            return Err(crate::Error::Invalid("learning_rate must be > 0".into()));
        }
        Ok(())
    }
}
