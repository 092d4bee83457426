//! Cross-model aggregation: rank and linear correlations between metrics
//! and accuracies, sorted tables and scatter plots.

mod scatter;
mod stats;
mod table;

pub use scatter::{emit_scatter, render_scatter};
pub use stats::{correlate, kendall_tau, pearson, Correlation};
pub use table::{emit_table, format_sig6, render_table, RenderedTable};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Scalar keys a metric report can carry.
pub const REPORT_KEYS: [&str; 7] = [
    "dci.overall_D",
    "dci.overall_C",
    "dci.informativeness",
    "zdiff.raw",
    "zdiff.scaled",
    "explicitness.overall",
    "softrank.relative",
];

/// One model's metric values and accuracies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelRecord {
    pub model: String,
    #[serde(default)]
    pub source: String,
    #[serde(default)]
    pub metrics: BTreeMap<String, f64>,
    /// Keyed by evaluation name, e.g. `id_top1` or `cood_top1`.
    #[serde(default)]
    pub accuracies: BTreeMap<String, f64>,
}

impl ModelRecord {
    pub fn new(model: impl Into<String>) -> Self {
        Self {
            model: model.into(),
            source: String::new(),
            metrics: BTreeMap::new(),
            accuracies: BTreeMap::new(),
        }
    }

    pub fn with_metric(mut self, key: &str, value: f64) -> Self {
        self.metrics.insert(key.to_string(), value);
        self
    }

    pub fn with_accuracy(mut self, key: &str, value: f64) -> Self {
        self.accuracies.insert(key.to_string(), value);
        self
    }

    /// Looks `key` up among metrics first, then accuracies.
    pub fn value(&self, key: &str) -> Option<f64> {
        self.metrics.get(key).or_else(|| self.accuracies.get(key)).copied()
    }

    pub fn require(&self, key: &str) -> Result<f64> {
        self.value(key)
            .ok_or_else(|| Error::MissingKey(format!("{key} (model {})", self.model)))
    }

    /// Metric keys must come from [`REPORT_KEYS`] (or a `softrank.rank`
    /// count) and every value must be finite.
    pub fn validate(&self) -> Result<()> {
        for key in self.metrics.keys() {
            if !REPORT_KEYS.contains(&key.as_str()) && key != "softrank.rank" {
                return Err(Error::Invalid(format!("unknown metric key {key:?} for model {}", self.model)));
            }
        }
        for (key, v) in self.metrics.iter().chain(&self.accuracies) {
            if !v.is_finite() {
                return Err(Error::Invalid(format!("{key} of model {} is not finite", self.model)));
            }
        }
        Ok(())
    }
}

/// Pulls `key` from every record, in record order.
pub fn column(records: &[ModelRecord], key: &str) -> Result<Vec<f64>> {
    records.iter().map(|r| r.require(key)).collect()
}
