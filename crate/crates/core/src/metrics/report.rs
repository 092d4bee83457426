use serde::Serialize;

use super::{DciReport, ExplicitnessReport, SoftRankReport, ZDiffReport};

/// Flat JSON report; absent sections are omitted.
#[derive(Debug, Clone, Default, Serialize)]
pub struct MetricReport {
    #[serde(rename = "dci.per_dim_D", skip_serializing_if = "Option::is_none")]
    pub dci_per_dim_d: Option<Vec<f64>>,
    #[serde(rename = "dci.per_factor_C", skip_serializing_if = "Option::is_none")]
    pub dci_per_factor_c: Option<Vec<f64>>,
    #[serde(rename = "dci.overall_D", skip_serializing_if = "Option::is_none")]
    pub dci_overall_d: Option<f64>,
    #[serde(rename = "dci.overall_C", skip_serializing_if = "Option::is_none")]
    pub dci_overall_c: Option<f64>,
    #[serde(rename = "dci.informativeness", skip_serializing_if = "Option::is_none")]
    pub dci_informativeness: Option<Vec<f64>>,
    #[serde(rename = "zdiff.raw", skip_serializing_if = "Option::is_none")]
    pub zdiff_raw: Option<f64>,
    #[serde(rename = "zdiff.scaled", skip_serializing_if = "Option::is_none")]
    pub zdiff_scaled: Option<f64>,
    #[serde(rename = "explicitness.overall", skip_serializing_if = "Option::is_none")]
    pub explicitness_overall: Option<f64>,
    #[serde(rename = "softrank.rank", skip_serializing_if = "Option::is_none")]
    pub softrank_rank: Option<usize>,
    #[serde(rename = "softrank.relative", skip_serializing_if = "Option::is_none")]
    pub softrank_relative: Option<f64>,
    pub factor_names: Vec<String>,
    pub seed: u64,
    pub config: serde_json::Value,
}

impl MetricReport {
    pub fn new(seed: u64, config: serde_json::Value) -> Self {
        Self {
            seed,
            config,
            ..Self::default()
        }
    }

    pub fn with_dci(mut self, dci: &DciReport) -> Self {
        self.dci_per_dim_d = Some(dci.per_dim_d.clone());
        self.dci_per_factor_c = Some(dci.per_factor_c.clone());
        self.dci_overall_d = Some(dci.overall_d);
        self.dci_overall_c = Some(dci.overall_c);
        self.dci_informativeness = Some(dci.informativeness.clone());
        self.factor_names = dci.importance.factor_names.clone();
        self
    }

    pub fn with_zdiff(mut self, z: &ZDiffReport) -> Self {
        self.zdiff_raw = Some(z.raw_accuracy);
        self.zdiff_scaled = Some(z.scaled);
        self
    }

    pub fn with_explicitness(mut self, e: &ExplicitnessReport) -> Self {
        self.explicitness_overall = Some(e.overall);
        self
    }

    pub fn with_soft_rank(mut self, s: &SoftRankReport) -> Self {
        self.softrank_rank = Some(s.soft_rank);
        self.softrank_relative = Some(s.relative);
        self
    }

    /// Scalar entries keyed by their JSON names, for cross-model records.
    pub fn scalars(&self) -> Vec<(&'static str, f64)> {
        let mut out = Vec::new();
        let mean = |v: &Vec<f64>| v.iter().sum::<f64>() / v.len().max(1) as f64;
        if let Some(v) = self.dci_overall_d {
            out.push(("dci.overall_D", v));
        }
        if let Some(v) = self.dci_overall_c {
            out.push(("dci.overall_C", v));
        }
        if let Some(v) = &self.dci_informativeness {
            out.push(("dci.informativeness", mean(v)));
        }
        if let Some(v) = self.zdiff_raw {
            out.push(("zdiff.raw", v));
        }
        if let Some(v) = self.zdiff_scaled {
            out.push(("zdiff.scaled", v));
        }
        if let Some(v) = self.explicitness_overall {
            out.push(("explicitness.overall", v));
        }
        if let Some(v) = self.softrank_rank {
            out.push(("softrank.rank", v as f64));
        }
        if let Some(v) = self.softrank_relative {
            out.push(("softrank.relative", v));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keys_named_exactly() {
        let mut r = MetricReport::new(7, serde_json::json!({}));
        r.dci_overall_d = Some(1.0);
        r.softrank_rank = Some(3);
        let v = serde_json::to_value(&r).unwrap();
        assert_eq!(v["dci.overall_D"], 1.0);
        assert_eq!(v["softrank.rank"], 3);
        assert_eq!(v["seed"], 7);
        assert!(v.get("zdiff.raw").is_none());
    }
}
