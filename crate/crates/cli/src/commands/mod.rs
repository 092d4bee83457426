pub mod analysis;
pub mod compose;
pub mod filters;
pub mod metrics;
pub mod synth;

use anyhow::{anyhow, Result};
use disbench_core::store::FactorTable;

use crate::usage;

/// Indices of the named factors, or of every factor when `names` is empty.
pub fn factor_indices(factors: &FactorTable, names: &[String]) -> Result<Vec<usize>> {
    if names.is_empty() {
        return Ok((0..factors.num_factors()).collect());
    }
    names
        .iter()
        .map(|n| {
            factors
                .factor_index(n)
                .ok_or_else(|| anyhow!("no factor named {n:?}; have {:?}", factors.factor_names()))
        })
        .collect()
}

/// Row label formed by joining the labels of `which` factors with a space,
/// e.g. `"red cat"`.
pub fn joint_label(factors: &FactorTable, row: usize, which: &[usize]) -> String {
    which
        .iter()
        .map(|&j| factors.label(row, j))
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn check_fraction(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(usage(format!("--{name} must lie strictly between 0 and 1, got {v}")))
    }
}

pub fn check_positive(name: &str, v: usize) -> Result<()> {
    if v == 0 {
        Err(usage(format!("--{name} must be at least 1")))
    } else {
        Ok(())
    }
}
