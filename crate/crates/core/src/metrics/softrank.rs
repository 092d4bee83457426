use serde::Serialize;

use crate::error::{Error, Result};
use crate::learners::singular_values;
use crate::store::EmbeddingTable;

pub const DEFAULT_SOFT_RANK_THRESHOLD: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SoftRankReport {
    pub singular_values: Vec<f64>,
    pub threshold: f64,
    pub soft_rank: usize,
    pub relative: f64,
}

/// Number of singular values of the raw (uncentered) matrix whose ratio to
/// the largest exceeds `threshold`, and that count over the width D.
pub fn soft_rank(table: &EmbeddingTable, threshold: f64) -> Result<SoftRankReport> {
    if table.rows() < 2 {
        return Err(Error::Invalid("soft rank needs at least 2 rows".into()));
    }
    if !(threshold > 0.0) {
        return Err(Error::Invalid("soft-rank threshold must be positive".into()));
    }
    // id order, so the Gram sums do not depend on file row order
    let mut order: Vec<usize> = (0..table.rows()).collect();
    order.sort_by(|&a, &b| table.ids()[a].cmp(&table.ids()[b]));
    let x = table.select_rows(&order)?.to_array();
    let values = singular_values(&x)?;
    let top = values[0];
    if top <= 0.0 {
        return Err(Error::ZeroMatrix);
    }
    let soft_rank = values.iter().filter(|&&s| s / top > threshold).count();
    Ok(SoftRankReport {
        relative: soft_rank as f64 / table.cols() as f64,
        singular_values: values,
        threshold,
        soft_rank,
    })
}
