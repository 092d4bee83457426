use serde::Serialize;

use super::{column, ModelRecord};
use crate::error::{Error, Result};

fn check_pair(xs: &[f64], ys: &[f64]) -> Result<()> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch(format!("{} x values, {} y values", xs.len(), ys.len())));
    }
    if xs.len() < 3 {
        return Err(Error::Invalid("correlation needs at least 3 points".into()));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::Invalid("correlation inputs must be finite".into()));
    }
    Ok(())
}

/// Sample Pearson correlation.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    check_pair(xs, ys)?;
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Invalid("zero variance".into()));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Sum of `t(t-1)/2` over runs of equal values in a sorted sequence.
fn tied_pairs<T: PartialEq>(sorted: &[T]) -> u64 {
    let mut total = 0;
    let mut run = 1u64;
    for w in sorted.windows(2) {
        if w[0] == w[1] {
            run += 1;
        } else {
            total += run * (run - 1) / 2;
            run = 1;
        }
    }
    total + run * (run - 1) / 2
}

/// Sorts `v` and returns the number of strictly inverted pairs.
fn merge_count(v: &mut [f64], buf: &mut Vec<f64>) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut swaps = merge_count(&mut v[..mid], buf) + merge_count(&mut v[mid..], buf);
    buf.clear();
    let (mut i, mut j) = (0, mid);
    while i < mid && j < n {
        if v[j] < v[i] {
            swaps += (mid - i) as u64;
            buf.push(v[j]);
            j += 1;
        } else {
            buf.push(v[i]);
            i += 1;
        }
    }
    buf.extend_from_slice(&v[i..mid]);
    buf.extend_from_slice(&v[j..n]);
    v.copy_from_slice(buf);
    swaps
}

/// Kendall tau-b in O(n log n).
pub fn kendall_tau(xs: &[f64], ys: &[f64]) -> Result<f64> {
    check_pair(xs, ys)?;
    let n = xs.len() as u64;
    // adding 0.0 turns -0.0 into 0.0 so the sort keeps tied groups together
    let mut pairs: Vec<(f64, f64)> = xs.iter().zip(ys).map(|(x, y)| (x + 0.0, y + 0.0)).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));

    let total = n * (n - 1) / 2;
    let x_ties = tied_pairs(&pairs.iter().map(|p| p.0).collect::<Vec<_>>());
    let joint_ties = tied_pairs(&pairs);
    let mut y_sorted: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let swaps = merge_count(&mut y_sorted, &mut Vec::with_capacity(pairs.len()));
    let y_ties = tied_pairs(&y_sorted);

    if x_ties == total || y_ties == total {
        return Err(Error::Invalid("all values tied".into()));
    }
    let concordant_minus_discordant = total as i64 - x_ties as i64 - y_ties as i64 + joint_ties as i64 - 2 * swaps as i64;
    let denom = ((total - x_ties) as f64 * (total - y_ties) as f64).sqrt();
    Ok((concordant_minus_discordant as f64 / denom).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Correlation {
    pub metric: String,
    pub target: String,
    pub n: usize,
    pub pearson: f64,
    pub kendall_tau: f64,
}

/// Pearson and Kendall correlation of each metric with `target` across
/// the records.
pub fn correlate(records: &[ModelRecord], metrics: &[String], target: &str) -> Result<Vec<Correlation>> {
    let ys = column(records, target)?;
    metrics
        .iter()
        .map(|m| {
            let xs = column(records, m)?;
            Ok(Correlation {
                metric: m.clone(),
                target: target.to_string(),
                n: xs.len(),
                pearson: pearson(&xs, &ys)?,
                kendall_tau: kendall_tau(&xs, &ys)?,
            })
        })
        .collect()
}
