use ndarray::Array2;

use crate::error::{Error, Result};
use crate::linalg::symmetric_eigenvalues;

/// Singular values of `x`, descending, `min(N, D)` of them.
///
/// Computed as square roots of the eigenvalues of the smaller Gram matrix
/// (`XᵀX` or `XXᵀ`); tiny negative eigenvalues from rounding clamp to 0.
pub fn singular_values(x: &Array2<f64>) -> Result<Vec<f64>> {
    if let Some(pos) = x.iter().position(|v| !v.is_finite()) {
        let cols = x.ncols().max(1);
        return Err(Error::NonFinite {
            row: pos / cols,
            col: pos % cols,
        });
    }
    let (n, d) = x.dim();
    let gram = if d <= n { x.t().dot(x) } else { x.dot(&x.t()) };
    let mut values: Vec<f64> = symmetric_eigenvalues(&gram)
        .into_iter()
        .map(|l| l.max(0.0).sqrt())
        .collect();
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(values)
}
