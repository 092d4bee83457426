use crate::error::{Error, Result};

/// Entropy of `p` in base `k`, with `0 · log 0 = 0`.
///
/// A distribution spread evenly over `k` outcomes returns exactly 1.
pub fn entropy_base_k(p: &[f64], k: usize) -> Result<f64> {
    if k < 2 {
        return Err(Error::Invalid(format!("entropy base must be >= 2, got {k}")));
    }
    if p.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
        return Err(Error::Invalid("probabilities must be finite and nonnegative".into()));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::Invalid(format!("probabilities sum to {total}, not 1")));
    }
    let support: Vec<f64> = p.iter().copied().filter(|&v| v > 0.0).collect();
    if support.len() <= 1 {
        return Ok(0.0);
    }
    if support.len() == k && support.iter().all(|&v| v == support[0]) {
        return Ok(1.0);
    }
    let ln_k = (k as f64).ln();
    let h: f64 = support.iter().map(|&v| -v * v.ln()).sum::<f64>() / ln_k;
    Ok(h.clamp(0.0, 1.0))
}
