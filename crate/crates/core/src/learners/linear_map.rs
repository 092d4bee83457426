use ndarray::{Array1, Array2, ArrayView2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Serialize, Serializer};

use super::TrainConfig;
use crate::error::{Error, Result};
use crate::linalg::cholesky_solve;

const TIED_INIT_SCALE: f64 = 1e-3;
const ARMIJO: f64 = 1e-4;

/// Multi-output linear map `X ↦ X·Wᵀ`, or for the tied variant the
/// two-layer map `X ↦ (X·Wᵀ)·W` whose second layer is the transpose of the
/// first.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearMap {
    /// P×D for the single-layer map; hidden×D first layer when tied.
    pub weights: Array2<f64>,
    pub bias: Option<Array1<f64>>,
    pub tied: bool,
    pub hidden_dim: Option<usize>,
}

impl LinearMap {
    /// The end-to-end P×D matrix.
    pub fn effective(&self) -> Array2<f64> {
        if self.tied {
            self.weights.t().dot(&self.weights)
        } else {
            self.weights.clone()
        }
    }

    pub fn predict(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        if x.ncols() != self.weights.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "map expects {} inputs, got {}",
                self.weights.ncols(),
                x.ncols()
            )));
        }
        let mut out = if self.tied {
            x.dot(&self.weights.t()).dot(&self.weights)
        } else {
            x.dot(&self.weights.t())
        };
        if let Some(b) = &self.bias {
            out += b;
        }
        Ok(out)
    }
}

impl Serialize for LinearMap {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Json {
            weights: Vec<Vec<f64>>,
            bias: Option<Vec<f64>>,
            tied: bool,
            hidden_dim: Option<usize>,
        }
        Json {
            weights: self.weights.outer_iter().map(|r| r.to_vec()).collect(),
            bias: self.bias.as_ref().map(|b| b.to_vec()),
            tied: self.tied,
            hidden_dim: self.hidden_dim,
        }
        .serialize(serializer)
    }
}

/// Mean squared error over every element.
pub(crate) fn mse(pred: &Array2<f64>, target: ArrayView2<f64>) -> f64 {
    let n = pred.len().max(1) as f64;
    pred.iter()
        .zip(target.iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / n
}

/// Fits `Y ≈ map(X)` and returns the map with its training MSE.
///
/// The single-layer map minimizes `‖XWᵀ − Y‖²/N + ridge·‖W‖²` in closed
/// form through the normal equations. The tied map minimizes the plain
/// squared error by gradient descent with backtracking line search, from a
/// small seeded random start (zero is a stationary point of the tied
/// objective). The tied map requires `P = D`.
pub fn fit_linear_map(
    x: ArrayView2<f64>,
    y: ArrayView2<f64>,
    ridge: f64,
    tied: bool,
    hidden: Option<usize>,
    cfg: &TrainConfig,
) -> Result<(LinearMap, f64)> {
    let (n, d) = x.dim();
    if n < 2 {
        return Err(Error::Invalid("linear map needs at least 2 samples".into()));
    }
    if y.nrows() != n {
        return Err(Error::DimensionMismatch(format!("{} targets for {n} inputs", y.nrows())));
    }
    if !(ridge >= 0.0) {
        return Err(Error::Invalid("ridge must be >= 0".into()));
    }
    let map = if tied {
        fit_tied(x, y, hidden.unwrap_or(d), cfg)?
    } else {
        let mut gram = x.t().dot(&x) / n as f64;
        for i in 0..d {
            gram[[i, i]] += ridge;
        }
        let cross = x.t().dot(&y) / n as f64;
        let wt = cholesky_solve(&gram, &cross)?;
        LinearMap {
            weights: wt.reversed_axes(),
            bias: None,
            tied: false,
            hidden_dim: None,
        }
    };
    let train_mse = mse(&map.predict(x)?, y);
    Ok((map, train_mse))
}

fn fit_tied(x: ArrayView2<f64>, y: ArrayView2<f64>, hidden: usize, cfg: &TrainConfig) -> Result<LinearMap> {
    cfg.validate()?;
    let (n, d) = x.dim();
    if y.ncols() != d {
        return Err(Error::DimensionMismatch(format!(
            "tied map needs output width {d} equal to input width, got {}",
            y.ncols()
        )));
    }
    if hidden == 0 {
        return Err(Error::Invalid("hidden width must be >= 1".into()));
    }
    let scale = 1.0 / (n * d) as f64;
    let loss_of = |w: &Array2<f64>| -> f64 {
        let pred = x.dot(&w.t()).dot(w);
        pred.iter()
            .zip(y.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            * scale
    };

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let init = TIED_INIT_SCALE / (d as f64).sqrt();
    let mut w = Array2::from_shape_simple_fn((hidden, d), || {
        let z: f64 = StandardNormal.sample(&mut rng);
        z * init
    });
    let mut loss = loss_of(&w);
    let mut step = cfg.learning_rate;
    for epoch in 0..cfg.max_epochs {
        if !loss.is_finite() {
            return Err(Error::Diverged { epoch });
        }
        // dL/dM = 2 Xᵀ(XM − Y)/(N·D), dL/dW = W (G + Gᵀ)
        let m = w.t().dot(&w);
        let residual = x.dot(&m) - y;
        let g = x.t().dot(&residual) * (2.0 * scale);
        let grad = w.dot(&(&g + &g.t()));
        let grad_sq: f64 = grad.iter().map(|v| v * v).sum();
        if grad_sq == 0.0 {
            break;
        }
        step *= 2.0;
        let mut accepted = None;
        while step > 1e-30 {
            let candidate = &w - &(&grad * step);
            let candidate_loss = loss_of(&candidate);
            if candidate_loss <= loss - ARMIJO * step * grad_sq {
                accepted = Some((candidate, candidate_loss));
                break;
            }
            step *= 0.5;
        }
        let Some((next, next_loss)) = accepted else {
            break;
        };
        let improvement = loss - next_loss;
        w = next;
        let converged = improvement < cfg.tolerance * loss.abs().max(f64::MIN_POSITIVE);
        loss = next_loss;
        if converged {
            break;
        }
    }
    Ok(LinearMap {
        weights: w,
        bias: None,
        tied: true,
        hidden_dim: Some(hidden),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;
    use rand::SeedableRng;

    fn gaussian(rows: usize, cols: usize, seed: u64) -> Array2<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Array2::from_shape_simple_fn((rows, cols), || StandardNormal.sample(&mut rng))
    }

    #[test]
    fn identity_target_recovers_identity() {
        let x = gaussian(30, 4, 1);
        let (map, train) = fit_linear_map(x.view(), x.view(), 0.0, false, None, &TrainConfig::default()).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((map.weights[[i, j]] - want).abs() < 1e-8);
            }
        }
        assert!(train < 1e-20);
    }

    #[test]
    fn recovers_fixed_matrix() {
        let x = gaussian(40, 5, 2);
        let a = gaussian(3, 5, 3);
        let y = x.dot(&a.t());
        let (map, _) = fit_linear_map(x.view(), y.view(), 0.0, false, None, &TrainConfig::default()).unwrap();
        for (w, t) in map.weights.iter().zip(a.iter()) {
            assert!((w - t).abs() < 1e-6);
        }
    }

    #[test]
    fn singular_without_ridge() {
        let mut x = gaussian(10, 3, 4);
        let col = x.column(0).to_owned();
        x.column_mut(2).assign(&col);
        let err = fit_linear_map(x.view(), x.view(), 0.0, false, None, &TrainConfig::default()).unwrap_err();
        assert!(matches!(err, Error::Singular));
        assert!(fit_linear_map(x.view(), x.view(), 1e-3, false, None, &TrainConfig::default()).is_ok());
    }

    #[test]
    fn tied_identity_converges() {
        let x = gaussian(50, 4, 5);
        let cfg = TrainConfig {
            max_epochs: 5000,
            ..TrainConfig::default()
        };
        let (map, train) = fit_linear_map(x.view(), x.view(), 0.0, true, Some(4), &cfg).unwrap();
        assert!(map.tied);
        assert!(train <= 1e-6, "train mse {train}");
        let eff = map.effective();
        assert_eq!(eff, eff.t());
    }
}
