//! Small dense linear-algebra kernels: cyclic Jacobi eigenvalues,
//! Householder QR and Cholesky solves.

use ndarray::{s, Array1, Array2, Axis};

use crate::error::{Error, Result};

const JACOBI_MAX_SWEEPS: usize = 100;

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, descending.
pub fn symmetric_eigenvalues(matrix: &Array2<f64>) -> Vec<f64> {
    let n = matrix.nrows();
    assert_eq!(n, matrix.ncols(), "symmetric_eigenvalues needs a square matrix");
    let mut a = matrix.clone();
    let scale: f64 = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    if scale == 0.0 {
        return vec![0.0; n];
    }
    let floor = f64::EPSILON * f64::EPSILON * scale;
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[[p, q]];
                let negligible = apq.abs() <= floor
                    || apq.abs() <= f64::EPSILON * (a[[p, p]] * a[[q, q]]).abs().sqrt();
                if negligible {
                    continue;
                }
                rotated = true;
                let app = a[[p, p]];
                let aqq = a[[q, q]];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[[k, p]];
                    let akq = a[[k, q]];
                    a[[k, p]] = c * akp - s * akq;
                    a[[k, q]] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[[p, k]];
                    let aqk = a[[q, k]];
                    a[[p, k]] = c * apk - s * aqk;
                    a[[q, k]] = s * apk + c * aqk;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| a[[i, i]]).collect();
    eig.sort_by(|x, y| y.total_cmp(x));
    eig
}

/// Householder QR of an m×n matrix (m ≥ n). Returns the thin Q (m×n) and
/// R (n×n), with the signs of R's diagonal made nonnegative.
pub fn householder_qr(matrix: &Array2<f64>) -> (Array2<f64>, Array2<f64>) {
    let (m, n) = matrix.dim();
    assert!(m >= n, "householder_qr needs rows >= cols");
    let mut r = matrix.clone();
    let mut reflectors: Vec<Array1<f64>> = Vec::with_capacity(n);
    for k in 0..n {
        let x = r.slice(s![k.., k]).to_owned();
        let norm = x.dot(&x).sqrt();
        let mut v = x;
        if norm > 0.0 {
            let alpha = if v[0] >= 0.0 { -norm } else { norm };
            v[0] -= alpha;
            let vnorm = v.dot(&v).sqrt();
            if vnorm > 0.0 {
                v /= vnorm;
            }
        }
        {
            let mut block = r.slice_mut(s![k.., k..]);
            let proj = v.dot(&block);
            for (i, vi) in v.iter().enumerate() {
                let mut row = block.row_mut(i);
                row.scaled_add(-2.0 * vi, &proj);
            }
        }
        reflectors.push(v);
    }
    let mut q = Array2::<f64>::zeros((m, n));
    for i in 0..n {
        q[[i, i]] = 1.0;
    }
    for k in (0..n).rev() {
        let v = &reflectors[k];
        let mut block = q.slice_mut(s![k.., ..]);
        let proj = v.dot(&block);
        for (i, vi) in v.iter().enumerate() {
            let mut row = block.row_mut(i);
            row.scaled_add(-2.0 * vi, &proj);
        }
    }
    let mut r = r.slice(s![..n, ..]).to_owned();
    for i in 0..n {
        for j in 0..i {
            r[[i, j]] = 0.0;
        }
        if r[[i, i]] < 0.0 {
            r.row_mut(i).mapv_inplace(|v| -v);
            q.column_mut(i).mapv_inplace(|v| -v);
        }
    }
    (q, r)
}

/// Solves `a · x = b` for symmetric positive definite `a` (b may have many
/// columns). Fails with [`Error::Singular`] when a pivot collapses.
pub fn cholesky_solve(a: &Array2<f64>, b: &Array2<f64>) -> Result<Array2<f64>> {
    let n = a.nrows();
    if a.ncols() != n || b.nrows() != n {
        return Err(Error::DimensionMismatch("cholesky_solve shapes".into()));
    }
    let max_diag = a.diag().iter().cloned().fold(0.0f64, f64::max);
    let tol = max_diag * 1e-13;
    let mut l = Array2::<f64>::zeros((n, n));
    for j in 0..n {
        let mut d = a[[j, j]];
        for k in 0..j {
            d -= l[[j, k]] * l[[j, k]];
        }
        if d <= tol || !d.is_finite() {
            return Err(Error::Singular);
        }
        let d = d.sqrt();
        l[[j, j]] = d;
        for i in (j + 1)..n {
            let mut v = a[[i, j]];
            for k in 0..j {
                v -= l[[i, k]] * l[[j, k]];
            }
            l[[i, j]] = v / d;
        }
    }
    let mut x = b.clone();
    for mut col in x.axis_iter_mut(Axis(1)) {
        for i in 0..n {
            let mut v = col[i];
            for k in 0..i {
                v -= l[[i, k]] * col[k];
            }
            col[i] = v / l[[i, i]];
        }
        for i in (0..n).rev() {
            let mut v = col[i];
            for k in (i + 1)..n {
                v -= l[[k, i]] * col[k];
            }
            col[i] = v / l[[i, i]];
        }
    }
    Ok(x)
}
