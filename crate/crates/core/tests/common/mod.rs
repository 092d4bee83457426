//! Independent brute-force reimplementations used as test oracles. None of
//! these call into the library's numerical code.

#![allow(dead_code)]

use disbench_core::store::EmbeddingTable;

/// Matrix rank by Gaussian elimination with partial pivoting.
pub fn elimination_rank(rows: &[Vec<f64>], tol: f64) -> usize {
    let mut m: Vec<Vec<f64>> = rows.to_vec();
    let n_rows = m.len();
    let n_cols = m.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for col in 0..n_cols {
        let pivot = (rank..n_rows).max_by(|&a, &b| m[a][col].abs().partial_cmp(&m[b][col].abs()).unwrap());
        let Some(p) = pivot else { break };
        if m[p][col].abs() <= tol {
            continue;
        }
        m.swap(rank, p);
        for r in 0..n_rows {
            if r != rank {
                let f = m[r][col] / m[rank][col];
                for c in col..n_cols {
                    m[r][c] -= f * m[rank][c];
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Singular values by one-sided (Hestenes) Jacobi rotations on columns,
/// descending.
pub fn jacobi_singular_values(rows: &[Vec<f64>]) -> Vec<f64> {
    let n = rows.len();
    let d = rows[0].len();
    // work on columns of A (n×d); if d > n transpose so columns are few
    let (mut cols, k): (Vec<Vec<f64>>, usize) = if d <= n {
        ((0..d).map(|j| rows.iter().map(|r| r[j]).collect()).collect(), d)
    } else {
        (rows.to_vec(), n)
    };
    for _ in 0..200 {
        let mut rotated = false;
        for p in 0..k {
            for q in p + 1..k {
                let alpha: f64 = cols[p].iter().map(|v| v * v).sum();
                let beta: f64 = cols[q].iter().map(|v| v * v).sum();
                let gamma: f64 = cols[p].iter().zip(&cols[q]).map(|(a, b)| a * b).sum();
                if gamma.abs() <= 1e-15 * (alpha * beta).sqrt() || gamma == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (cp, cq) = (cols[p].clone(), cols[q].clone());
                for i in 0..cp.len() {
                    cols[p][i] = c * cp[i] - s * cq[i];
                    cols[q][i] = s * cp[i] + c * cq[i];
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<f64> = cols.iter().map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt()).collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    sv
}

/// AUC by comparing every positive with every negative.
pub fn pairwise_auc(scores: &[f64], positive: &[bool]) -> Option<f64> {
    let mut wins = 0.0;
    let mut pairs = 0.0;
    for (i, &si) in scores.iter().enumerate() {
        if !positive[i] {
            continue;
        }
        for (j, &sj) in scores.iter().enumerate() {
            if positive[j] {
                continue;
            }
            pairs += 1.0;
            if si > sj {
                wins += 1.0;
            } else if si == sj {
                wins += 0.5;
            }
        }
    }
    (pairs > 0.0).then(|| wins / pairs)
}

/// Tau-b by enumerating all pairs.
pub fn pairwise_kendall(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len();
    let (mut conc, mut disc, mut tx, mut ty) = (0i64, 0i64, 0i64, 0i64);
    for i in 0..n {
        for j in i + 1..n {
            let dx = xs[i] - xs[j];
            let dy = ys[i] - ys[j];
            if dx == 0.0 && dy == 0.0 {
                continue;
            } else if dx == 0.0 {
                tx += 1;
            } else if dy == 0.0 {
                ty += 1;
            } else if (dx > 0.0) == (dy > 0.0) {
                conc += 1;
            } else {
                disc += 1;
            }
        }
    }
    let n0 = conc + disc;
    ((conc - disc) as f64) / (((n0 + tx) as f64) * ((n0 + ty) as f64)).sqrt()
}

/// Pearson from raw sums: `(nΣxy − ΣxΣy) / sqrt((nΣx² − (Σx)²)(nΣy² − (Σy)²))`.
pub fn direct_pearson(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| x * y).sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let syy: f64 = ys.iter().map(|y| y * y).sum();
    (n * sxy - sx * sy) / ((n * sxx - sx * sx).sqrt() * (n * syy - sy * sy).sqrt())
}

/// Max cosine similarity of each candidate against every reference, with
/// the index of the first reference attaining it.
pub fn brute_force_nearest(candidates: &EmbeddingTable, references: &EmbeddingTable) -> Vec<(usize, f64)> {
    let unit = |row: &[f32]| {
        let v: Vec<f64> = row.iter().map(|&x| x as f64).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.into_iter().map(|x| x / norm).collect::<Vec<f64>>()
    };
    let refs: Vec<Vec<f64>> = (0..references.rows()).map(|i| unit(references.row(i))).collect();
    (0..candidates.rows())
        .map(|c| {
            let q = unit(candidates.row(c));
            let mut best = (0, f64::NEG_INFINITY);
            for (i, r) in refs.iter().enumerate() {
                let s: f64 = q.iter().zip(r).map(|(a, b)| a * b).sum();
                if s > best.1 {
                    best = (i, s);
                }
            }
            best
        })
        .collect()
}

/// Shannon entropy with log base `k`, straight from the definition.
pub fn entropy(p: &[f64], k: usize) -> f64 {
    -p.iter().filter(|&&v| v > 0.0).map(|&v| v * v.ln()).sum::<f64>() / (k as f64).ln()
}

/// Bundle from a dense f64 matrix and per-row factor levels with
/// generated names.
pub fn bundle(x: &ndarray::Array2<f64>, levels: &[Vec<usize>], cards: &[usize]) -> disbench_core::store::DatasetBundle {
    use disbench_core::store::{bind_dataset, FactorTable, Modality};
    let ids: Vec<String> = (0..x.nrows()).map(|i| format!("r{i:05}")).collect();
    let names: Vec<String> = (0..cards.len()).map(|j| format!("f{j}")).collect();
    let vocab: Vec<Vec<String>> = cards.iter().map(|&k| (0..k).map(|l| format!("v{l}")).collect()).collect();
    let values: Vec<usize> = levels.iter().flatten().copied().collect();
    let factors = FactorTable::new(ids.clone(), names, values, vocab).unwrap();
    let table = EmbeddingTable::from_f64(ids, x).unwrap();
    bind_dataset(table, factors, Modality::Image, "test").unwrap()
}

/// Seeded standard-normal matrix.
pub fn gaussian(rows: usize, cols: usize, seed: u64) -> ndarray::Array2<f64> {
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    ndarray::Array2::from_shape_simple_fn((rows, cols), || StandardNormal.sample(&mut rng))
}

pub fn to_rows(x: &ndarray::Array2<f64>) -> Vec<Vec<f64>> {
    x.outer_iter().map(|r| r.to_vec()).collect()
}
