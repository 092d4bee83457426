//! Helpers for driving the binary plus brute-force oracles that do not call
//! into the library's numerical code.

#![allow(dead_code)]

use std::path::Path;
use std::process::{Command, Output};

use disbench_core::store::{encode_embeddings, EmbeddingTable};
use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn disbench(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_disbench"))
        .current_dir(dir)
        .args(args)
        .env_remove("DISBENCH_THREADS")
        .output()
        .expect("binary runs")
}

/// Runs and panics with stderr unless the exit code is 0.
pub fn ok(dir: &Path, args: &[&str]) -> Output {
    let out = disbench(dir, args);
    assert!(
        out.status.success(),
        "disbench {args:?} exited {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

pub fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

pub fn write_table(path: &Path, ids: Vec<String>, x: &Array2<f64>) {
    let table = EmbeddingTable::from_f64(ids, x).unwrap();
    std::fs::write(path, encode_embeddings(&table).unwrap()).unwrap();
}

pub fn gaussian(rows: usize, cols: usize, seed: u64) -> Array2<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Array2::from_shape_simple_fn((rows, cols), || StandardNormal.sample(&mut rng))
}

pub fn ids(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i:04}")).collect()
}

/// Factorized one-hot code of attribute `a` and object `o` with `a_levels`
/// attribute dimensions first.
pub fn one_hot(a_levels: usize, o_levels: usize, a: Option<usize>, o: Option<usize>) -> Vec<f64> {
    let mut v = vec![0.0; a_levels + o_levels];
    if let Some(a) = a {
        v[a] = 1.0;
    }
    if let Some(o) = o {
        v[a_levels + o] = 1.0;
    }
    v
}

/// Matrix rank by Gaussian elimination with partial pivoting.
pub fn elimination_rank(rows: &[Vec<f64>], tol: f64) -> usize {
    let mut m: Vec<Vec<f64>> = rows.to_vec();
    let n_rows = m.len();
    let n_cols = m.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for col in 0..n_cols {
        let Some(p) = (rank..n_rows).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs())) else {
            break;
        };
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

/// AUC by comparing every positive with every negative.
pub fn pairwise_auc(scores: &[f64], positive: &[bool]) -> Option<f64> {
    let (mut wins, mut pairs) = (0.0, 0.0);
    for (&si, _) in scores.iter().zip(positive).filter(|(_, &p)| p) {
        for (&sj, _) in scores.iter().zip(positive).filter(|(_, &p)| !p) {
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
            let (dx, dy) = (xs[i] - xs[j], ys[i] - ys[j]);
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
    (conc - disc) as f64 / (((n0 + tx) as f64) * ((n0 + ty) as f64)).sqrt()
}

/// Pearson straight from centered sums.
pub fn direct_pearson(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    sxy / (sxx * syy).sqrt()
}

/// Highest cosine similarity of each candidate over all references and the
/// first reference attaining it.
pub fn brute_force_nearest(candidates: &Array2<f64>, references: &Array2<f64>) -> Vec<(usize, f64)> {
    let unit = |row: ndarray::ArrayView1<f64>| {
        let v: Vec<f64> = row.iter().map(|&x| x as f32 as f64).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.into_iter().map(|x| x / norm).collect::<Vec<f64>>()
    };
    let refs: Vec<Vec<f64>> = references.outer_iter().map(unit).collect();
    candidates
        .outer_iter()
        .map(|c| {
            let q = unit(c);
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
