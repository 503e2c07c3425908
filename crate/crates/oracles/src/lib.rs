//! Test-only reference oracles.
//!
//! Everything here trades speed for transparency: literal loop
//! transcriptions and exhaustive enumerations that the optimized
//! implementations in the main crates are checked against. Nothing in this
//! crate is reachable from production code paths; it is a dev-dependency
//! only.

use ndarray::{Array2, Array3};

/// Result of the reference false-neighbor computation.
#[derive(Debug, Clone)]
pub struct FnnReference {
    pub f_bar: Vec<f64>,
    pub r_m: Vec<f64>,
    pub loss: f64,
}

/// Literal transcription of the batchwise false-neighbor regularizer.
///
/// Every tensor (D, g, sorted/carried distances, jump ratio S, masks R, A,
/// F) is materialized with plain loops exactly as defined: cumulative
/// dimension-indexed distances, column-wise neighbor sorts with the point
/// itself first and remaining ties broken by index, rank-aligned jump
/// ratios, and the K-neighbor batch average. No division guards are
/// applied; callers must supply non-degenerate batches.
pub fn fnn_reference(
    h: &Array2<f64>,
    r_tol: f64,
    a_tol: f64,
    k: usize,
    second_moment: bool,
) -> FnnReference {
    let (b, l) = (h.nrows(), h.ncols());
    assert!(b >= 2 && l >= 2 && k >= 1 && k < b);

    // D[a][p][m] = sqrt(sum_{i<=m} (h[a][i] - h[p][i])^2), fresh inner sum.
    let mut d = Array3::<f64>::zeros((b, b, l));
    for a in 0..b {
        for p in 0..b {
            for m in 0..l {
                let mut acc = 0.0;
                for i in 0..=m {
                    let diff = h[[a, i]] - h[[p, i]];
                    acc += diff * diff;
                }
                d[[a, p, m]] = acc.sqrt();
            }
        }
    }

    // g[a][rank][m]: batch indices sorted by distance from a, self first,
    // ties by smaller index.
    let mut g = Array3::<usize>::zeros((b, b, l));
    for a in 0..b {
        for m in 0..l {
            let mut idx: Vec<usize> = (0..b).collect();
            idx.sort_by(|&p, &q| {
                let key = |j: usize| {
                    if j == a {
                        (-1.0, j)
                    } else {
                        (d[[a, j, m]], j)
                    }
                };
                key(p).partial_cmp(&key(q)).unwrap()
            });
            for (rank, &j) in idx.iter().enumerate() {
                g[[a, rank, m]] = j;
            }
        }
    }

    // Attractor size per latent prefix.
    let mut means = vec![0.0; l];
    for i in 0..l {
        for p in 0..b {
            means[i] += h[[p, i]];
        }
        means[i] /= b as f64;
    }
    let mut r_m = vec![0.0; l];
    for m in 0..l {
        let mut acc = 0.0;
        for p in 0..b {
            for i in 0..=m {
                let diff = h[[p, i]] - means[i];
                acc += diff * diff;
            }
        }
        r_m[m] = (acc / ((m + 1) as f64 * b as f64)).sqrt();
    }

    // Sorted distance, carried-over distance, jump ratio, masks, and the
    // K-neighbor batch average of the combined mask.
    let mut f_bar = vec![0.0; l];
    f_bar[0] = 1.0;
    for m in 1..l {
        let mut count = 0.0;
        for a in 0..b {
            for rank in 1..=k {
                let d_sorted = d[[a, g[[a, rank, m]], m]];
                let d_carried = d[[a, g[[a, rank, m - 1]], m]];
                let s = (d_carried * d_carried - d_sorted * d_sorted) / (d_sorted * d_sorted);
                let r_mask = s >= r_tol;
                let a_mask = d_sorted >= a_tol * r_m[m];
                if r_mask || a_mask {
                    count += 1.0;
                }
            }
        }
        f_bar[m] = count / (k as f64 * b as f64);
    }

    let mut loss = 0.0;
    for m in 1..l {
        let activity = if second_moment {
            let mut s = 0.0;
            for p in 0..b {
                s += h[[p, m]] * h[[p, m]];
            }
            s / b as f64
        } else {
            let mut s = 0.0;
            for p in 0..b {
                s += h[[p, m]];
            }
            let mean = s / b as f64;
            mean * mean
        };
        loss += (1.0 - f_bar[m]) * activity;
    }

    FnnReference { f_bar, r_m, loss }
}

/// DTW distance by exhaustive enumeration of every monotone,
/// boundary-matched warping path. Exponential; only for tiny inputs.
pub fn dtw_exhaustive(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    let cost = |i: usize, j: usize| {
        a.row(i)
            .iter()
            .zip(b.row(j).iter())
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt()
    };
    let (n, m) = (a.nrows(), b.nrows());
    let mut best = f64::INFINITY;
    // Depth-first walk over path continuations from each cell.
    fn walk(
        i: usize,
        j: usize,
        acc: f64,
        n: usize,
        m: usize,
        cost: &dyn Fn(usize, usize) -> f64,
        best: &mut f64,
    ) {
        let acc = acc + cost(i, j);
        if acc >= *best {
            return; // every extension only adds cost
        }
        if i == n - 1 && j == m - 1 {
            *best = acc;
            return;
        }
        if i + 1 < n && j + 1 < m {
            walk(i + 1, j + 1, acc, n, m, cost, best);
        }
        if i + 1 < n {
            walk(i + 1, j, acc, n, m, cost, best);
        }
        if j + 1 < m {
            walk(i, j + 1, acc, n, m, cost, best);
        }
    }
    walk(0, 0, 0.0, n, m, &cost, &mut best);
    best
}

/// Order-1 Wasserstein distance between persistence diagrams by exhaustive
/// matching enumeration. Each point of `a` is matched to an unused point
/// of `b` or to the diagonal; unmatched points of `b` go to the diagonal.
/// Euclidean ground metric.
pub fn wasserstein_exhaustive(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    fn diag_cost(p: (f64, f64)) -> f64 {
        // Nearest diagonal point of (b, d) is ((b+d)/2, (b+d)/2).
        (p.1 - p.0) / std::f64::consts::SQRT_2
    }
    fn pair_cost(p: (f64, f64), q: (f64, f64)) -> f64 {
        ((p.0 - q.0).powi(2) + (p.1 - q.1).powi(2)).sqrt()
    }
    fn recurse(a: &[(f64, f64)], b: &[(f64, f64)], i: usize, used: u32, acc: f64, best: &mut f64) {
        if acc >= *best {
            return;
        }
        if i == a.len() {
            let mut total = acc;
            for (j, q) in b.iter().enumerate() {
                if used & (1 << j) == 0 {
                    total += diag_cost(*q);
                }
            }
            if total < *best {
                *best = total;
            }
            return;
        }
        // Match a[i] with the diagonal.
        recurse(a, b, i + 1, used, acc + diag_cost(a[i]), best);
        // Match a[i] with each unused point of b.
        for j in 0..b.len() {
            if used & (1 << j) == 0 {
                recurse(a, b, i + 1, used | (1 << j), acc + pair_cost(a[i], b[j]), best);
            }
        }
    }
    assert!(b.len() <= 31, "bitmask enumeration limit");
    let mut best = f64::INFINITY;
    recurse(a, b, 0, 0, 0.0, &mut best);
    best
}

/// Principal-component scores via the Gram route: eigendecomposition of
/// X^T X on the centered matrix, an algebraically independent path from a
/// bidiagonalization SVD. Signs follow the largest-entry-positive
/// convention. Returns the score matrix and singular values
/// `sqrt(max(eig, 0))`, descending.
pub fn gram_pca_reference(x: &Array2<f64>, l: usize) -> (Array2<f64>, Vec<f64>) {
    let (n, t) = (x.nrows(), x.ncols());
    assert!(l <= t);
    let mut centered = x.clone();
    for mut col in centered.columns_mut() {
        let mean = col.sum() / n as f64;
        col.mapv_inplace(|v| v - mean);
    }
    let mut gram = nalgebra::DMatrix::<f64>::zeros(t, t);
    for a in 0..t {
        for b in 0..t {
            let mut s = 0.0;
            for i in 0..n {
                s += centered[[i, a]] * centered[[i, b]];
            }
            gram[(a, b)] = s;
        }
    }
    let eig = nalgebra::SymmetricEigen::new(gram);
    let mut order: Vec<usize> = (0..t).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].partial_cmp(&eig.eigenvalues[i]).unwrap());
    let singular: Vec<f64> = order
        .iter()
        .map(|&i| eig.eigenvalues[i].max(0.0).sqrt())
        .collect();
    let mut scores = Array2::zeros((n, l));
    for (out_col, &rank) in order.iter().take(l).enumerate() {
        let mut v: Vec<f64> = (0..t).map(|r| eig.eigenvectors[(r, rank)]).collect();
        let mut max_idx = 0;
        for (j, val) in v.iter().enumerate() {
            if val.abs() > v[max_idx].abs() {
                max_idx = j;
            }
        }
        if v[max_idx] < 0.0 {
            for val in v.iter_mut() {
                *val = -*val;
            }
        }
        for i in 0..n {
            let mut s = 0.0;
            for j in 0..t {
                s += centered[[i, j]] * v[j];
            }
            scores[[i, out_col]] = s;
        }
    }
    (scores, singular)
}

/// Principal-component scores of the row-centered matrix via a dense SVD,
/// with each component's largest-magnitude entry made positive. Returns
/// the N x l score matrix and all min(N, T) singular values, descending.
pub fn svd_scores_reference(x: &Array2<f64>, l: usize) -> (Array2<f64>, Vec<f64>) {
    let (n, t) = (x.nrows(), x.ncols());
    assert!(l <= t);
    let mut centered = x.clone();
    for mut col in centered.columns_mut() {
        let mean = col.sum() / n as f64;
        col.mapv_inplace(|v| v - mean);
    }
    let mat = nalgebra::DMatrix::from_fn(n, t, |i, j| centered[[i, j]]);
    let svd = mat.clone().svd(true, true);
    let v_t = svd.v_t.expect("requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].partial_cmp(&svd.singular_values[i]).unwrap());
    let singular: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();

    let mut scores = Array2::zeros((n, l));
    for (out_col, &rank) in order.iter().take(l).enumerate() {
        let mut v: Vec<f64> = (0..t).map(|j| v_t[(rank, j)]).collect();
        let mut max_idx = 0;
        for (j, val) in v.iter().enumerate() {
            if val.abs() > v[max_idx].abs() {
                max_idx = j;
            }
        }
        if v[max_idx] < 0.0 {
            for val in v.iter_mut() {
                *val = -*val;
            }
        }
        for i in 0..n {
            let mut s = 0.0;
            for j in 0..t {
                s += centered[[i, j]] * v[j];
            }
            scores[[i, out_col]] = s;
        }
    }
    (scores, singular)
}
