//! Order-1 Wasserstein distance between persistence diagrams and the
//! topological similarity score built on it.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::timeseries::PointCloud;

use super::persistence::{rips_persistence, PersistenceDiagram};

/// Cost of retiring a bar onto the diagonal (Euclidean ground metric).
fn diagonal_cost(bar: (f64, f64)) -> f64 {
    (bar.1 - bar.0) / std::f64::consts::SQRT_2
}

fn pair_cost(a: (f64, f64), b: (f64, f64)) -> f64 {
    ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
}

/// Exact minimum-cost perfect matching on a square cost matrix
/// (Kuhn-Munkres with potentials, O(n^3)). Returns `assign[row] = col`
/// and the total cost.
pub fn hungarian(cost: &Array2<f64>) -> (Vec<usize>, f64) {
    let n = cost.nrows();
    assert_eq!(n, cost.ncols());
    if n == 0 {
        return (Vec::new(), 0.0);
    }
    let mut u = vec![0.0_f64; n + 1];
    let mut v = vec![0.0_f64; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[[i0 - 1, j - 1]] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assign = vec![0usize; n];
    for j in 1..=n {
        if p[j] > 0 {
            assign[p[j] - 1] = j - 1;
        }
    }
    let total = (0..n).map(|i| cost[[i, assign[i]]]).sum();
    (assign, total)
}

/// Order-1 Wasserstein distance between two bar sets of one homology
/// dimension, with matching to the diagonal allowed, solved exactly on the
/// diagonally augmented square problem.
pub fn wasserstein(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    let (n, m) = (a.len(), b.len());
    if n == 0 && m == 0 {
        return 0.0;
    }
    let size = n + m;
    let mut max_cost = 0.0_f64;
    for &p in a {
        max_cost = max_cost.max(diagonal_cost(p));
    }
    for &q in b {
        max_cost = max_cost.max(diagonal_cost(q));
    }
    for &p in a {
        for &q in b {
            max_cost = max_cost.max(pair_cost(p, q));
        }
    }
    let big = (max_cost + 1.0) * (size as f64 + 1.0);
    let mut cost = Array2::from_elem((size, size), 0.0);
    for i in 0..size {
        for j in 0..size {
            cost[[i, j]] = match (i < n, j < m) {
                (true, true) => pair_cost(a[i], b[j]),
                (true, false) => {
                    if j - m == i {
                        diagonal_cost(a[i])
                    } else {
                        big
                    }
                }
                (false, true) => {
                    if i - n == j {
                        diagonal_cost(b[j])
                    } else {
                        big
                    }
                }
                (false, false) => 0.0,
            };
        }
    }
    let (_, total) = hungarian(&cost);
    total
}

/// Wasserstein distance between full diagrams: per-dimension distances
/// summed over H0 and H1.
pub fn diagram_distance(a: &PersistenceDiagram, b: &PersistenceDiagram) -> f64 {
    wasserstein(&a.bars_in_dim(0), &b.bars_in_dim(0))
        + wasserstein(&a.bars_in_dim(1), &b.bars_in_dim(1))
}

/// Distance from a diagram to the empty ("null") diagram: every bar
/// retires to the diagonal.
pub fn distance_to_null(a: &PersistenceDiagram) -> f64 {
    a.bars
        .iter()
        .map(|bar| diagonal_cost((bar.birth, bar.death)))
        .sum()
}

/// Topological similarity `1 - d(P_y, P_yhat) / d(P_y, null)` computed on
/// Rips diagrams of (subsampled) clouds. Callers pass comparable-scale
/// clouds (e.g. Procrustes-aligned).
pub fn s_homol(
    y: &PointCloud,
    yhat: &PointCloud,
    subsample_to: usize,
    seed: u64,
) -> Result<f64> {
    let p_y = rips_persistence(y, None, subsample_to, seed)?;
    let p_yhat = rips_persistence(yhat, None, subsample_to, seed)?;
    let null = distance_to_null(&p_y);
    if null <= 0.0 {
        return Err(Error::degenerate("reference diagram has no features"));
    }
    Ok(1.0 - diagram_distance(&p_y, &p_yhat) / null)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_diagrams_have_zero_distance() {
        let bars = vec![(0.0, 1.0), (0.5, 2.0), (1.0, 1.7)];
        assert_eq!(wasserstein(&bars, &bars), 0.0);
    }

    #[test]
    fn single_bar_to_empty_costs_diagonal_projection() {
        let d = wasserstein(&[(0.0, 2.0)], &[]);
        assert!((d - std::f64::consts::SQRT_2).abs() < 1e-12, "distance {d}");
    }

    #[test]
    fn symmetric() {
        let a = vec![(0.0, 1.0), (0.2, 0.9)];
        let b = vec![(0.1, 1.2)];
        assert!((wasserstein(&a, &b) - wasserstein(&b, &a)).abs() < 1e-12);
    }

    #[test]
    fn prefers_matching_close_bars() {
        // Two nearby bars should match each other, not the diagonal.
        let a = vec![(0.0, 2.0)];
        let b = vec![(0.1, 2.1)];
        let d = wasserstein(&a, &b);
        let expected = pair_cost((0.0, 2.0), (0.1, 2.1));
        assert!((d - expected).abs() < 1e-12, "distance {d}");
    }

    #[test]
    fn hungarian_solves_known_matrix() {
        let cost = ndarray::array![[4.0, 1.0, 3.0], [2.0, 0.0, 5.0], [3.0, 2.0, 2.0]];
        let (assign, total) = hungarian(&cost);
        assert_eq!(total, 5.0);
        // Optimal: row0->col1, row1->col0, row2->col2.
        assert_eq!(assign, vec![1, 0, 2]);
    }
}
