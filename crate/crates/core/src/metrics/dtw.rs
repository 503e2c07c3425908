//! Dynamic time warping over multivariate sequences.

use ndarray::Array2;

use crate::error::{Error, Result};

fn local_cost(a: &Array2<f64>, i: usize, b: &Array2<f64>, j: usize) -> f64 {
    let mut acc = 0.0;
    for c in 0..a.ncols() {
        let d = a[[i, c]] - b[[j, c]];
        acc += d * d;
    }
    acc.sqrt()
}

/// Classic boundary-matched DTW with Euclidean local cost and a full
/// window, computed with two rolling rows.
pub fn dtw_distance(a: &Array2<f64>, b: &Array2<f64>) -> Result<f64> {
    if a.nrows() == 0 || b.nrows() == 0 {
        return Err(Error::invalid("dtw needs non-empty sequences"));
    }
    if a.ncols() != b.ncols() {
        return Err(Error::shape(format!(
            "dtw dimensions differ: {} vs {}",
            a.ncols(),
            b.ncols()
        )));
    }
    let (n, m) = (a.nrows(), b.nrows());
    let mut prev = vec![f64::INFINITY; m + 1];
    let mut cur = vec![f64::INFINITY; m + 1];
    prev[0] = 0.0;
    for i in 1..=n {
        cur[0] = f64::INFINITY;
        for j in 1..=m {
            let cost = local_cost(a, i - 1, b, j - 1);
            cur[j] = cost + prev[j].min(cur[j - 1]).min(prev[j - 1]);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    Ok(prev[m])
}

/// DTW similarity of aligned clouds: `1 - DTW(a, y) / DTW(c, y)` where `c`
/// is the constant path at y's centroid. Callers pass Procrustes-aligned,
/// centered inputs; the null path is then the origin.
pub fn s_dtw_aligned(aligned: &Array2<f64>, reference: &Array2<f64>) -> Result<f64> {
    let null_cost: f64 = reference
        .rows()
        .into_iter()
        .map(|r| r.iter().map(|v| v * v).sum::<f64>().sqrt())
        .sum();
    if null_cost <= 0.0 {
        return Err(Error::degenerate("reference cloud has no spread"));
    }
    Ok(1.0 - dtw_distance(aligned, reference)? / null_cost)
}
