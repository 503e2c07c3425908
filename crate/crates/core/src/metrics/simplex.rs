//! Simplex cross-mapping forecast skill.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::timeseries::PointCloud;

use super::procrustes::variance_profile;

/// Temporal exclusion half-width: samples within this many steps of the
/// query never count as dynamical neighbors.
pub const DEFAULT_THEILER: usize = 10;

/// Cross-mapping forecast score: for each point of `yhat`, the
/// `k = d_E + 1` nearest neighbors (excluding a Theiler window around the
/// query) select rows of `y`; the centroid of their `tau`-advanced images
/// predicts `y` at `i + tau`. The mean squared prediction error is scaled
/// by the dimension-summed variance of `y` and subtracted from one.
pub fn simplex_forecast(
    yhat: &PointCloud,
    y: &PointCloud,
    tau: usize,
    theiler: usize,
) -> Result<f64> {
    if yhat.len() != y.len() {
        return Err(Error::invalid(format!(
            "row counts differ: {} vs {}",
            yhat.len(),
            y.len()
        )));
    }
    let n = yhat.len();
    let k = yhat.dim() + 1;
    if n <= k + tau {
        return Err(Error::insufficient(format!(
            "need N > k + tau = {} + {tau}, got {n}",
            k
        )));
    }
    let denom: f64 = variance_profile(y).sum();
    if denom <= 0.0 {
        return Err(Error::degenerate("reference cloud has no variance"));
    }

    let e = yhat.points();
    let t = y.points();
    let d_y = y.dim();
    let mut dist_buf: Vec<(f64, usize)> = Vec::with_capacity(n);
    let mut total_err = 0.0;
    let mut evaluated = 0usize;
    let mut prediction = vec![0.0; d_y];

    for i in 0..n - tau {
        dist_buf.clear();
        for j in 0..n {
            if j + tau >= n {
                continue;
            }
            if j.abs_diff(i) <= theiler {
                continue;
            }
            let mut d2 = 0.0;
            for c in 0..e.ncols() {
                let diff = e[[i, c]] - e[[j, c]];
                d2 += diff * diff;
            }
            dist_buf.push((d2, j));
        }
        if dist_buf.len() < k {
            continue;
        }
        dist_buf.select_nth_unstable_by(k - 1, |a, b| {
            a.partial_cmp(b).expect("finite distances")
        });
        prediction.iter_mut().for_each(|v| *v = 0.0);
        for &(_, j) in dist_buf.iter().take(k) {
            for c in 0..d_y {
                prediction[c] += t[[j + tau, c]];
            }
        }
        let mut err = 0.0;
        for c in 0..d_y {
            let diff = prediction[c] / k as f64 - t[[i + tau, c]];
            err += diff * diff;
        }
        total_err += err;
        evaluated += 1;
    }
    if evaluated == 0 {
        return Err(Error::insufficient(
            "no points had enough neighbors outside the Theiler window",
        ));
    }
    Ok(1.0 - total_err / evaluated as f64 / denom)
}

/// Shuffle rows of a cloud with a fixed permutation (test support).
pub fn permute_rows(points: &Array2<f64>, perm: &[usize]) -> Array2<f64> {
    let mut out = Array2::zeros(points.dim());
    for (dst, &src) in perm.iter().enumerate() {
        for c in 0..points.ncols() {
            out[[dst, c]] = points[[src, c]];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynsys::{simulate_torus, TORUS_A, TORUS_DT, TORUS_N, TORUS_R};
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn self_prediction_on_dense_torus_is_nearly_perfect() {
        let traj = simulate_torus(TORUS_R, TORUS_A, TORUS_N, TORUS_DT, 3000).unwrap();
        let cloud = traj.states;
        let score = simplex_forecast(&cloud, &cloud, 0, DEFAULT_THEILER).unwrap();
        assert!(score > 0.99, "score {score}");
    }

    #[test]
    fn shuffled_rows_destroy_forecast_skill() {
        // A k-neighbor centroid over random rows predicts with expected
        // squared error (1 + 1/k) times the variance, so the no-skill
        // score sits at -1/k rather than exactly zero.
        let traj = simulate_torus(TORUS_R, TORUS_A, TORUS_N, TORUS_DT, 2000).unwrap();
        let cloud = traj.states;
        let k = cloud.dim() + 1;
        let mut scores = Vec::new();
        for seed in 0..5 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut perm: Vec<usize> = (0..cloud.len()).collect();
            perm.shuffle(&mut rng);
            let shuffled =
                PointCloud::new(permute_rows(cloud.points(), &perm), cloud.dt()).unwrap();
            scores.push(simplex_forecast(&shuffled, &cloud, 1, DEFAULT_THEILER).unwrap());
        }
        let mean = scores.iter().sum::<f64>() / scores.len() as f64;
        let null = -1.0 / k as f64;
        assert!((mean - null).abs() < 0.15, "mean shuffled score {mean} vs null {null}");
        assert!(mean < 0.05, "shuffled rows should have no skill, got {mean}");
    }

    #[test]
    fn too_short_series_errors() {
        let cloud = PointCloud::new(Array2::zeros((5, 2)), 1.0).unwrap();
        assert!(matches!(
            simplex_forecast(&cloud, &cloud, 10, 0),
            Err(Error::InsufficientData { .. })
        ));
    }
}
