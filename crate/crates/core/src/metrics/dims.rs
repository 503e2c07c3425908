//! Dimensionality scores: variance-profile similarity, effective
//! dimension, and the Grassberger-Procaccia correlation dimension.

use crate::error::{Error, Result};
use crate::timeseries::PointCloud;

use super::neighbors::subsample_indices;

/// Row cap for the correlation-integral estimate.
pub const DEFAULT_CORR_SUBSAMPLE: usize = 3000;
/// Number of logarithmically spaced radii.
pub const CORR_RADII: usize = 32;

/// Variance-profile similarity: both profiles normalized to unit sum and
/// sorted descending, then `1 - ||t - e|| / ||t||`.
pub fn s_dim(var_truth: &[f64], var_embed: &[f64]) -> Result<f64> {
    if var_truth.len() != var_embed.len() {
        return Err(Error::invalid(format!(
            "profile lengths differ: {} vs {} (pad the truth first)",
            var_truth.len(),
            var_embed.len()
        )));
    }
    let prep = |v: &[f64]| -> Vec<f64> {
        let total: f64 = v.iter().sum();
        let mut out: Vec<f64> = if total > 0.0 {
            v.iter().map(|x| x / total).collect()
        } else {
            vec![0.0; v.len()]
        };
        out.sort_by(|a, b| b.partial_cmp(a).expect("finite variances"));
        out
    };
    if var_truth.iter().sum::<f64>() <= 0.0 {
        return Err(Error::degenerate("truth variance profile is all zero"));
    }
    let t = prep(var_truth);
    let e = prep(var_embed);
    let diff: f64 = t
        .iter()
        .zip(&e)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    let norm: f64 = t.iter().map(|a| a * a).sum::<f64>().sqrt();
    Ok(1.0 - diff / norm)
}

/// Count of units holding more than 1% of the variance, plus the
/// participation ratio `(sum v)^2 / sum v^2`.
pub fn effective_dimension(var_embed: &[f64]) -> Result<(usize, f64)> {
    if var_embed.iter().any(|v| *v < 0.0) {
        return Err(Error::invalid("variances must be non-negative"));
    }
    let total: f64 = var_embed.iter().sum();
    if total <= 0.0 {
        return Err(Error::degenerate("variance profile is all zero"));
    }
    let count = var_embed.iter().filter(|&&v| v / total > 0.01).count();
    let sq: f64 = var_embed.iter().map(|v| v * v).sum();
    Ok((count, total * total / sq))
}

/// Symmetric relative agreement of two correlation dimensions:
/// `1 - |a - b| / (|a| + |b|)`.
pub fn s_corr(c_truth: f64, c_embed: f64) -> Result<f64> {
    if !(c_truth > 0.0) || !(c_embed > 0.0) {
        return Err(Error::invalid(format!(
            "correlation dimensions must be positive, got {c_truth} and {c_embed}"
        )));
    }
    Ok(1.0 - (c_truth - c_embed).abs() / (c_truth.abs() + c_embed.abs()))
}

/// Details of one correlation-dimension estimate.
#[derive(Debug, Clone)]
pub struct CorrelationDimension {
    pub dimension: f64,
    pub rows_used: usize,
    pub subsampled: bool,
    /// Inclusive index range of the radii used for the least-squares fit.
    pub fit_window: (usize, usize),
}

/// Grassberger-Procaccia estimate: the correlation integral C(r) is
/// evaluated at `CORR_RADII` log-spaced radii between the 1st and 50th
/// percentile of pairwise distances, and the dimension is the
/// least-squares slope of log C against log r over the middle half of the
/// radii. Clouds above `max_rows` are subsampled with the given seed.
pub fn correlation_dimension(
    cloud: &PointCloud,
    max_rows: usize,
    seed: u64,
) -> Result<CorrelationDimension> {
    if cloud.len() < 100 {
        return Err(Error::insufficient(format!(
            "correlation dimension needs >= 100 points, got {}",
            cloud.len()
        )));
    }
    let idx = subsample_indices(cloud.len(), max_rows.max(100), seed);
    let subsampled = idx.len() < cloud.len();
    let pts = cloud.points();
    let d = pts.ncols();
    let n = idx.len();

    let mut dists = Vec::with_capacity(n * (n - 1) / 2);
    for a in 0..n {
        for b in (a + 1)..n {
            let (ia, ib) = (idx[a], idx[b]);
            let mut acc = 0.0;
            for c in 0..d {
                let diff = pts[[ia, c]] - pts[[ib, c]];
                acc += diff * diff;
            }
            dists.push(acc.sqrt());
        }
    }
    dists.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite distances"));
    let pairs = dists.len();
    let quantile = |q: f64| -> f64 {
        let pos = ((pairs - 1) as f64 * q).round() as usize;
        dists[pos]
    };
    let mut r_lo = quantile(0.01);
    let r_hi = quantile(0.50);
    if r_lo <= 0.0 {
        // Duplicate-heavy clouds: start at the smallest positive distance.
        r_lo = dists
            .iter()
            .copied()
            .find(|&v| v > 0.0)
            .ok_or_else(|| Error::degenerate("all points identical"))?;
    }
    if r_hi <= r_lo {
        return Err(Error::degenerate("pairwise distances have no spread"));
    }

    let log_lo = r_lo.ln();
    let log_hi = r_hi.ln();
    let mut log_r = Vec::with_capacity(CORR_RADII);
    let mut log_c = Vec::with_capacity(CORR_RADII);
    for k in 0..CORR_RADII {
        let lr = log_lo + (log_hi - log_lo) * k as f64 / (CORR_RADII - 1) as f64;
        let r = lr.exp();
        // C(r): fraction of pairs strictly closer than r.
        let count = dists.partition_point(|&v| v < r);
        if count > 0 {
            log_r.push(lr);
            log_c.push(((count as f64) / pairs as f64).ln());
        } else {
            log_r.push(lr);
            log_c.push(f64::NAN);
        }
    }

    // Fit over the lower half of the radii: the upper radii approach the
    // median pairwise distance where the correlation integral saturates
    // on bounded sets and the slope biases low.
    let lo = 0;
    let hi = CORR_RADII / 2; // exclusive
    let xs: Vec<f64> = (lo..hi).map(|k| log_r[k]).collect();
    let ys: Vec<f64> = (lo..hi).map(|k| log_c[k]).collect();
    if ys.iter().any(|v| !v.is_finite()) {
        return Err(Error::numerical("empty correlation integral in fit window"));
    }
    let xm = xs.iter().sum::<f64>() / xs.len() as f64;
    let ym = ys.iter().sum::<f64>() / ys.len() as f64;
    let num: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xm) * (y - ym)).sum();
    let den: f64 = xs.iter().map(|x| (x - xm) * (x - xm)).sum();
    Ok(CorrelationDimension {
        dimension: num / den,
        rows_used: n,
        subsampled,
        fit_window: (lo, hi - 1),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn s_dim_identical_profiles() {
        let v = [0.5, 0.3, 0.2, 0.0];
        assert_eq!(s_dim(&v, &v).unwrap(), 1.0);
    }

    #[test]
    fn s_dim_closed_form_case() {
        // Truth: three equal units of ten; embed: uniform over ten.
        let truth = [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        let embed = [0.1; 10];
        let expect = {
            let diff = (3.0 * (1.0 / 3.0 - 0.1_f64).powi(2) + 7.0 * 0.01).sqrt();
            let norm = (3.0 * (1.0 / 3.0_f64).powi(2)).sqrt();
            1.0 - diff / norm
        };
        let got = s_dim(&truth, &embed).unwrap();
        assert!((got - expect).abs() < 1e-12, "{got} vs {expect}");
    }

    #[test]
    fn s_dim_is_permutation_invariant() {
        let truth = [0.6, 0.3, 0.1, 0.0];
        let a = [0.2, 0.5, 0.05, 0.25];
        let b = [0.5, 0.25, 0.2, 0.05];
        assert_eq!(s_dim(&truth, &a).unwrap(), s_dim(&truth, &b).unwrap());
    }

    #[test]
    fn s_dim_rejects_zero_truth() {
        assert!(matches!(
            s_dim(&[0.0, 0.0], &[1.0, 0.0]),
            Err(Error::DegenerateReference { .. })
        ));
    }

    #[test]
    fn effective_dimension_cases() {
        assert_eq!(effective_dimension(&[2.0, 0.0, 0.0]).unwrap(), (1, 1.0));
        let (count, pr) = effective_dimension(&[1.0, 1.0, 1.0, 0.0]).unwrap();
        assert_eq!(count, 3);
        assert!((pr - 3.0).abs() < 1e-12);
    }

    #[test]
    fn s_corr_cases() {
        assert_eq!(s_corr(2.0, 2.0).unwrap(), 1.0);
        assert!((s_corr(2.0, 1.0).unwrap() - (1.0 - 1.0 / 3.0)).abs() < 1e-12);
        assert!(s_corr(2.0, 1e-12).unwrap() < 1e-6);
        assert!(s_corr(2.0, 0.0).is_err());
        assert!(s_corr(-1.0, 2.0).is_err());
    }

    #[test]
    fn unit_square_dimension_is_two() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let pts = Array2::from_shape_fn((2000, 2), |_| rng.gen_range(0.0..1.0));
        let cloud = PointCloud::new(pts, 1.0).unwrap();
        let c = correlation_dimension(&cloud, DEFAULT_CORR_SUBSAMPLE, 0).unwrap();
        assert!(
            (c.dimension - 2.0).abs() <= 0.15,
            "dimension {}",
            c.dimension
        );
    }

    #[test]
    fn circle_dimension_is_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let mut pts = Array2::zeros((2000, 2));
        for i in 0..2000 {
            let theta: f64 = rng.gen_range(0.0..(2.0 * std::f64::consts::PI));
            pts[[i, 0]] = theta.cos();
            pts[[i, 1]] = theta.sin();
        }
        let cloud = PointCloud::new(pts, 1.0).unwrap();
        let c = correlation_dimension(&cloud, DEFAULT_CORR_SUBSAMPLE, 0).unwrap();
        assert!(
            (c.dimension - 1.0).abs() <= 0.1,
            "dimension {}",
            c.dimension
        );
    }

    #[test]
    fn dimension_is_invariant_to_rigid_motion_and_scale() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let mut pts = Array2::zeros((1500, 2));
        for i in 0..1500 {
            let theta: f64 = rng.gen_range(0.0..(2.0 * std::f64::consts::PI));
            pts[[i, 0]] = theta.cos();
            pts[[i, 1]] = theta.sin();
        }
        let base = correlation_dimension(&PointCloud::new(pts.clone(), 1.0).unwrap(), 3000, 0)
            .unwrap()
            .dimension;
        let angle: f64 = 0.63;
        let rot = ndarray::array![
            [angle.cos(), -angle.sin()],
            [angle.sin(), angle.cos()]
        ];
        let moved = pts.dot(&rot) * 37.0 + 5.0;
        let t = correlation_dimension(&PointCloud::new(moved, 1.0).unwrap(), 3000, 0)
            .unwrap()
            .dimension;
        assert!((base - t).abs() < 1e-9, "{base} vs {t}");
    }

    #[test]
    fn small_clouds_are_rejected() {
        let pts = Array2::zeros((50, 2));
        assert!(matches!(
            correlation_dimension(&PointCloud::new(pts, 1.0).unwrap(), 3000, 0),
            Err(Error::InsufficientData { .. })
        ));
    }
}
