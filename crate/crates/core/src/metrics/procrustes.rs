//! Procrustes alignment and the pointwise similarity score.

use nalgebra::DMatrix;
use ndarray::{Array1, Array2, Axis};

use crate::error::{Error, Result};
use crate::timeseries::PointCloud;

/// Result of aligning `yhat` onto `y`: both clouds centered and scaled to
/// unit Frobenius norm, then `yhat` rotated (reflections allowed) and
/// dilated to minimize the residual.
#[derive(Debug, Clone)]
pub struct ProcrustesAlignment {
    /// Orthogonal matrix applied on the right of the centered, normalized
    /// rows of `yhat`.
    pub rotation: Array2<f64>,
    /// Optimal dilation applied after rotation.
    pub scale: f64,
    /// Transformed `yhat`, comparable to `reference`.
    pub aligned: Array2<f64>,
    /// Centered, unit-norm `y`.
    pub reference: Array2<f64>,
    /// Frobenius residual between `aligned` and `reference`.
    pub residual: f64,
}

fn center(points: &Array2<f64>) -> Array2<f64> {
    let mean = points.sum_axis(Axis(0)) / points.nrows() as f64;
    points - &mean
}

fn frobenius(points: &Array2<f64>) -> f64 {
    points.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Center both clouds, normalize each to unit Frobenius norm, and solve
/// the orthogonal Procrustes problem (reflection allowed) with an optimal
/// dilation. A zero-spread `yhat` maps to the origin.
pub fn procrustes_align(yhat: &PointCloud, y: &PointCloud) -> Result<ProcrustesAlignment> {
    if yhat.len() != y.len() {
        return Err(Error::invalid(format!(
            "row counts differ: {} vs {}",
            yhat.len(),
            y.len()
        )));
    }
    if yhat.dim() != y.dim() {
        return Err(Error::invalid(format!(
            "dimensions differ: {} vs {} (pad the reference first)",
            yhat.dim(),
            y.dim()
        )));
    }
    if y.len() < 2 {
        return Err(Error::invalid("need at least 2 points to align"));
    }
    let d = y.dim();

    let mut a = center(yhat.points());
    let mut b = center(y.points());
    let norm_a = frobenius(&a);
    let norm_b = frobenius(&b);
    if norm_b <= 0.0 {
        return Err(Error::degenerate("reference cloud has no spread"));
    }
    b /= norm_b;
    if norm_a > 0.0 {
        a /= norm_a;
    }

    // Cross matrix and its SVD give the optimal rotation; with both
    // clouds at unit norm the optimal dilation is the nuclear norm.
    let mut cross = DMatrix::<f64>::zeros(d, d);
    for i in 0..a.nrows() {
        for p in 0..d {
            let ap = a[[i, p]];
            for q in 0..d {
                cross[(p, q)] += ap * b[[i, q]];
            }
        }
    }
    let svd = cross.svd(true, true);
    let u = svd.u.as_ref().expect("requested");
    let v_t = svd.v_t.as_ref().expect("requested");
    let r_na = u * v_t;
    let scale: f64 = svd.singular_values.iter().sum();

    let rotation = Array2::from_shape_fn((d, d), |(p, q)| r_na[(p, q)]);
    let aligned = a.dot(&rotation) * scale;
    let residual = frobenius(&(&aligned - &b));
    Ok(ProcrustesAlignment {
        rotation,
        scale,
        aligned,
        reference: b,
        residual,
    })
}

/// Pointwise similarity after Procrustes alignment:
/// `1 - ||P yhat - y|| / ||y - mean(y)||` on the normalized clouds.
pub fn s_proc(yhat: &PointCloud, y: &PointCloud) -> Result<f64> {
    let alignment = procrustes_align(yhat, y)?;
    // The reference is unit-norm after centering, so the denominator is 1.
    Ok(1.0 - alignment.residual)
}

/// Population variance per coordinate.
pub fn variance_profile(cloud: &PointCloud) -> Array1<f64> {
    let pts = cloud.points();
    let n = pts.nrows() as f64;
    let mean = pts.sum_axis(Axis(0)) / n;
    let mut var = Array1::zeros(pts.ncols());
    for row in pts.rows() {
        for (c, v) in row.iter().enumerate() {
            let d = v - mean[c];
            var[c] += d * d;
        }
    }
    var / n
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cloud(points: Array2<f64>) -> PointCloud {
        PointCloud::new(points, 1.0).unwrap()
    }

    fn random_cloud(rng: &mut ChaCha8Rng, n: usize, d: usize) -> PointCloud {
        cloud(Array2::from_shape_fn((n, d), |_| rng.gen_range(-1.0..1.0)))
    }

    #[test]
    fn identical_clouds_align_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let y = random_cloud(&mut rng, 200, 3);
        let a = procrustes_align(&y, &y).unwrap();
        assert!(a.residual < 1e-10, "residual {}", a.residual);
        assert!((s_proc(&y, &y).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn mirrored_cloud_aligns_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let y = random_cloud(&mut rng, 150, 3);
        let mut mirrored = y.points().clone();
        for mut row in mirrored.rows_mut() {
            row[0] = -row[0];
        }
        let a = procrustes_align(&cloud(mirrored), &y).unwrap();
        assert!(a.residual < 1e-10, "residual {}", a.residual);
    }

    #[test]
    fn rigid_motion_aligns_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let y = random_cloud(&mut rng, 100, 2);
        let theta: f64 = 0.77;
        let rot = array![[theta.cos(), -theta.sin()], [theta.sin(), theta.cos()]];
        let moved = y.points().dot(&rot) * 3.5 + 2.0;
        let a = procrustes_align(&cloud(moved), &y).unwrap();
        assert!(a.residual < 1e-10, "residual {}", a.residual);
    }

    #[test]
    fn sheared_cloud_does_not_align() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let y = random_cloud(&mut rng, 200, 3);
        let shear = array![[1.0, 0.8, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        let sheared = y.points().dot(&shear);
        let a = procrustes_align(&cloud(sheared), &y).unwrap();
        assert!(a.residual > 0.01, "residual {}", a.residual);
    }

    #[test]
    fn constant_cloud_scores_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let y = random_cloud(&mut rng, 50, 3);
        let constant = cloud(Array2::zeros((50, 3)));
        let score = s_proc(&constant, &y).unwrap();
        assert!(score.abs() < 1e-12, "score {score}");
    }

    #[test]
    fn degenerate_reference_is_an_error() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let yhat = random_cloud(&mut rng, 50, 3);
        let constant = cloud(Array2::from_elem((50, 3), 2.0));
        assert!(matches!(
            s_proc(&yhat, &constant),
            Err(Error::DegenerateReference { .. })
        ));
    }

    #[test]
    fn independent_clouds_score_near_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..20 {
            let a = random_cloud(&mut rng, 500, 3);
            let b = random_cloud(&mut rng, 500, 3);
            let score = s_proc(&a, &b).unwrap();
            assert!(score.abs() < 0.15, "score {score}");
        }
    }
}
