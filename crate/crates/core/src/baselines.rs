//! Classical embedding baselines: eigen-time-delay coordinates, tICA, lag
//! embeddings, and the Kennel false-nearest-neighbor dimension heuristic.

use nalgebra::{DMatrix, DVector};
use ndarray::{Array1, Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fnn::{false_neighbor_fractions, ActivityKind, FnnConfig, LatentBatch};
use crate::timeseries::{HankelMatrix, PointCloud, TimeSeries};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmbeddingKind {
    Etd,
    Tica,
}

/// Affine projection learned by a linear baseline: subtract `center`, then
/// right-multiply by `projection` (T x L). Columns are ordered by
/// decreasing singular value (ETD) or generalized eigenvalue (tICA).
#[derive(Debug, Clone)]
pub struct LinearEmbedding {
    pub projection: Array2<f64>,
    pub center: Array1<f64>,
    pub kind: EmbeddingKind,
    /// Singular values (ETD, all of them) or kept eigenvalues (tICA).
    pub values: Vec<f64>,
}

impl LinearEmbedding {
    pub fn apply(&self, rows: &Array2<f64>) -> Array2<f64> {
        (rows - &self.center).dot(&self.projection)
    }

    /// Number of values above `rel_tol` times the largest.
    pub fn significant_rank(&self, rel_tol: f64) -> usize {
        let max = self.values.first().copied().unwrap_or(0.0);
        if max <= 0.0 {
            return 0;
        }
        self.values.iter().filter(|&&v| v > rel_tol * max).count()
    }

    pub fn to_json(&self) -> Result<String> {
        let mirror = LinearEmbeddingJson {
            kind: self.kind,
            rows: self.projection.nrows(),
            cols: self.projection.ncols(),
            projection: self.projection.iter().copied().collect(),
            center: self.center.to_vec(),
            values: self.values.clone(),
        };
        Ok(serde_json::to_string_pretty(&mirror)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let mirror: LinearEmbeddingJson = serde_json::from_str(text)?;
        if mirror.projection.len() != mirror.rows * mirror.cols {
            return Err(Error::shape("projection length mismatch"));
        }
        Ok(LinearEmbedding {
            projection: Array2::from_shape_vec((mirror.rows, mirror.cols), mirror.projection)
                .expect("checked"),
            center: Array1::from_vec(mirror.center),
            kind: mirror.kind,
            values: mirror.values,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct LinearEmbeddingJson {
    kind: EmbeddingKind,
    rows: usize,
    cols: usize,
    projection: Vec<f64>,
    center: Vec<f64>,
    values: Vec<f64>,
}

fn column_means(rows: &Array2<f64>) -> Array1<f64> {
    rows.sum_axis(Axis(0)) / rows.nrows() as f64
}

/// Flip each column so its largest-magnitude entry is positive; makes the
/// arbitrary eigenvector sign reproducible.
fn fix_signs(m: &mut DMatrix<f64>) {
    for c in 0..m.ncols() {
        let mut max_idx = 0;
        for r in 0..m.nrows() {
            if m[(r, c)].abs() > m[(max_idx, c)].abs() {
                max_idx = r;
            }
        }
        if m[(max_idx, c)] < 0.0 {
            for r in 0..m.nrows() {
                m[(r, c)] = -m[(r, c)];
            }
        }
    }
}

/// Eigen-time-delay coordinates on a raw row matrix: PCA of the centered
/// rows via a dense SVD, keeping the top `l` right singular vectors.
pub fn etd_rows(rows: &Array2<f64>, l: usize) -> Result<LinearEmbedding> {
    let (n, t) = (rows.nrows(), rows.ncols());
    if l > t {
        return Err(Error::invalid(format!("L = {l} exceeds row width {t}")));
    }
    if l == 0 {
        return Err(Error::invalid("L must be >= 1"));
    }
    if n < t {
        return Err(Error::insufficient(format!("need rows >= width, got {n} < {t}")));
    }
    let center = column_means(rows);
    let centered = rows - &center;
    let mat = DMatrix::from_row_slice(n, t, centered.as_slice().expect("standard layout"));
    let svd = mat.svd(false, true);
    let v_t = svd.v_t.expect("requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| {
        svd.singular_values[j]
            .partial_cmp(&svd.singular_values[i])
            .expect("finite")
    });
    let values: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let mut v = DMatrix::zeros(t, l);
    for (col, &rank) in order.iter().take(l).enumerate() {
        for r in 0..t {
            v[(r, col)] = v_t[(rank, r)];
        }
    }
    fix_signs(&mut v);
    let projection = Array2::from_shape_fn((t, l), |(r, c)| v[(r, c)]);
    Ok(LinearEmbedding {
        projection,
        center,
        kind: EmbeddingKind::Etd,
        values,
    })
}

/// ETD on a Hankel matrix, returning the embedding and the scores.
pub fn etd_embed(x: &HankelMatrix, l: usize) -> Result<(LinearEmbedding, PointCloud)> {
    let emb = etd_rows(x.rows(), l)?;
    let scores = emb.apply(x.rows());
    let cloud = PointCloud::new(scores, x.source_dt())?;
    Ok((emb, cloud))
}

/// Time-structure ICA on a raw row matrix: solve the symmetrized
/// generalized eigenproblem `0.5 (C_tau + C_tau^T) w = lambda C_0 w` on
/// centered rows, with `C_0` ridge-regularized by 1e-10 I. Components are
/// `C_0`-orthonormal and ordered by decreasing eigenvalue.
pub fn tica_rows(rows: &Array2<f64>, lag: usize, l: usize) -> Result<LinearEmbedding> {
    let (n, t) = (rows.nrows(), rows.ncols());
    if l > t {
        return Err(Error::invalid(format!("L = {l} exceeds row width {t}")));
    }
    if l == 0 {
        return Err(Error::invalid("L must be >= 1"));
    }
    if n <= lag + 1 {
        return Err(Error::insufficient(format!(
            "need rows > lag + 1, got {n} rows, lag {lag}"
        )));
    }
    let center = column_means(rows);
    let centered = rows - &center;
    let n_eff = n - lag;
    let mut c0 = DMatrix::<f64>::zeros(t, t);
    let mut ct = DMatrix::<f64>::zeros(t, t);
    for i in 0..n_eff {
        for a in 0..t {
            let xa = centered[[i, a]];
            for b in 0..t {
                c0[(a, b)] += xa * centered[[i, b]];
                ct[(a, b)] += xa * centered[[i + lag, b]];
            }
        }
    }
    c0 /= n_eff as f64;
    ct /= n_eff as f64;
    let sym = (&ct + ct.transpose()) * 0.5;
    for i in 0..t {
        c0[(i, i)] += 1e-10;
    }

    let chol = nalgebra::Cholesky::new(c0.clone())
        .ok_or_else(|| Error::numerical("covariance not positive definite"))?;
    let l_mat = chol.l();
    // M = L^-1 A L^-T, symmetric.
    let x = l_mat
        .solve_lower_triangular(&sym)
        .ok_or_else(|| Error::numerical("singular Cholesky factor"))?;
    let m = l_mat
        .solve_lower_triangular(&x.transpose())
        .ok_or_else(|| Error::numerical("singular Cholesky factor"))?
        .transpose();
    let m = (&m + m.transpose()) * 0.5;
    let eig = nalgebra::SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..t).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].partial_cmp(&eig.eigenvalues[i]).expect("finite"));

    // w = L^-T u, columnwise for the kept components.
    let mut w = DMatrix::zeros(t, l);
    for (col, &rank) in order.iter().take(l).enumerate() {
        let u = DVector::from_fn(t, |r, _| eig.eigenvectors[(r, rank)]);
        let wi = l_mat
            .transpose()
            .solve_upper_triangular(&u)
            .ok_or_else(|| Error::numerical("singular Cholesky factor"))?;
        for r in 0..t {
            w[(r, col)] = wi[r];
        }
    }
    fix_signs(&mut w);
    let values: Vec<f64> = order.iter().take(l).map(|&i| eig.eigenvalues[i]).collect();
    Ok(LinearEmbedding {
        projection: Array2::from_shape_fn((t, l), |(r, c)| w[(r, c)]),
        center,
        kind: EmbeddingKind::Tica,
        values,
    })
}

/// tICA on a Hankel matrix, returning the embedding and the scores.
pub fn tica_embed(x: &HankelMatrix, lag: usize, l: usize) -> Result<(LinearEmbedding, PointCloud)> {
    let emb = tica_rows(x.rows(), lag, l)?;
    let scores = emb.apply(x.rows());
    let cloud = PointCloud::new(scores, x.source_dt())?;
    Ok((emb, cloud))
}

/// Classical delay embedding: row for time i is
/// `[x_{i-(d-1)tau}, ..., x_{i-tau}, x_i]`.
pub fn lagged_embed(series: &TimeSeries, d_e: usize, tau: usize) -> Result<PointCloud> {
    if series.channels() != 1 {
        return Err(Error::invalid("lagged_embed expects a univariate series"));
    }
    if d_e < 1 || (d_e > 1 && tau < 1) {
        return Err(Error::invalid(format!(
            "bad embedding parameters d={d_e}, tau={tau}"
        )));
    }
    let n = series.len();
    let offset = (d_e - 1) * tau;
    if n <= offset {
        return Err(Error::insufficient(format!(
            "series of {n} samples too short for d={d_e}, tau={tau}"
        )));
    }
    let x = series.channel(0);
    let rows = n - offset;
    let mut out = Array2::zeros((rows, d_e));
    for i in 0..rows {
        for j in 0..d_e {
            out[[i, j]] = x[i + j * tau];
        }
    }
    PointCloud::new(out, series.dt())
}

/// Outcome of the classical false-neighbor dimension scan.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KennelResult {
    /// First embedding dimension whose false-neighbor fraction drops
    /// below the threshold, or `d_max` when none does.
    pub dimension: usize,
    /// fractions[d-1] is the false-neighbor fraction of the d-dimensional
    /// embedding (measured by lifting it to d+1).
    pub fractions: Vec<f64>,
    /// True when no dimension up to `d_max` reached the threshold.
    pub saturated: bool,
}

/// Classical Kennel scan: delay-embed at dimensions 1..=d_max and find the
/// first dimension whose false-neighbor fraction (single nearest neighbor,
/// same jump/size criteria as the latent regularizer) falls below
/// `threshold`.
pub fn kennel_fnn_dimension(
    series: &TimeSeries,
    tau: usize,
    d_max: usize,
    r_tol: f64,
    a_tol: f64,
    threshold: f64,
) -> Result<KennelResult> {
    if series.channels() != 1 {
        return Err(Error::invalid("kennel scan expects a univariate series"));
    }
    if tau < 1 || d_max < 1 {
        return Err(Error::invalid("need tau >= 1 and d_max >= 1"));
    }
    let n = series.len();
    let span = d_max * tau;
    if n <= span + 1 {
        return Err(Error::insufficient(format!(
            "series of {n} samples too short for d_max={d_max}, tau={tau}"
        )));
    }
    // Prefix embedding: column j holds x_{i + j tau}, so the first d
    // columns form a d-dimensional delay embedding and the regularizer's
    // cumulative-prefix machinery applies as-is with K = 1.
    let x = series.channel(0);
    let rows = n - span;
    let emb = Array2::from_shape_fn((rows, d_max + 1), |(i, j)| x[i + j * tau]);
    let cfg = FnnConfig {
        r_tol,
        a_tol,
        neighbors: Some(1),
        activity: ActivityKind::SecondMoment,
    };
    let diag = false_neighbor_fractions(&LatentBatch::new(emb)?, &cfg)?;
    let fractions = diag.f_bar[1..].to_vec();
    for (idx, &frac) in fractions.iter().enumerate() {
        if frac < threshold {
            return Ok(KennelResult {
                dimension: idx + 1,
                fractions,
                saturated: false,
            });
        }
    }
    Ok(KennelResult {
        dimension: d_max,
        fractions,
        saturated: true,
    })
}

/// Smallest positive lag at which the autocorrelation of the (centered)
/// series crosses zero; the classical delay choice.
pub fn first_autocorrelation_zero(series: &TimeSeries) -> Result<usize> {
    if series.channels() != 1 {
        return Err(Error::invalid("autocorrelation expects a univariate series"));
    }
    let x = series.channel(0);
    let n = x.len();
    let mean = x.sum() / n as f64;
    let denom: f64 = x.iter().map(|v| (v - mean) * (v - mean)).sum();
    if denom <= 0.0 {
        return Err(Error::degenerate("constant series has no autocorrelation zero"));
    }
    for lag in 1..n {
        let mut num = 0.0;
        for i in 0..n - lag {
            num += (x[i] - mean) * (x[i + lag] - mean);
        }
        if num <= 0.0 {
            return Ok(lag);
        }
    }
    Err(Error::insufficient(
        "autocorrelation never crossed zero within the series length",
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use crate::timeseries::build_hankel;

    fn sine_series(n: usize, period: f64) -> TimeSeries {
        let vals: Vec<f64> = (0..n)
            .map(|i| (2.0 * std::f64::consts::PI * i as f64 / period).sin())
            .collect();
        TimeSeries::univariate(&vals, 1.0, "sine").unwrap()
    }

    #[test]
    fn etd_sine_has_rank_two() {
        let hankel = build_hankel(&sine_series(600, 40.0), 10).unwrap();
        let (emb, cloud) = etd_embed(&hankel, 5).unwrap();
        assert_eq!(emb.significant_rank(1e-8), 2);
        assert_eq!(cloud.dim(), 5);
    }

    #[test]
    fn etd_constant_series_scores_are_zero() {
        let vals = vec![3.5; 50];
        let series = TimeSeries::univariate(&vals, 1.0, "const").unwrap();
        let hankel = build_hankel(&series, 4).unwrap();
        let (emb, cloud) = etd_embed(&hankel, 3).unwrap();
        assert!(emb.values.iter().all(|&v| v.abs() < 1e-10));
        assert!(cloud.points().iter().all(|&v| v.abs() < 1e-10));
    }

    #[test]
    fn etd_scores_have_diagonal_covariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let vals: Vec<f64> = (0..800)
            .map(|i| (0.05 * i as f64).sin() + 0.3 * rng.gen_range(-1.0..1.0))
            .collect();
        let series = TimeSeries::univariate(&vals, 1.0, "noisy").unwrap();
        let hankel = build_hankel(&series, 8).unwrap();
        let (_, cloud) = etd_embed(&hankel, 5).unwrap();
        let pts = cloud.points();
        let n = pts.nrows() as f64;
        let means = pts.sum_axis(Axis(0)) / n;
        let mut max_offdiag: f64 = 0.0;
        let mut min_diag = f64::INFINITY;
        for a in 0..5 {
            for b in 0..5 {
                let cov: f64 = (0..pts.nrows())
                    .map(|i| (pts[[i, a]] - means[a]) * (pts[[i, b]] - means[b]))
                    .sum::<f64>()
                    / n;
                if a == b {
                    min_diag = min_diag.min(cov);
                } else {
                    max_offdiag = max_offdiag.max(cov.abs());
                }
            }
        }
        assert!(
            max_offdiag < 1e-8 * min_diag.max(1.0),
            "off-diag {max_offdiag}"
        );
    }

    #[test]
    fn tica_lag_zero_gives_unit_eigenvalues() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let rows = Array2::from_shape_fn((500, 4), |_| rng.gen_range(-1.0..1.0));
        let emb = tica_rows(&rows, 0, 4).unwrap();
        for &v in &emb.values {
            assert!((v - 1.0).abs() < 1e-6, "eigenvalue {v}");
        }
    }

    #[test]
    fn tica_components_are_c0_orthonormal_and_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        // Stationary AR(1) channels with distinct time constants.
        let n = 4000;
        let mut slow = vec![0.0; n];
        let mut fast = vec![0.0; n];
        for i in 1..n {
            slow[i] = 0.98 * slow[i - 1] + 0.2 * rng.gen_range(-1.0..1.0);
            fast[i] = 0.30 * fast[i - 1] + 1.0 * rng.gen_range(-1.0..1.0);
        }
        let rows = Array2::from_shape_fn((n, 2), |(i, j)| {
            // Linear mix of the two sources.
            if j == 0 {
                0.8 * slow[i] + 0.6 * fast[i]
            } else {
                -0.45 * slow[i] + 0.85 * fast[i]
            }
        });
        let lag = 5;
        let emb = tica_rows(&rows, lag, 2).unwrap();

        // Eigenvalues sorted non-increasing and within the stationary
        // autocorrelation bound.
        assert!(emb.values[0] >= emb.values[1]);
        for &v in &emb.values {
            assert!(v <= 1.0 + 1e-8, "eigenvalue {v}");
        }

        // C0-orthonormality of the components.
        let center = column_means(&rows);
        let centered = &rows - &center;
        let n_eff = n - lag;
        let mut c0 = [[0.0; 2]; 2];
        for i in 0..n_eff {
            for a in 0..2 {
                for b in 0..2 {
                    c0[a][b] += centered[[i, a]] * centered[[i, b]];
                }
            }
        }
        for row in c0.iter_mut() {
            for v in row.iter_mut() {
                *v /= n_eff as f64;
            }
        }
        for ci in 0..2 {
            for cj in 0..2 {
                let mut q = 0.0;
                for a in 0..2 {
                    for b in 0..2 {
                        q += emb.projection[[a, ci]] * c0[a][b] * emb.projection[[b, cj]];
                    }
                }
                let expect = if ci == cj { 1.0 } else { 0.0 };
                assert!((q - expect).abs() < 1e-8, "w{ci}^T C0 w{cj} = {q}");
            }
        }

        // The leading component recovers the slow source.
        let scores = emb.apply(&rows);
        let score0: Vec<f64> = scores.column(0).to_vec();
        let corr = correlation(&score0, &slow);
        assert!(corr.abs() > 0.95, "correlation {corr}");
    }

    fn correlation(a: &[f64], b: &[f64]) -> f64 {
        let n = a.len() as f64;
        let ma = a.iter().sum::<f64>() / n;
        let mb = b.iter().sum::<f64>() / n;
        let mut num = 0.0;
        let mut va = 0.0;
        let mut vb = 0.0;
        for i in 0..a.len() {
            let da = a[i] - ma;
            let db = b[i] - mb;
            num += da * db;
            va += da * da;
            vb += db * db;
        }
        num / (va.sqrt() * vb.sqrt())
    }

    #[test]
    fn lagged_embed_basics() {
        let series = TimeSeries::univariate(&[1.0, 2.0, 3.0], 1.0, "t").unwrap();
        let d1 = lagged_embed(&series, 1, 3).unwrap();
        assert_eq!(d1.points().column(0).to_vec(), vec![1.0, 2.0, 3.0]);
        let d2 = lagged_embed(&series, 2, 1).unwrap();
        assert_eq!(d2.points().row(0).to_vec(), vec![1.0, 2.0]);
        assert_eq!(d2.points().row(1).to_vec(), vec![2.0, 3.0]);
    }

    #[test]
    fn lagged_embed_matches_hankel_at_unit_tau() {
        let vals: Vec<f64> = (0..30).map(|i| (i as f64 * 0.4).sin()).collect();
        let series = TimeSeries::univariate(&vals, 1.0, "t").unwrap();
        let hankel = build_hankel(&series, 5).unwrap();
        let lagged = lagged_embed(&series, 5, 1).unwrap();
        assert_eq!(hankel.rows(), lagged.points());
    }

    #[test]
    fn kennel_sine_needs_two_dimensions() {
        let series = sine_series(2000, 80.0);
        let result = kennel_fnn_dimension(&series, 20, 6, 10.0, 2.0, 0.01).unwrap();
        assert_eq!(result.dimension, 2, "fractions {:?}", result.fractions);
        assert!(!result.saturated);
    }

    #[test]
    fn kennel_white_noise_saturates() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let vals: Vec<f64> = (0..3000).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let series = TimeSeries::univariate(&vals, 1.0, "noise").unwrap();
        let result = kennel_fnn_dimension(&series, 1, 5, 10.0, 2.0, 0.01).unwrap();
        assert!(result.saturated, "fractions {:?}", result.fractions);
        assert_eq!(result.dimension, 5);
        // The fraction stays an order of magnitude above threshold.
        assert!(result.fractions[4] > 0.05);
    }

    #[test]
    fn kennel_is_monotone_robust_in_series_length() {
        // Doubling the series length moves d* by at most one on a clean
        // deterministic signal.
        let short = kennel_fnn_dimension(&sine_series(1000, 80.0), 20, 6, 10.0, 2.0, 0.01).unwrap();
        let long = kennel_fnn_dimension(&sine_series(2000, 80.0), 20, 6, 10.0, 2.0, 0.01).unwrap();
        assert!(
            long.dimension <= short.dimension + 1,
            "{} -> {}",
            short.dimension,
            long.dimension
        );
    }

    #[test]
    fn autocorrelation_zero_of_sine_is_quarter_period() {
        let series = sine_series(2000, 80.0);
        let lag = first_autocorrelation_zero(&series).unwrap();
        assert!((19..=21).contains(&lag), "lag {lag}");
    }

    #[test]
    fn linear_embedding_json_round_trip() {
        let hankel = build_hankel(&sine_series(200, 25.0), 6).unwrap();
        let (emb, _) = etd_embed(&hankel, 3).unwrap();
        let json = emb.to_json().unwrap();
        let back = LinearEmbedding::from_json(&json).unwrap();
        assert_eq!(back.projection, emb.projection);
        assert_eq!(back.center, emb.center);
        assert_eq!(back.values, emb.values);
    }
}
