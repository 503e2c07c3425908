//! Attractor similarity metrics and the aggregate comparison report.

mod dims;
mod dtw;
mod neighbors;
mod persistence;
mod procrustes;
mod simplex;
mod wasserstein;

pub use dims::{
    correlation_dimension, effective_dimension, s_corr, s_dim, CorrelationDimension,
    CORR_RADII, DEFAULT_CORR_SUBSAMPLE,
};
pub use dtw::{dtw_distance, s_dtw_aligned};
pub use neighbors::{neighbor_coverage, subsample_indices, NeighborCoverage, DEFAULT_NN_SUBSAMPLE};
pub use persistence::{
    farthest_point_indices, rips_persistence, Bar, PersistenceDiagram, DEFAULT_RIPS_SUBSAMPLE,
};
pub use procrustes::{procrustes_align, s_proc, variance_profile, ProcrustesAlignment};
pub use simplex::{simplex_forecast, DEFAULT_THEILER};
pub use wasserstein::{
    diagram_distance, distance_to_null, hungarian, s_homol, wasserstein,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::timeseries::PointCloud;

/// Lift a cloud to `l` dimensions by appending zero columns.
pub fn pad_attractor(y: &PointCloud, l: usize) -> Result<PointCloud> {
    let d = y.dim();
    if d > l {
        return Err(Error::invalid(format!(
            "cannot pad a {d}-dimensional cloud down to {l}"
        )));
    }
    if d == l {
        return Ok(y.clone());
    }
    let mut padded = ndarray::Array2::zeros((y.len(), l));
    padded.slice_mut(ndarray::s![.., ..d]).assign(y.points());
    PointCloud::new(padded, y.dt())
}

/// Knobs for [`compare_all`]; every stochastic choice derives from `seed`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MetricsParams {
    pub tau_list: Vec<usize>,
    pub seed: u64,
    pub theiler: usize,
    pub nn_subsample: usize,
    pub corr_subsample: usize,
    pub rips_subsample: usize,
}

impl Default for MetricsParams {
    fn default() -> Self {
        MetricsParams {
            tau_list: vec![1, 10, 20],
            seed: 0,
            theiler: DEFAULT_THEILER,
            nn_subsample: DEFAULT_NN_SUBSAMPLE,
            corr_subsample: DEFAULT_CORR_SUBSAMPLE,
            rips_subsample: DEFAULT_RIPS_SUBSAMPLE,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimplexScore {
    pub tau: usize,
    pub score: f64,
}

/// Everything needed to reproduce the numbers in a report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportParams {
    pub seed: u64,
    pub tau_list: Vec<usize>,
    pub theiler: usize,
    pub nn_subsample: usize,
    pub nn_rows_used: usize,
    pub corr_subsample: usize,
    pub corr_rows_used: usize,
    pub corr_radii: usize,
    pub corr_fit_window: (usize, usize),
    pub rips_subsample: usize,
    pub truth_padded_from: usize,
    pub procrustes_scale: f64,
}

/// All similarity scores for one (reconstruction, truth) pair.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricsReport {
    pub s_dim: f64,
    pub s_proc: f64,
    pub s_dtw: f64,
    pub s_simp: Vec<SimplexScore>,
    pub s_nn: f64,
    pub s_homol: f64,
    pub s_corr: f64,
    pub c_truth: f64,
    pub c_embed: f64,
    pub params: ReportParams,
}

/// Prefix sub-errors with the metric name, keeping the variant so exit
/// codes stay meaningful upstream.
fn metric_err(name: &str, e: Error) -> Error {
    match e {
        Error::InsufficientData { context } => Error::InsufficientData {
            context: format!("{name}: {context}"),
        },
        Error::InvalidArgument { context } => Error::InvalidArgument {
            context: format!("{name}: {context}"),
        },
        Error::DegenerateReference { context } => Error::DegenerateReference {
            context: format!("{name}: {context}"),
        },
        Error::Numerical { context } => Error::Numerical {
            context: format!("{name}: {context}"),
        },
        other => other,
    }
}

/// Run the full metric suite on time-aligned clouds. The truth is padded
/// with zero columns to the embedding width; Procrustes-aligned copies
/// feed the DTW and persistence scores; every seeded choice is recorded.
pub fn compare_all(
    yhat: &PointCloud,
    y: &PointCloud,
    params: &MetricsParams,
) -> Result<MetricsReport> {
    if yhat.len() != y.len() {
        return Err(Error::invalid(format!(
            "row counts differ: embedding {} vs truth {}",
            yhat.len(),
            y.len()
        )));
    }
    let truth_dim = y.dim();
    let padded = pad_attractor(y, yhat.dim())?;

    let var_truth = variance_profile(&padded).to_vec();
    let var_embed = variance_profile(yhat).to_vec();
    let s_dim_score =
        s_dim(&var_truth, &var_embed).map_err(|e| metric_err("s_dim", e))?;

    let alignment = procrustes_align(yhat, &padded).map_err(|e| metric_err("s_proc", e))?;
    let s_proc_score = 1.0 - alignment.residual;

    let s_dtw_score = dtw::s_dtw_aligned(&alignment.aligned, &alignment.reference)
        .map_err(|e| metric_err("s_dtw", e))?;

    let mut s_simp_scores = Vec::with_capacity(params.tau_list.len());
    for &tau in &params.tau_list {
        let score = simplex_forecast(yhat, &padded, tau, params.theiler)
            .map_err(|e| metric_err("s_simp", e))?;
        s_simp_scores.push(SimplexScore { tau, score });
    }

    let coverage = neighbor_coverage(yhat, &padded, params.nn_subsample, params.seed)
        .map_err(|e| metric_err("s_nn", e))?;

    let c_truth = correlation_dimension(&padded, params.corr_subsample, params.seed)
        .map_err(|e| metric_err("s_corr", e))?;
    let c_embed = correlation_dimension(yhat, params.corr_subsample, params.seed)
        .map_err(|e| metric_err("s_corr", e))?;
    let s_corr_score =
        s_corr(c_truth.dimension, c_embed.dimension).map_err(|e| metric_err("s_corr", e))?;

    let reference_cloud =
        PointCloud::new(alignment.reference.clone(), y.dt()).expect("finite by construction");
    let aligned_cloud =
        PointCloud::new(alignment.aligned.clone(), y.dt()).expect("finite by construction");
    let s_homol_score = s_homol(
        &reference_cloud,
        &aligned_cloud,
        params.rips_subsample,
        params.seed,
    )
    .map_err(|e| metric_err("s_homol", e))?;

    Ok(MetricsReport {
        s_dim: s_dim_score,
        s_proc: s_proc_score,
        s_dtw: s_dtw_score,
        s_simp: s_simp_scores,
        s_nn: coverage.s_nn,
        s_homol: s_homol_score,
        s_corr: s_corr_score,
        c_truth: c_truth.dimension,
        c_embed: c_embed.dimension,
        params: ReportParams {
            seed: params.seed,
            tau_list: params.tau_list.clone(),
            theiler: params.theiler,
            nn_subsample: params.nn_subsample,
            nn_rows_used: coverage.rows_used,
            corr_subsample: params.corr_subsample,
            corr_rows_used: c_truth.rows_used,
            corr_radii: CORR_RADII,
            corr_fit_window: c_truth.fit_window,
            rips_subsample: params.rips_subsample,
            truth_padded_from: truth_dim,
            procrustes_scale: alignment.scale,
        },
    })
}
