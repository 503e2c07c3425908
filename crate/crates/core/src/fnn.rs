//! False-nearest-neighbor latent regularizer.
//!
//! Works on a batch of latent activations `h` (B samples by L units).
//! For each prefix of the latent coordinates, pairwise distances are
//! computed and each point's nearest neighbors are tracked as one more
//! coordinate is admitted. Neighbors that jump apart when a coordinate is
//! added ("false neighbors") indicate that the coordinate carries
//! information; coordinates that create no false neighbors are redundant
//! and their batch activity is penalized:
//!
//! `loss = sum_m (1 - f_bar[m]) * activity_m`, m over units 2..L.
//!
//! The fraction vector `f_bar` is treated as a constant of the batch when
//! differentiating (the masks and sort orders are piecewise constant in h,
//! so their a.e. gradient is zero).

use ndarray::{Array2, Array3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Guard for the relative-jump denominator on degenerate batches.
const DIV_EPS: f64 = 1e-12;

/// Batch of latent activations, rows are samples, columns are latent units
/// in latent-index order.
#[derive(Debug, Clone)]
pub struct LatentBatch {
    h: Array2<f64>,
}

impl LatentBatch {
    pub fn new(h: Array2<f64>) -> Result<Self> {
        if h.nrows() < 2 || h.ncols() < 2 {
            return Err(Error::shape(format!(
                "latent batch needs B >= 2 and L >= 2, got {}x{}",
                h.nrows(),
                h.ncols()
            )));
        }
        if h.iter().any(|v| !v.is_finite()) {
            return Err(Error::numerical("latent batch contains non-finite values"));
        }
        Ok(LatentBatch { h })
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.h
    }

    pub fn batch_size(&self) -> usize {
        self.h.nrows()
    }

    pub fn latent_width(&self) -> usize {
        self.h.ncols()
    }
}

/// Which per-unit activity the regularizer multiplies by `1 - f_bar`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ActivityKind {
    /// Batch second moment `(1/B) sum_b h[b,m]^2`. With a batch-normalized
    /// latent layer the batch mean is ~0, which would make the literal
    /// squared-mean reading inert; the second moment keeps the penalty
    /// meaningful.
    #[default]
    SecondMoment,
    /// Literal squared batch mean `((1/B) sum_b h[b,m])^2`.
    SquaredMean,
}

/// Thresholds and neighbor count for the false-neighbor masks.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FnnConfig {
    /// Relative-jump threshold for the R criterion.
    pub r_tol: f64,
    /// Attractor-size multiple for the A criterion.
    pub a_tol: f64,
    /// Neighbor count K; `None` selects `max(1, ceil(0.01 B))`.
    pub neighbors: Option<usize>,
    pub activity: ActivityKind,
}

impl Default for FnnConfig {
    fn default() -> Self {
        FnnConfig {
            r_tol: 10.0,
            a_tol: 2.0,
            neighbors: None,
            activity: ActivityKind::SecondMoment,
        }
    }
}

impl FnnConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.r_tol > 0.0) {
            return Err(Error::invalid(format!("r_tol must be > 0, got {}", self.r_tol)));
        }
        if !(self.a_tol > 0.0) {
            return Err(Error::invalid(format!("a_tol must be > 0, got {}", self.a_tol)));
        }
        Ok(())
    }

    /// Resolve K for a batch of `b` samples; errors unless `1 <= K <= B-1`.
    pub fn effective_k(&self, b: usize) -> Result<usize> {
        let k = match self.neighbors {
            Some(k) => k,
            None => ((0.01 * b as f64).ceil() as usize).max(1),
        };
        if k < 1 || k >= b {
            return Err(Error::invalid(format!(
                "neighbor count K = {k} out of range for batch size {b}"
            )));
        }
        Ok(k)
    }
}

/// Per-batch regularizer readout, serializable for epoch logs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FnnDiagnostics {
    /// False-neighbor fraction per latent index; entry 0 is 1 by
    /// convention so the first unit carries zero penalty weight.
    pub f_bar: Vec<f64>,
    /// Cumulative attractor size per latent prefix.
    pub r_m: Vec<f64>,
    pub loss: f64,
}

/// Dimension-indexed pairwise Euclidean distances:
/// `D[a, b, m] = sqrt(sum_{i<=m} (h[a,i] - h[b,i])^2)`.
pub fn dim_indexed_distances(batch: &LatentBatch) -> Array3<f64> {
    let h = batch.matrix();
    let (b, l) = (h.nrows(), h.ncols());
    let mut d = Array3::zeros((b, b, l));
    for a in 0..b {
        for bb in (a + 1)..b {
            let mut acc = 0.0;
            for m in 0..l {
                let diff = h[[a, m]] - h[[bb, m]];
                acc += diff * diff;
                let dist = acc.sqrt();
                d[[a, bb, m]] = dist;
                d[[bb, a, m]] = dist;
            }
        }
    }
    d
}

/// Neighbor index tensor: `g[a, :, m]` sorts the batch by distance from
/// `a` in the first `m+1` latent coordinates, nearest first. The point
/// itself is always rank 0; remaining ties break toward the smaller index.
pub fn neighbor_sort(d: &Array3<f64>) -> Array3<u32> {
    let (b, _, l) = d.dim();
    let mut g = Array3::zeros((b, b, l));
    let mut order: Vec<u32> = Vec::with_capacity(b);
    for a in 0..b {
        for m in 0..l {
            order.clear();
            order.extend(0..b as u32);
            order.sort_unstable_by(|&p, &q| {
                let key = |idx: u32| {
                    let idx = idx as usize;
                    let dist = if idx == a { -1.0 } else { d[[a, idx, m]] };
                    (dist, idx)
                };
                key(*&p).partial_cmp(&key(*&q)).expect("finite distances")
            });
            for (rank, &idx) in order.iter().enumerate() {
                g[[a, rank, m]] = idx;
            }
        }
    }
    g
}

/// Cumulative batch "attractor size" per latent prefix:
/// `r2[m] = (1/((m+1) B)) sum_b sum_{i<=m} (h[b,i] - mean_i)^2`.
fn attractor_sizes(h: &Array2<f64>) -> Vec<f64> {
    let (b, l) = (h.nrows(), h.ncols());
    let mut means = vec![0.0; l];
    for i in 0..l {
        let mut s = 0.0;
        for bb in 0..b {
            s += h[[bb, i]];
        }
        means[i] = s / b as f64;
    }
    let mut ssd = vec![0.0; l];
    for bb in 0..b {
        let mut acc = 0.0;
        for i in 0..l {
            let diff = h[[bb, i]] - means[i];
            acc += diff * diff;
            ssd[i] += acc;
        }
    }
    (0..l)
        .map(|m| (ssd[m] / ((m + 1) as f64 * b as f64)).sqrt())
        .collect()
}

/// Top-(K+1) neighbor selection per level for one point: returns indices
/// ordered nearest-first with the point itself at rank 0.
fn top_neighbors(
    d2_row: &[f64],
    level: usize,
    l: usize,
    a: usize,
    k: usize,
    scratch: &mut Vec<u32>,
) -> Vec<u32> {
    let b = d2_row.len() / l;
    scratch.clear();
    scratch.extend(0..b as u32);
    let key = |idx: u32| {
        let i = idx as usize;
        let dist = if i == a { -1.0 } else { d2_row[i * l + level] };
        (dist, i)
    };
    let take = (k + 1).min(b);
    if take < b {
        scratch.select_nth_unstable_by(take - 1, |&p, &q| {
            key(p).partial_cmp(&key(q)).expect("finite distances")
        });
        scratch.truncate(take);
    }
    scratch.sort_unstable_by(|&p, &q| key(p).partial_cmp(&key(q)).expect("finite distances"));
    scratch.clone()
}

/// Batchwise false-neighbor fractions with the resulting activity loss.
///
/// The masks follow the rank-aligned definitions: at each level the
/// rank-r sorted distance is compared against the level-m distance to the
/// neighbor that held rank r one level below. Degenerate prefixes (zero
/// attractor size) produce no false neighbors.
pub fn false_neighbor_fractions(batch: &LatentBatch, cfg: &FnnConfig) -> Result<FnnDiagnostics> {
    cfg.validate()?;
    let h = batch.matrix();
    let (b, l) = (h.nrows(), h.ncols());
    let k = cfg.effective_k(b)?;

    let r_m = attractor_sizes(h);
    let mut counts = vec![0.0_f64; l];

    let mut d2_row = vec![0.0_f64; b * l];
    let mut scratch: Vec<u32> = Vec::with_capacity(b);
    for a in 0..b {
        // Cumulative squared distances from a to every batch member.
        for bb in 0..b {
            let mut acc = 0.0;
            for m in 0..l {
                let diff = h[[a, m]] - h[[bb, m]];
                acc += diff * diff;
                d2_row[bb * l + m] = acc;
            }
        }
        let mut prev = top_neighbors(&d2_row, 0, l, a, k, &mut scratch);
        for m in 1..l {
            let cur = top_neighbors(&d2_row, m, l, a, k, &mut scratch);
            for rank in 1..=k {
                let nb_rank = cur[rank] as usize;
                let nb_prev = prev[rank] as usize;
                let d_sorted = d2_row[nb_rank * l + m].sqrt();
                let d_carried = d2_row[nb_prev * l + m].sqrt();
                let d_sorted2 = d_sorted * d_sorted;
                let jump = (d_carried * d_carried - d_sorted2) / d_sorted2.max(DIV_EPS);
                let r_crit = jump >= cfg.r_tol;
                let a_crit = r_m[m] > 0.0 && d_sorted >= cfg.a_tol * r_m[m];
                if r_crit || a_crit {
                    counts[m] += 1.0;
                }
            }
            prev = cur;
        }
    }

    let mut f_bar = vec![0.0; l];
    f_bar[0] = 1.0;
    for m in 1..l {
        f_bar[m] = counts[m] / (k as f64 * b as f64);
    }
    let loss = weighted_activity_loss(h, &f_bar, cfg.activity);
    Ok(FnnDiagnostics { f_bar, r_m, loss })
}

fn unit_activity(h: &Array2<f64>, m: usize, kind: ActivityKind) -> f64 {
    let b = h.nrows() as f64;
    match kind {
        ActivityKind::SecondMoment => {
            let mut s = 0.0;
            for bb in 0..h.nrows() {
                s += h[[bb, m]] * h[[bb, m]];
            }
            s / b
        }
        ActivityKind::SquaredMean => {
            let mut s = 0.0;
            for bb in 0..h.nrows() {
                s += h[[bb, m]];
            }
            let mean = s / b;
            mean * mean
        }
    }
}

fn weighted_activity_loss(h: &Array2<f64>, f_bar: &[f64], kind: ActivityKind) -> f64 {
    let mut loss = 0.0;
    for m in 1..h.ncols() {
        loss += (1.0 - f_bar[m]) * unit_activity(h, m, kind);
    }
    loss
}

/// The activity-regularizer loss `sum_{m>=2} (1 - f_bar[m]) a_m`.
pub fn fnn_loss(batch: &LatentBatch, cfg: &FnnConfig) -> Result<f64> {
    Ok(false_neighbor_fractions(batch, cfg)?.loss)
}

/// Gradient of [`fnn_loss`] with `f_bar` frozen per batch.
pub fn fnn_loss_grad(batch: &LatentBatch, cfg: &FnnConfig) -> Result<Array2<f64>> {
    let diag = false_neighbor_fractions(batch, cfg)?;
    Ok(fnn_loss_grad_frozen(batch.matrix(), &diag.f_bar, cfg.activity))
}

/// Gradient of the weighted activity term for a fixed `f_bar`.
pub fn fnn_loss_grad_frozen(h: &Array2<f64>, f_bar: &[f64], kind: ActivityKind) -> Array2<f64> {
    let (b, l) = (h.nrows(), h.ncols());
    let bf = b as f64;
    let mut grad = Array2::zeros((b, l));
    for m in 1..l {
        let weight = 1.0 - f_bar[m];
        match kind {
            ActivityKind::SecondMoment => {
                for bb in 0..b {
                    grad[[bb, m]] = weight * 2.0 * h[[bb, m]] / bf;
                }
            }
            ActivityKind::SquaredMean => {
                let mut s = 0.0;
                for bb in 0..b {
                    s += h[[bb, m]];
                }
                let mean = s / bf;
                for bb in 0..b {
                    grad[[bb, m]] = weight * 2.0 * mean / bf;
                }
            }
        }
    }
    grad
}

/// Loss value for a fixed `f_bar` (used by gradient checks and training).
pub fn fnn_loss_frozen(h: &Array2<f64>, f_bar: &[f64], kind: ActivityKind) -> f64 {
    weighted_activity_loss(h, f_bar, kind)
}
