//! Time-series containers, standardization, lag-lifting into Hankel
//! matrices, and train/val/test partitioning.

use std::io::{Read, Write};
use std::path::Path;

use ndarray::{Array2, ArrayView1, Axis};

use crate::error::{Error, Result};

/// Uniformly sampled signal, one column per channel.
#[derive(Debug, Clone)]
pub struct TimeSeries {
    values: Array2<f64>,
    dt: f64,
    name: String,
}

impl TimeSeries {
    /// Build a multichannel series. Requires at least two samples, a
    /// positive timestep, and finite entries.
    pub fn new(values: Array2<f64>, dt: f64, name: impl Into<String>) -> Result<Self> {
        if values.nrows() < 2 {
            return Err(Error::insufficient(format!(
                "time series needs >= 2 samples, got {}",
                values.nrows()
            )));
        }
        if values.ncols() == 0 {
            return Err(Error::invalid("time series needs >= 1 channel"));
        }
        if !(dt > 0.0) {
            return Err(Error::invalid(format!("dt must be > 0, got {dt}")));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("time series contains non-finite entries"));
        }
        Ok(TimeSeries {
            values,
            dt,
            name: name.into(),
        })
    }

    /// Single-channel series from a slice.
    pub fn univariate(samples: &[f64], dt: f64, name: impl Into<String>) -> Result<Self> {
        let values = Array2::from_shape_vec((samples.len(), 1), samples.to_vec())
            .expect("shape follows from slice length");
        TimeSeries::new(values, dt, name)
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn len(&self) -> usize {
        self.values.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.values.nrows() == 0
    }

    pub fn channels(&self) -> usize {
        self.values.ncols()
    }

    pub fn channel(&self, c: usize) -> ArrayView1<'_, f64> {
        self.values.column(c)
    }

    /// Extract one channel as a new univariate series.
    pub fn select_channel(&self, c: usize) -> Result<TimeSeries> {
        if c >= self.channels() {
            return Err(Error::invalid(format!(
                "channel {c} out of range (series has {})",
                self.channels()
            )));
        }
        let col = self.values.column(c).to_owned().insert_axis(Axis(1));
        TimeSeries::new(col, self.dt, format!("{}[{}]", self.name, c))
    }

    /// Contiguous slice of samples `[start, start+len)`.
    pub fn segment(&self, start: usize, len: usize, name: impl Into<String>) -> Result<TimeSeries> {
        if start + len > self.len() {
            return Err(Error::insufficient(format!(
                "segment [{start}, {}) exceeds series length {}",
                start + len,
                self.len()
            )));
        }
        let values = self
            .values
            .slice(ndarray::s![start..start + len, ..])
            .to_owned();
        TimeSeries::new(values, self.dt, name)
    }
}

/// Lag-lifted measurement matrix: row i is the window
/// `[x_i, x_{i+1}, ..., x_{i+T-1}]` of a univariate series.
#[derive(Debug, Clone)]
pub struct HankelMatrix {
    rows: Array2<f64>,
    source_dt: f64,
}

impl HankelMatrix {
    /// Wrap a precomputed matrix, checking the anti-diagonal Hankel
    /// structure: entry (i, j) must equal entry (i+1, j-1).
    pub fn from_rows(rows: Array2<f64>, source_dt: f64) -> Result<Self> {
        if rows.ncols() < 2 {
            return Err(Error::invalid("Hankel matrix needs T >= 2 lags"));
        }
        for i in 0..rows.nrows().saturating_sub(1) {
            for j in 1..rows.ncols() {
                if rows[[i + 1, j - 1]] != rows[[i, j]] {
                    return Err(Error::invalid(format!(
                        "Hankel structure violated at ({i},{j})"
                    )));
                }
            }
        }
        Ok(HankelMatrix { rows, source_dt })
    }

    pub fn rows(&self) -> &Array2<f64> {
        &self.rows
    }

    pub fn n_rows(&self) -> usize {
        self.rows.nrows()
    }

    /// Number of lags T.
    pub fn lags(&self) -> usize {
        self.rows.ncols()
    }

    pub fn source_dt(&self) -> f64 {
        self.source_dt
    }
}

/// Time-ordered set of attractor states.
#[derive(Debug, Clone)]
pub struct PointCloud {
    points: Array2<f64>,
    dt: f64,
}

impl PointCloud {
    pub fn new(points: Array2<f64>, dt: f64) -> Result<Self> {
        if points.ncols() == 0 {
            return Err(Error::invalid("point cloud needs d >= 1"));
        }
        if points.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("point cloud contains non-finite entries"));
        }
        Ok(PointCloud { points, dt })
    }

    pub fn points(&self) -> &Array2<f64> {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.points.nrows() == 0
    }

    pub fn dim(&self) -> usize {
        self.points.ncols()
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }
}

/// Per-channel z-score with the population (1/N) variance convention.
pub fn standardize(series: &TimeSeries) -> Result<TimeSeries> {
    let n = series.len() as f64;
    let mut values = series.values().clone();
    for (c, mut col) in values.columns_mut().into_iter().enumerate() {
        let mean = col.sum() / n;
        let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        if !(var > 1e-300) {
            return Err(Error::ZeroVariance { channel: c });
        }
        let inv_std = 1.0 / var.sqrt();
        col.mapv_inplace(|v| (v - mean) * inv_std);
    }
    TimeSeries::new(values, series.dt(), series.name())
}

/// Lift a univariate series into its lag-T Hankel matrix:
/// row i = `[x_i, ..., x_{i+T-1}]`, i = 0..=N-T.
pub fn build_hankel(series: &TimeSeries, lags: usize) -> Result<HankelMatrix> {
    if series.channels() != 1 {
        return Err(Error::invalid(format!(
            "build_hankel expects a univariate series, got {} channels",
            series.channels()
        )));
    }
    if lags < 2 {
        return Err(Error::invalid("lag count T must be >= 2"));
    }
    let n = series.len();
    if n < lags {
        return Err(Error::insufficient(format!(
            "need N >= T, got N={n}, T={lags}"
        )));
    }
    let x = series.channel(0);
    let n_rows = n - lags + 1;
    let mut rows = Array2::zeros((n_rows, lags));
    for i in 0..n_rows {
        for j in 0..lags {
            rows[[i, j]] = x[i + j];
        }
    }
    Ok(HankelMatrix {
        rows,
        source_dt: series.dt(),
    })
}

/// Keep every `factor`-th sample starting at index 0; dt scales by `factor`.
pub fn downsample(series: &TimeSeries, factor: usize) -> Result<TimeSeries> {
    if factor < 1 {
        return Err(Error::invalid("downsample factor must be >= 1"));
    }
    if factor == 1 {
        return Ok(series.clone());
    }
    let kept: Vec<usize> = (0..series.len()).step_by(factor).collect();
    let values = series.values().select(Axis(0), &kept);
    TimeSeries::new(values, series.dt() * factor as f64, series.name())
}

/// Cut three non-overlapping segments of `segment_len` samples separated by
/// at least `gap` samples, packed tight from index 0.
pub fn split_train_val_test(
    series: &TimeSeries,
    segment_len: usize,
    gap: usize,
) -> Result<(TimeSeries, TimeSeries, TimeSeries)> {
    let needed = 3 * segment_len + 2 * gap;
    if series.len() < needed {
        return Err(Error::insufficient(format!(
            "need N >= 3*{segment_len} + 2*{gap} = {needed}, got {}",
            series.len()
        )));
    }
    let stride = segment_len + gap;
    let train = series.segment(0, segment_len, format!("{}/train", series.name()))?;
    let val = series.segment(stride, segment_len, format!("{}/val", series.name()))?;
    let test = series.segment(2 * stride, segment_len, format!("{}/test", series.name()))?;
    Ok((train, val, test))
}

/// Format a float with 17 significant digits, enough to round-trip f64.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Write a matrix as CSV, one row per line, with the given header names.
pub fn write_matrix_csv<W: Write>(out: W, header: &[String], matrix: &Array2<f64>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if !header.is_empty() {
        w.write_record(header)?;
    }
    for row in matrix.rows() {
        w.write_record(row.iter().map(|v| format_f64(*v)))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_matrix_csv_path(path: &Path, header: &[String], matrix: &Array2<f64>) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_matrix_csv(file, header, matrix)
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        match e.kind() {
            csv::ErrorKind::Io(_) => Error::invalid(format!("csv io: {e}")),
            _ => Error::invalid(format!("csv: {e}")),
        }
    }
}

/// Parse a CSV of numeric columns: one column per channel, optional single
/// header row, `.` decimal point. Non-numeric cells after the header are
/// rejected with 1-based row/column coordinates.
pub fn read_csv_matrix<R: Read>(input: R) -> Result<Array2<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(false)
        .trim(csv::Trim::All)
        .from_reader(input);

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = None;
    for (r, record) in reader.records().enumerate() {
        let record = record?;
        let mut parsed = Vec::with_capacity(record.len());
        let mut failed: Option<(usize, String)> = None;
        for (c, cell) in record.iter().enumerate() {
            match cell.parse::<f64>() {
                Ok(v) => parsed.push(v),
                Err(_) => {
                    failed = Some((c, cell.to_string()));
                    break;
                }
            }
        }
        if let Some((c, value)) = failed {
            // An entirely non-numeric first row is a header; anything later
            // is a data error.
            if r == 0 && record.iter().all(|cell| cell.parse::<f64>().is_err()) {
                width = Some(record.len());
                continue;
            }
            return Err(Error::CsvParse {
                row: r + 1,
                column: c + 1,
                value,
            });
        }
        match width {
            None => width = Some(parsed.len()),
            Some(w) if w != parsed.len() => {
                return Err(Error::invalid(format!(
                    "csv row {} has {} columns, expected {w}",
                    r + 1,
                    parsed.len()
                )))
            }
            _ => {}
        }
        rows.push(parsed);
    }
    let width = width.unwrap_or(0);
    if rows.is_empty() || width == 0 {
        return Err(Error::insufficient("csv contains no numeric rows"));
    }
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    let n = flat.len() / width;
    Ok(Array2::from_shape_vec((n, width), flat).expect("ragged rows rejected above"))
}

/// Read a CSV file into a [`TimeSeries`] with the given timestep.
pub fn read_csv_series(path: &Path, dt: f64, name: impl Into<String>) -> Result<TimeSeries> {
    let file = std::fs::File::open(path)?;
    let values = read_csv_matrix(file)?;
    TimeSeries::new(values, dt, name)
}
