//! Full-reference quality metrics.
//!
//! Conventions for data normalized to `[-1, 1]`: PSNR peak 1.0 and SSIM
//! dynamic range 2.0. Both are configurable through [`MetricOptions`].
//! Volume SSIM is the mean of the 2-D SSIMs of the frontal (time) slices.

use crate::error::{Result, TlsmError};
use crate::tensor::Tensor3;

/// PSNR reported for identical inputs.
pub const PSNR_CAP_DB: f64 = 300.0;
pub const DEFAULT_PEAK: f64 = 1.0;
pub const DEFAULT_DYNAMIC_RANGE: f64 = 2.0;
pub const SSIM_WINDOW: usize = 11;
pub const SSIM_SIGMA: f64 = 1.5;
const K1: f64 = 0.01;
const K2: f64 = 0.03;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricOptions {
    pub peak: f64,
    pub dynamic_range: f64,
}

impl Default for MetricOptions {
    fn default() -> Self {
        MetricOptions {
            peak: DEFAULT_PEAK,
            dynamic_range: DEFAULT_DYNAMIC_RANGE,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    pub psnr_db: f64,
    pub ssim: f64,
    pub per_slice_ssim: Vec<f64>,
}

fn check_dims(x: &Tensor3, reference: &Tensor3) -> Result<()> {
    if x.dims() != reference.dims() {
        return Err(TlsmError::DimensionMismatch(format!(
            "{:?} vs reference {:?}",
            x.dims(),
            reference.dims()
        )));
    }
    Ok(())
}

/// `10 log10(peak^2 / MSE)`, or [`PSNR_CAP_DB`] when the inputs are identical.
pub fn psnr(x: &Tensor3, reference: &Tensor3, peak: f64) -> Result<f64> {
    check_dims(x, reference)?;
    if !(peak > 0.0) {
        return Err(TlsmError::InvalidArgument(format!("PSNR peak must be positive, got {peak}")));
    }
    let sse: f64 = x
        .as_slice()
        .iter()
        .zip(reference.as_slice())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    if sse == 0.0 {
        return Ok(PSNR_CAP_DB);
    }
    let mse = sse / x.len() as f64;
    Ok((10.0 * (peak * peak / mse).log10()).min(PSNR_CAP_DB))
}

/// Normalized 1-D Gaussian taps of the SSIM window.
pub fn gaussian_window() -> [f64; SSIM_WINDOW] {
    let mut w = [0.0; SSIM_WINDOW];
    let half = (SSIM_WINDOW / 2) as f64;
    for (i, v) in w.iter_mut().enumerate() {
        let d = i as f64 - half;
        *v = (-d * d / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp();
    }
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= total);
    w
}

/// Separable "valid" Gaussian filtering of a row-major `rows x cols` image.
fn filter_valid(img: &[f64], rows: usize, cols: usize, w: &[f64; SSIM_WINDOW]) -> Vec<f64> {
    let out_cols = cols - SSIM_WINDOW + 1;
    let out_rows = rows - SSIM_WINDOW + 1;
    let mut horiz = vec![0.0; rows * out_cols];
    for r in 0..rows {
        let line = &img[r * cols..(r + 1) * cols];
        for c in 0..out_cols {
            horiz[r * out_cols + c] = w.iter().zip(&line[c..]).map(|(a, b)| a * b).sum();
        }
    }
    let mut out = vec![0.0; out_rows * out_cols];
    for r in 0..out_rows {
        for c in 0..out_cols {
            out[r * out_cols + c] = (0..SSIM_WINDOW)
                .map(|k| w[k] * horiz[(r + k) * out_cols + c])
                .sum();
        }
    }
    out
}

/// SSIM of two row-major images with the standard Gaussian window.
pub fn ssim_2d(x: &[f64], y: &[f64], rows: usize, cols: usize, dynamic_range: f64) -> Result<f64> {
    if rows < SSIM_WINDOW || cols < SSIM_WINDOW {
        return Err(TlsmError::SliceTooSmall {
            rows,
            cols,
            window: SSIM_WINDOW,
        });
    }
    let w = gaussian_window();
    let c1 = (K1 * dynamic_range).powi(2);
    let c2 = (K2 * dynamic_range).powi(2);
    let xx: Vec<f64> = x.iter().map(|v| v * v).collect();
    let yy: Vec<f64> = y.iter().map(|v| v * v).collect();
    let xy: Vec<f64> = x.iter().zip(y).map(|(a, b)| a * b).collect();

    let mu_x = filter_valid(x, rows, cols, &w);
    let mu_y = filter_valid(y, rows, cols, &w);
    let e_xx = filter_valid(&xx, rows, cols, &w);
    let e_yy = filter_valid(&yy, rows, cols, &w);
    let e_xy = filter_valid(&xy, rows, cols, &w);

    let n = mu_x.len();
    let mut total = 0.0;
    for i in 0..n {
        let (mx, my) = (mu_x[i], mu_y[i]);
        let var_x = e_xx[i] - mx * mx;
        let var_y = e_yy[i] - my * my;
        let cov = e_xy[i] - mx * my;
        total += ((2.0 * mx * my + c1) * (2.0 * cov + c2))
            / ((mx * mx + my * my + c1) * (var_x + var_y + c2));
    }
    Ok(total / n as f64)
}

/// Per-frontal-slice SSIM values.
pub fn ssim_slices(x: &Tensor3, reference: &Tensor3, dynamic_range: f64) -> Result<Vec<f64>> {
    check_dims(x, reference)?;
    let [n1, n2, n3] = x.dims();
    (0..n3)
        .map(|k| ssim_2d(x.frontal_slice(k), reference.frontal_slice(k), n1, n2, dynamic_range))
        .collect()
}

/// Mean frontal-slice SSIM with the default dynamic range.
pub fn ssim(x: &Tensor3, reference: &Tensor3) -> Result<f64> {
    ssim_with_range(x, reference, DEFAULT_DYNAMIC_RANGE)
}

pub fn ssim_with_range(x: &Tensor3, reference: &Tensor3, dynamic_range: f64) -> Result<f64> {
    let per_slice = ssim_slices(x, reference, dynamic_range)?;
    Ok(per_slice.iter().sum::<f64>() / per_slice.len() as f64)
}

pub fn evaluate(x: &Tensor3, reference: &Tensor3, options: &MetricOptions) -> Result<MetricReport> {
    let per_slice_ssim = ssim_slices(x, reference, options.dynamic_range)?;
    Ok(MetricReport {
        psnr_db: psnr(x, reference, options.peak)?,
        ssim: per_slice_ssim.iter().sum::<f64>() / per_slice_ssim.len() as f64,
        per_slice_ssim,
    })
}
