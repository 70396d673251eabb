//! Mean squared error and structural similarity between image pairs.
//!
//! SSIM follows the canonical completion: a Gaussian-weighted 11x11 window
//! (sigma 1.5) slides densely over both images; per window the luminance,
//! contrast and structure factors combine as l^a * c^b * s^g with stabilizers
//! C1 = (0.01 L)^2, C2 = (0.03 L)^2, C3 = C2/2 on the 8-bit dynamic range
//! L = 255. The mean over the window map uses pairwise summation so the
//! reduction is reproducible.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::raster::{BinaryMask, GrayImage};

/// Intensity scale for MSE.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MseScale {
    /// Intensities divided by 255; masks are native 0/1.
    Unit,
    /// Raw 8-bit intensities; masks are 0/255.
    Byte,
}

fn check_dims(a: (u32, u32), b: (u32, u32)) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected: a,
            actual: b,
        })
    }
}

/// Mean squared error between two grayscale images.
pub fn mse_gray(a: &GrayImage, b: &GrayImage, scale: MseScale) -> Result<f64> {
    check_dims((a.width(), a.height()), (b.width(), b.height()))?;
    let div = match scale {
        MseScale::Unit => 255.0,
        MseScale::Byte => 1.0,
    };
    let mut acc = 0.0f64;
    for (&pa, &pb) in a.pixels().iter().zip(b.pixels()) {
        let diff = (pa as f64 - pb as f64) / div;
        acc += diff * diff;
    }
    Ok(acc / a.pixels().len() as f64)
}

/// Mean squared error between two binary masks.
pub fn mse_mask(a: &BinaryMask, b: &BinaryMask, scale: MseScale) -> Result<f64> {
    check_dims((a.width(), a.height()), (b.width(), b.height()))?;
    let level = match scale {
        MseScale::Unit => 1.0f64,
        MseScale::Byte => 255.0,
    };
    let mut acc = 0.0f64;
    for (&pa, &pb) in a.pixels().iter().zip(b.pixels()) {
        if pa != pb {
            acc += level * level;
        }
    }
    Ok(acc / a.pixels().len() as f64)
}

/// SSIM parameters: window geometry, component exponents and stabilizers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SsimParams {
    pub window: usize,
    pub sigma: f64,
    pub exponent_l: f64,
    pub exponent_c: f64,
    pub exponent_s: f64,
    pub k1: f64,
    pub k2: f64,
    pub dynamic_range: f64,
}

impl Default for SsimParams {
    fn default() -> Self {
        SsimParams {
            window: 11,
            sigma: 1.5,
            exponent_l: 1.0,
            exponent_c: 1.0,
            exponent_s: 1.0,
            k1: 0.01,
            k2: 0.03,
            dynamic_range: 255.0,
        }
    }
}

impl SsimParams {
    pub fn c1(&self) -> f64 {
        (self.k1 * self.dynamic_range).powi(2)
    }

    pub fn c2(&self) -> f64 {
        (self.k2 * self.dynamic_range).powi(2)
    }

    pub fn c3(&self) -> f64 {
        self.c2() / 2.0
    }

    pub fn validate(&self) -> Result<()> {
        if self.window < 3 || self.window.is_multiple_of(2) {
            return Err(Error::InvalidConfig {
                message: format!("ssim_window {} must be odd and at least 3", self.window),
            });
        }
        if self.exponent_l < 0.0 || self.exponent_c < 0.0 || self.exponent_s < 0.0 {
            return Err(Error::InvalidConfig {
                message: "ssim exponents must be non-negative".into(),
            });
        }
        // NaN fails every comparison, so these also reject NaN inputs.
        let positive = |v: f64| v > 0.0;
        if !positive(self.sigma) || !positive(self.c1()) || !positive(self.c2()) {
            return Err(Error::InvalidConfig {
                message: "ssim sigma and stabilizers must be positive".into(),
            });
        }
        Ok(())
    }
}

/// Dense per-window SSIM values: one entry per valid window position.
#[derive(Debug, Clone, PartialEq)]
pub struct SsimMap {
    pub width: u32,
    pub height: u32,
    pub values: Vec<f64>,
}

impl SsimMap {
    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Pairwise (cascade) summation; the specified reduction order for means.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 32 {
        values.iter().sum()
    } else {
        let mid = values.len() / 2;
        pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
    }
}

/// Valid-mode separable convolution with a normalized 1-D kernel applied
/// along x then y.
fn separable_valid(plane: &[f64], w: usize, h: usize, kernel: &[f64]) -> Vec<f64> {
    let k = kernel.len();
    let out_w = w - k + 1;
    let out_h = h - k + 1;
    let mut horiz = vec![0.0f64; out_w * h];
    for y in 0..h {
        for x in 0..out_w {
            let mut acc = 0.0;
            for (i, kv) in kernel.iter().enumerate() {
                acc += kv * plane[y * w + x + i];
            }
            horiz[y * out_w + x] = acc;
        }
    }
    let mut out = vec![0.0f64; out_w * out_h];
    for y in 0..out_h {
        for x in 0..out_w {
            let mut acc = 0.0;
            for (i, kv) in kernel.iter().enumerate() {
                acc += kv * horiz[(y + i) * out_w + x];
            }
            out[y * out_w + x] = acc;
        }
    }
    out
}

fn gaussian_kernel(side: usize, sigma: f64) -> Vec<f64> {
    let half = (side / 2) as i64;
    let mut kernel = Vec::with_capacity(side);
    for i in -half..=half {
        kernel.push((-((i * i) as f64) / (2.0 * sigma * sigma)).exp());
    }
    let norm: f64 = kernel.iter().sum();
    kernel.into_iter().map(|v| v / norm).collect()
}

#[inline]
fn powf_or_skip(base: f64, exp: f64) -> f64 {
    if exp == 0.0 {
        1.0
    } else if exp == 1.0 {
        base
    } else {
        base.powf(exp)
    }
}

/// Mean SSIM and the dense per-window map.
pub fn ssim(a: &GrayImage, b: &GrayImage, params: &SsimParams) -> Result<(f64, SsimMap)> {
    params.validate()?;
    check_dims((a.width(), a.height()), (b.width(), b.height()))?;
    let (w, h) = (a.width() as usize, a.height() as usize);
    let side = params.window;
    if w < side || h < side {
        return Err(Error::WindowTooLarge {
            window: side,
            width: a.width(),
            height: a.height(),
        });
    }

    let pa: Vec<f64> = a.pixels().iter().map(|&p| p as f64).collect();
    let pb: Vec<f64> = b.pixels().iter().map(|&p| p as f64).collect();
    let paa: Vec<f64> = pa.iter().map(|v| v * v).collect();
    let pbb: Vec<f64> = pb.iter().map(|v| v * v).collect();
    let pab: Vec<f64> = pa.iter().zip(&pb).map(|(x, y)| x * y).collect();

    let kernel = gaussian_kernel(side, params.sigma);
    let mu_a = separable_valid(&pa, w, h, &kernel);
    let mu_b = separable_valid(&pb, w, h, &kernel);
    let mu_aa = separable_valid(&paa, w, h, &kernel);
    let mu_bb = separable_valid(&pbb, w, h, &kernel);
    let mu_ab = separable_valid(&pab, w, h, &kernel);

    let (c1, c2, c3) = (params.c1(), params.c2(), params.c3());
    let mut values = Vec::with_capacity(mu_a.len());
    for i in 0..mu_a.len() {
        let (ma, mb) = (mu_a[i], mu_b[i]);
        let var_a = (mu_aa[i] - ma * ma).max(0.0);
        let var_b = (mu_bb[i] - mb * mb).max(0.0);
        let cov = mu_ab[i] - ma * mb;
        let (sa, sb) = (var_a.sqrt(), var_b.sqrt());
        let l = (2.0 * ma * mb + c1) / (ma * ma + mb * mb + c1);
        let c = (2.0 * sa * sb + c2) / (var_a + var_b + c2);
        let s = (cov + c3) / (sa * sb + c3);
        values.push(
            powf_or_skip(l, params.exponent_l)
                * powf_or_skip(c, params.exponent_c)
                * powf_or_skip(s, params.exponent_s),
        );
    }
    let mssim = pairwise_sum(&values) / values.len() as f64;
    Ok((
        mssim,
        SsimMap {
            width: (w - side + 1) as u32,
            height: (h - side + 1) as u32,
            values,
        },
    ))
}

/// Parameters echoed into the metrics report.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ReportParams {
    pub mse_scale: MseScale,
    pub ssim: SsimParams,
}

/// Evaluation summary serialized as `report.json`. Field names are the wire
/// format and must not change.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct MetricsReport {
    pub mse: f64,
    pub mssim: f64,
    pub ssim_min: f64,
    pub ssim_max: f64,
    pub window_count: u64,
    pub params: ReportParams,
}

/// Compute the full report for a pair of grayscale images.
pub fn evaluate_gray(
    a: &GrayImage,
    b: &GrayImage,
    scale: MseScale,
    params: &SsimParams,
) -> Result<MetricsReport> {
    let mse = mse_gray(a, b, scale)?;
    let (mssim, map) = ssim(a, b, params)?;
    Ok(MetricsReport {
        mse,
        mssim,
        ssim_min: map.min(),
        ssim_max: map.max(),
        window_count: map.values.len() as u64,
        params: ReportParams {
            mse_scale: scale,
            ssim: *params,
        },
    })
}

/// Compute the full report for a pair of masks: MSE on mask intensities,
/// SSIM on the 0/255 rendering.
pub fn evaluate_masks(
    a: &BinaryMask,
    b: &BinaryMask,
    scale: MseScale,
    params: &SsimParams,
) -> Result<MetricsReport> {
    let mse = mse_mask(a, b, scale)?;
    let (mssim, map) = ssim(&a.to_gray(), &b.to_gray(), params)?;
    Ok(MetricsReport {
        mse,
        mssim,
        ssim_min: map.min(),
        ssim_max: map.max(),
        window_count: map.values.len() as u64,
        params: ReportParams {
            mse_scale: scale,
            ssim: *params,
        },
    })
}
