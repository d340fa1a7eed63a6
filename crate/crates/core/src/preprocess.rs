//! Contrast normalization and block-variance segmentation.
//!
//! Normalization is the usual per-pixel mean/variance rescaling used ahead of
//! fingerprint enhancement. No ridge-frequency-tuned filtering is applied.

use alloc::vec;

use crate::error::{Error, Result};
use crate::image::{ForegroundMask, GrayImage};
use crate::math;

pub const DEFAULT_TARGET_MEAN: f64 = 100.0;
pub const DEFAULT_TARGET_VARIANCE: f64 = 100.0;
pub const DEFAULT_SEG_BLOCK: usize = 16;
pub const DEFAULT_SEG_THRESHOLD: f64 = 100.0;
/// Minimum foreground fraction before an image is rejected as empty.
pub const MIN_FOREGROUND_FRACTION: f64 = 0.05;

/// Rescales intensities to the requested global mean and variance.
///
/// Each pixel becomes `M0 ± sqrt(V0 (I - M)^2 / V)` with the sign of `I - M`,
/// then is clamped to `[0, 255]`.
pub fn normalize(img: &GrayImage, target_mean: f64, target_variance: f64) -> Result<GrayImage> {
    let mean = img.mean();
    let var = img.variance();
    if var <= f64::EPSILON * mean.max(1.0) {
        return Err(Error::ZeroVariance);
    }
    let scale = math::sqrt(target_variance / var);
    let out = GrayImage::from_fn(img.width(), img.height(), |x, y| {
        target_mean + scale * (img.get(x, y) - mean)
    });
    Ok(out.with_dpi(img.dpi()))
}

/// Marks `block`×`block` tiles whose intensity variance reaches the threshold.
///
/// Partial tiles at the right and bottom edges are evaluated on their actual
/// pixels.
pub fn segment(img: &GrayImage, block: usize, variance_threshold: f64) -> Result<ForegroundMask> {
    if block == 0 {
        return Err(Error::config("preprocessing.seg_block", "must be >= 1"));
    }
    let (w, h) = (img.width(), img.height());
    let mut flags = vec![false; w * h];
    for by in (0..h).step_by(block) {
        for bx in (0..w).step_by(block) {
            let y1 = (by + block).min(h);
            let x1 = (bx + block).min(w);
            if block_variance(img, bx, by, x1, y1) >= variance_threshold {
                for y in by..y1 {
                    flags[y * w + bx..y * w + x1].fill(true);
                }
            }
        }
    }
    let mask = ForegroundMask::new(w, h, flags)?;
    let frac = mask.fraction();
    if frac < MIN_FOREGROUND_FRACTION {
        return Err(Error::EmptyForeground {
            percent: frac * 100.0,
        });
    }
    Ok(mask)
}

fn block_variance(img: &GrayImage, x0: usize, y0: usize, x1: usize, y1: usize) -> f64 {
    let n = ((x1 - x0) * (y1 - y0)) as f64;
    let mut sum = 0.0;
    for y in y0..y1 {
        for x in x0..x1 {
            sum += img.get(x, y);
        }
    }
    let mean = sum / n;
    let mut acc = 0.0;
    for y in y0..y1 {
        for x in x0..x1 {
            let d = img.get(x, y) - mean;
            acc += d * d;
        }
    }
    acc / n
}
