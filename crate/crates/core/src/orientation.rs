//! Dense ridge orientation: Sobel gradients, windowed doubled-angle
//! estimation, Gaussian smoothing, alignment to the dominant orientation and
//! quantization into eight levels.
//!
//! Angles are in radians, image coordinates (x to the right, y downward).

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::image::{ForegroundMask, GrayImage};
use crate::math::{self, FRAC_PI_2, PI};

pub const DEFAULT_WINDOW: usize = 17;
pub const DEFAULT_SMOOTH_SIGMA: f64 = 3.0;
/// Number of quantized orientation levels.
pub const LEVELS: usize = 8;
const HIST_BINS: usize = 180;

/// Sobel responses; pixels without full 3×3 support are invalid.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientField {
    pub width: usize,
    pub height: usize,
    pub gx: Vec<f64>,
    pub gy: Vec<f64>,
    pub valid: Vec<bool>,
}

/// Per-pixel ridge orientation in `[0, π)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrientationField {
    pub width: usize,
    pub height: usize,
    pub theta: Vec<f64>,
    /// `|(Gxx, Gyy)| / Σ(gx² + gy²)` in `[0, 1]`, when computed from gradients.
    pub coherence: Option<Vec<f64>>,
    pub valid: Vec<bool>,
}

/// Orientation levels `1..=8`; invalid pixels hold 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuantizedOrientationField {
    pub width: usize,
    pub height: usize,
    pub bins: Vec<u8>,
    pub valid: Vec<bool>,
}

impl OrientationField {
    /// A field with every pixel valid.
    pub fn from_angles(width: usize, height: usize, theta: Vec<f64>) -> Result<Self> {
        if theta.len() != width * height {
            return Err(Error::DimensionMismatch {
                expected: width * height,
                found: theta.len(),
            });
        }
        Ok(Self {
            width,
            height,
            theta: theta.into_iter().map(math::wrap_pi).collect(),
            coherence: None,
            valid: vec![true; width * height],
        })
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|&&v| v).count()
    }

    /// Invalidates every pixel outside the foreground mask.
    pub fn restrict_to(&mut self, mask: &ForegroundMask) -> Result<()> {
        if mask.width() != self.width || mask.height() != self.height {
            return Err(Error::DimensionMismatch {
                expected: self.width * self.height,
                found: mask.width() * mask.height(),
            });
        }
        for (v, &m) in self.valid.iter_mut().zip(mask.flags()) {
            *v &= m;
        }
        Ok(())
    }

    /// Adds a constant to every valid angle, modulo π.
    pub fn offset(&self, delta: f64) -> Self {
        let mut out = self.clone();
        for (t, &v) in out.theta.iter_mut().zip(&self.valid) {
            if v {
                *t = math::wrap_pi(*t + delta);
            }
        }
        out
    }
}

impl QuantizedOrientationField {
    pub fn new(width: usize, height: usize, bins: Vec<u8>, valid: Vec<bool>) -> Result<Self> {
        let n = width * height;
        if bins.len() != n || valid.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: bins.len().min(valid.len()),
            });
        }
        if bins
            .iter()
            .zip(&valid)
            .any(|(&b, &v)| v && !(1..=LEVELS as u8).contains(&b))
        {
            return Err(Error::InvalidImage("quantized level outside 1..=8".into()));
        }
        Ok(Self {
            width,
            height,
            bins,
            valid,
        })
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> Option<u8> {
        let i = y * self.width + x;
        self.valid[i].then_some(self.bins[i])
    }
}

/// 3×3 Sobel gradients. `gx` uses rows `[-1 0 1; -2 0 2; -1 0 1]`, `gy` its
/// transpose.
pub fn compute_gradients(img: &GrayImage) -> Result<GradientField> {
    let (w, h) = (img.width(), img.height());
    img.ensure_min_size(3)?;
    let mut gx = vec![0.0; w * h];
    let mut gy = vec![0.0; w * h];
    let mut valid = vec![false; w * h];
    let p = img.pixels();
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            let at = |dx: isize, dy: isize| {
                p[(y as isize + dy) as usize * w + (x as isize + dx) as usize]
            };
            let i = y * w + x;
            gx[i] = (at(1, -1) + 2.0 * at(1, 0) + at(1, 1)) - (at(-1, -1) + 2.0 * at(-1, 0) + at(-1, 1));
            gy[i] = (at(-1, 1) + 2.0 * at(0, 1) + at(1, 1)) - (at(-1, -1) + 2.0 * at(0, -1) + at(1, -1));
            valid[i] = true;
        }
    }
    Ok(GradientField {
        width: w,
        height: h,
        gx,
        gy,
        valid,
    })
}

/// Sums `src` over a `(2r+1)`-wide box, truncated at the borders. Direct
/// summation, so an all-zero neighbourhood sums to exactly zero.
fn box_sum(src: &[f64], w: usize, h: usize, r: usize) -> Vec<f64> {
    let mut tmp = vec![0.0; w * h];
    for y in 0..h {
        let row = &src[y * w..(y + 1) * w];
        for x in 0..w {
            let lo = x.saturating_sub(r);
            let hi = (x + r).min(w - 1);
            tmp[y * w + x] = row[lo..=hi].iter().sum();
        }
    }
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        let lo = y.saturating_sub(r);
        let hi = (y + r).min(h - 1);
        for yy in lo..=hi {
            let src_row = &tmp[yy * w..(yy + 1) * w];
            for (o, s) in out[y * w..(y + 1) * w].iter_mut().zip(src_row) {
                *o += s;
            }
        }
    }
    out
}

/// Ridge orientation from gradients pooled over a `w`×`w` window.
///
/// `theta = (½·atan2(Gyy, Gxx) + π/2) mod π`: the ridge runs perpendicular to
/// the dominant gradient. Windows with no gradient energy are invalid.
pub fn estimate_orientation(grad: &GradientField, window: usize) -> Result<OrientationField> {
    if window < 3 || window % 2 == 0 {
        return Err(Error::config("orientation.w", "window must be odd and >= 3"));
    }
    let (w, h) = (grad.width, grad.height);
    let n = w * h;
    let mut gxy2 = vec![0.0; n];
    let mut gxx_yy = vec![0.0; n];
    let mut energy = vec![0.0; n];
    for i in 0..n {
        if grad.valid[i] {
            let (a, b) = (grad.gx[i], grad.gy[i]);
            gxy2[i] = 2.0 * a * b;
            gxx_yy[i] = a * a - b * b;
            energy[i] = a * a + b * b;
        }
    }
    let r = window / 2;
    let syy = box_sum(&gxy2, w, h, r);
    let sxx = box_sum(&gxx_yy, w, h, r);
    let se = box_sum(&energy, w, h, r);

    let mut theta = vec![0.0; n];
    let mut coherence = vec![0.0; n];
    let mut valid = vec![false; n];
    for i in 0..n {
        if !grad.valid[i] || se[i] <= 0.0 || (syy[i] == 0.0 && sxx[i] == 0.0) {
            continue;
        }
        theta[i] = math::wrap_pi(0.5 * math::atan2(syy[i], sxx[i]) + FRAC_PI_2);
        coherence[i] = (math::sqrt(syy[i] * syy[i] + sxx[i] * sxx[i]) / se[i]).min(1.0);
        valid[i] = true;
    }
    Ok(OrientationField {
        width: w,
        height: h,
        theta,
        coherence: Some(coherence),
        valid,
    })
}

/// Normalized 1-D Gaussian truncated at `3·sigma`.
pub(crate) fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let r = math::ceil(3.0 * sigma) as isize;
    let mut k: Vec<f64> = (-r..=r)
        .map(|i| math::exp(-((i * i) as f64) / (2.0 * sigma * sigma)))
        .collect();
    let s: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= s);
    k
}

/// Separable zero-padded convolution with a symmetric kernel.
fn convolve_separable(src: &[f64], w: usize, h: usize, k: &[f64]) -> Vec<f64> {
    let r = (k.len() / 2) as isize;
    let mut tmp = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (j, kv) in k.iter().enumerate() {
                let xx = x as isize + j as isize - r;
                if xx >= 0 && (xx as usize) < w {
                    acc += kv * src[y * w + xx as usize];
                }
            }
            tmp[y * w + x] = acc;
        }
    }
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for (j, kv) in k.iter().enumerate() {
            let yy = y as isize + j as isize - r;
            if yy < 0 || yy as usize >= h {
                continue;
            }
            let src_row = &tmp[yy as usize * w..(yy as usize + 1) * w];
            for (o, s) in out[y * w..(y + 1) * w].iter_mut().zip(src_row) {
                *o += kv * s;
            }
        }
    }
    out
}

/// Gaussian smoothing in doubled-angle space over valid pixels only.
pub fn smooth_orientation(of: &OrientationField, sigma: f64) -> Result<OrientationField> {
    if !(sigma > 0.0) {
        return Err(Error::config("orientation.sigma", "must be > 0"));
    }
    let (w, h) = (of.width, of.height);
    let mut c = vec![0.0; w * h];
    let mut s = vec![0.0; w * h];
    for i in 0..w * h {
        if of.valid[i] {
            c[i] = math::cos(2.0 * of.theta[i]);
            s[i] = math::sin(2.0 * of.theta[i]);
        }
    }
    let k = gaussian_kernel(sigma);
    let cs = convolve_separable(&c, w, h, &k);
    let ss = convolve_separable(&s, w, h, &k);
    let mut out = of.clone();
    for i in 0..w * h {
        if of.valid[i] && (cs[i] != 0.0 || ss[i] != 0.0) {
            out.theta[i] = math::wrap_pi(0.5 * math::atan2(ss[i], cs[i]));
        }
    }
    Ok(out)
}

#[inline]
fn degrees(rad: f64) -> f64 {
    rad * (180.0 / PI)
}

/// Peak of the 1°-resolution histogram of valid orientations, returned as the
/// bin centre in radians. Ties go to the smallest angle.
pub fn dominant_orientation(of: &OrientationField) -> Result<f64> {
    let mut hist = [0usize; HIST_BINS];
    let mut any = false;
    for (&t, &v) in of.theta.iter().zip(&of.valid) {
        if v {
            let b = (math::floor(degrees(t)) as isize).clamp(0, HIST_BINS as isize - 1) as usize;
            hist[b] += 1;
            any = true;
        }
    }
    if !any {
        return Err(Error::NoValidPixels);
    }
    let mut best = 0;
    for (i, &c) in hist.iter().enumerate() {
        if c > hist[best] {
            best = i;
        }
    }
    Ok((best as f64 + 0.5) * PI / 180.0)
}

/// Rotates valid orientations relative to `dominant`:
/// `ψ = θ − Θ` when `θ ≥ Θ`, else `π − Θ + θ`.
pub fn align_to_dominant(of: &OrientationField, dominant: f64) -> Result<OrientationField> {
    if !(0.0..PI).contains(&dominant) {
        return Err(Error::config("dominant", "must lie in [0, π)"));
    }
    let mut out = of.clone();
    for (t, &v) in out.theta.iter_mut().zip(&of.valid) {
        if v {
            let psi = if *t >= dominant {
                *t - dominant
            } else {
                PI - dominant + *t
            };
            *t = if psi >= PI { psi - PI } else { psi };
        }
    }
    Ok(out)
}

/// Eight half-open 22.5° levels: `(0, 22.5] → 1`, …, `(157.5, 180] → 8`.
/// An angle of exactly 0 is treated as 180°.
#[inline]
pub fn quantize_angle(rad: f64) -> u8 {
    let deg = degrees(rad);
    if deg <= 0.0 {
        return LEVELS as u8;
    }
    (math::ceil(deg / 22.5 - 1e-12) as i64).clamp(1, LEVELS as i64) as u8
}

pub fn quantize(of: &OrientationField) -> QuantizedOrientationField {
    let bins = of
        .theta
        .iter()
        .zip(&of.valid)
        .map(|(&t, &v)| if v { quantize_angle(t) } else { 0 })
        .collect();
    QuantizedOrientationField {
        width: of.width,
        height: of.height,
        bins,
        valid: of.valid.clone(),
    }
}
