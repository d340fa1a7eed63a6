//! Gabor filter bank responses summarized by 3×3-cell histograms of oriented
//! gradients.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::GrayImage;
use crate::math::{self, PI};

pub const SCALES: usize = 4;
pub const ORIENTATIONS: usize = 8;
pub const CELLS: usize = 9;
pub const DEFAULT_BINS: usize = 9;
pub const DEFAULT_WAVELENGTHS: [f64; SCALES] = [4.0, 6.0, 8.0, 12.0];
/// Block norms at or below this are treated as dead maps and left at zero.
const DEAD_BLOCK_NORM: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaborConfig {
    /// Carrier wavelengths in pixels, one per scale.
    pub wavelengths: Vec<f64>,
    /// Envelope sigma as a multiple of the wavelength.
    pub sigma_factor: f64,
    pub aspect_ratio: f64,
    /// Carrier phase in radians; 0 gives even-symmetric kernels.
    pub phase: f64,
}

impl Default for GaborConfig {
    fn default() -> Self {
        Self {
            wavelengths: DEFAULT_WAVELENGTHS.to_vec(),
            sigma_factor: 0.56,
            aspect_ratio: 1.0,
            phase: 0.0,
        }
    }
}

/// One DC-free real Gabor kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct GaborFilter {
    pub scale_index: usize,
    /// Direction of the carrier wave vector, radians.
    pub orientation: f64,
    pub wavelength: f64,
    pub sigma: f64,
    pub aspect_ratio: f64,
    pub phase: f64,
    pub radius: usize,
    /// `(2r+1)²` taps, row-major, zero mean.
    pub kernel: Vec<f64>,
    mean: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaborBank {
    pub filters: Vec<GaborFilter>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap {
    pub width: usize,
    pub height: usize,
    pub responses: Vec<f64>,
    pub scale_index: usize,
    pub orientation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaborHogDescriptor {
    pub values: Vec<f64>,
    pub bins: usize,
}

impl GaborHogDescriptor {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Per-map blocks of `9 · bins` values, in bank order.
    pub fn blocks(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks(CELLS * self.bins)
    }
}

impl GaborFilter {
    fn new(scale_index: usize, orientation: f64, wavelength: f64, cfg: &GaborConfig) -> Self {
        let sigma = cfg.sigma_factor * wavelength;
        let radius = math::ceil(3.0 * sigma) as usize;
        let r = radius as isize;
        let (ct, st) = (math::cos(orientation), math::sin(orientation));
        let mut kernel = Vec::with_capacity((2 * radius + 1).pow(2));
        for y in -r..=r {
            for x in -r..=r {
                let (xf, yf) = (x as f64, y as f64);
                let xr = xf * ct + yf * st;
                let yr = -xf * st + yf * ct;
                let env = math::exp(
                    -(xr * xr + cfg.aspect_ratio * cfg.aspect_ratio * yr * yr) / (2.0 * sigma * sigma),
                );
                kernel.push(env * math::cos(2.0 * PI * xr / wavelength + cfg.phase));
            }
        }
        let mean = kernel.iter().sum::<f64>() / kernel.len() as f64;
        kernel.iter_mut().for_each(|v| *v -= mean);
        Self {
            scale_index,
            orientation,
            wavelength,
            sigma,
            aspect_ratio: cfg.aspect_ratio,
            phase: cfg.phase,
            radius,
            kernel,
            mean,
        }
    }

    pub fn size(&self) -> usize {
        2 * self.radius + 1
    }

    pub fn orientation_degrees(&self) -> f64 {
        self.orientation * 180.0 / PI
    }
}

/// Builds the 4-scale × 8-orientation bank, orientations `0°, 22.5°, …, 157.5°`.
pub fn make_gabor_bank(cfg: &GaborConfig) -> Result<GaborBank> {
    if cfg.wavelengths.len() != SCALES {
        return Err(Error::config(
            "gabor.wavelengths",
            alloc::format!("expected {SCALES} wavelengths, got {}", cfg.wavelengths.len()),
        ));
    }
    if cfg.wavelengths.iter().any(|&l| !(l > 0.0) || !l.is_finite()) {
        return Err(Error::config("gabor.wavelengths", "wavelengths must be positive"));
    }
    if !(cfg.sigma_factor > 0.0) {
        return Err(Error::config("gabor.sigma_factor", "must be positive"));
    }
    if !(cfg.aspect_ratio > 0.0) {
        return Err(Error::config("gabor.aspect_ratio", "must be positive"));
    }
    let mut filters = Vec::with_capacity(SCALES * ORIENTATIONS);
    for (s, &lambda) in cfg.wavelengths.iter().enumerate() {
        for o in 0..ORIENTATIONS {
            let theta = o as f64 * PI / ORIENTATIONS as f64;
            filters.push(GaborFilter::new(s, theta, lambda, cfg));
        }
    }
    Ok(GaborBank { filters })
}

impl GaborBank {
    pub fn max_size(&self) -> usize {
        self.filters.iter().map(GaborFilter::size).max().unwrap_or(1)
    }
}

/// Image padded by `pad` pixels on every side with reflect-101 borders.
struct Padded {
    data: Vec<f64>,
    stride: usize,
    pad: usize,
}

impl Padded {
    fn new(src: &[f64], w: usize, h: usize, pad: usize) -> Self {
        let stride = w + 2 * pad;
        let mut data = Vec::with_capacity(stride * (h + 2 * pad));
        for py in 0..h + 2 * pad {
            let y = math::reflect(py as isize - pad as isize, h);
            for px in 0..stride {
                let x = math::reflect(px as isize - pad as isize, w);
                data.push(src[y * w + x]);
            }
        }
        Self { data, stride, pad }
    }
}

/// Reference 2-D convolution with reflective borders.
pub fn convolve_direct(img: &GrayImage, f: &GaborFilter) -> Vec<f64> {
    convolve_direct_raw(img.pixels(), img.width(), img.height(), f)
}

/// Separable evaluation valid for isotropic envelopes:
/// `K = g(u)g(v)[cos(a·u+φ)cos(b·v) − sin(a·u+φ)sin(b·v)] − mean`.
fn convolve_separable(pad: &Padded, w: usize, h: usize, box_sum: &[f64], f: &GaborFilter) -> Vec<f64> {
    let r = f.radius;
    let n = 2 * r + 1;
    let a = 2.0 * PI * math::cos(f.orientation) / f.wavelength;
    let b = 2.0 * PI * math::sin(f.orientation) / f.wavelength;
    let mut hc = Vec::with_capacity(n);
    let mut hs = Vec::with_capacity(n);
    let mut vc = Vec::with_capacity(n);
    let mut vs = Vec::with_capacity(n);
    for i in 0..n {
        let t = i as f64 - r as f64;
        let g = math::exp(-(t * t) / (2.0 * f.sigma * f.sigma));
        hc.push(g * math::cos(a * t + f.phase));
        hs.push(g * math::sin(a * t + f.phase));
        vc.push(g * math::cos(b * t));
        vs.push(g * math::sin(b * t));
    }
    // Horizontal pass over rows y - r ..= y + r of the padded image.
    let rows = h + 2 * r;
    let row0 = pad.pad - r;
    let mut tc = vec![0.0; rows * w];
    let mut ts = vec![0.0; rows * w];
    for ry in 0..rows {
        let src = &pad.data[(row0 + ry) * pad.stride..];
        for x in 0..w {
            // out(x) = Σ_u h(u) I(x − u); u = t − r, so I index = x + r − t.
            let base = pad.pad + x + r;
            let (mut sc, mut ss) = (0.0, 0.0);
            for t in 0..n {
                let v = src[base - t];
                sc += hc[t] * v;
                ss += hs[t] * v;
            }
            tc[ry * w + x] = sc;
            ts[ry * w + x] = ss;
        }
    }
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        let o = &mut out[y * w..(y + 1) * w];
        for t in 0..n {
            let ry = y + 2 * r - t;
            let rc = &tc[ry * w..(ry + 1) * w];
            let rs = &ts[ry * w..(ry + 1) * w];
            let (kc, ks) = (vc[t], vs[t]);
            for ((ov, c), s) in o.iter_mut().zip(rc).zip(rs) {
                *ov += kc * c - ks * s;
            }
        }
        for (ov, bs) in o.iter_mut().zip(&box_sum[y * w..(y + 1) * w]) {
            *ov -= f.mean * bs;
        }
    }
    out
}

/// Window sums of `(2r+1)²` around every pixel of the padded image.
fn window_sums(pad: &Padded, w: usize, h: usize, r: usize) -> Vec<f64> {
    let rows = h + 2 * r;
    let row0 = pad.pad - r;
    let mut tmp = vec![0.0; rows * w];
    for ry in 0..rows {
        let src = &pad.data[(row0 + ry) * pad.stride..];
        for x in 0..w {
            let c = pad.pad + x;
            tmp[ry * w + x] = src[c - r..=c + r].iter().sum();
        }
    }
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for t in 0..=2 * r {
            let row = &tmp[(y + t) * w..(y + t + 1) * w];
            for (o, v) in out[y * w..(y + 1) * w].iter_mut().zip(row) {
                *o += v;
            }
        }
    }
    out
}

/// Filters the image with every kernel of the bank.
///
/// The image is centred on its global mean first; the kernels are DC-free so
/// this only removes rounding residue and makes flat images map to exact zeros.
pub fn apply_bank(img: &GrayImage, bank: &GaborBank) -> Result<Vec<FeatureMap>> {
    let (w, h) = (img.width(), img.height());
    let need = bank.max_size();
    if w < need || h < need {
        return Err(Error::ImageTooSmall {
            width: w,
            height: h,
            min: need,
        });
    }
    let mean = img.mean();
    let centred: Vec<f64> = img.pixels().iter().map(|v| v - mean).collect();
    let max_r = bank.filters.iter().map(|f| f.radius).max().unwrap_or(0);
    let pad = Padded::new(&centred, w, h, max_r);
    let mut box_cache: Vec<(usize, Vec<f64>)> = Vec::new();
    let mut maps = Vec::with_capacity(bank.filters.len());
    for f in &bank.filters {
        let responses = if f.aspect_ratio == 1.0 {
            let bs = match box_cache.iter().position(|(r, _)| *r == f.radius) {
                Some(i) => i,
                None => {
                    box_cache.push((f.radius, window_sums(&pad, w, h, f.radius)));
                    box_cache.len() - 1
                }
            };
            convolve_separable(&pad, w, h, &box_cache[bs].1, f)
        } else {
            convolve_direct_raw(&centred, w, h, f)
        };
        maps.push(FeatureMap {
            width: w,
            height: h,
            responses,
            scale_index: f.scale_index,
            orientation: f.orientation,
        });
    }
    Ok(maps)
}

fn convolve_direct_raw(src: &[f64], w: usize, h: usize, f: &GaborFilter) -> Vec<f64> {
    let r = f.radius as isize;
    let size = f.size();
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for v in -r..=r {
                let yy = math::reflect(y as isize - v, h);
                for u in -r..=r {
                    let xx = math::reflect(x as isize - u, w);
                    acc += f.kernel[(v + r) as usize * size + (u + r) as usize] * src[yy * w + xx];
                }
            }
            out[y * w + x] = acc;
        }
    }
    out
}

/// Magnitude-weighted histogram of unsigned gradient orientation over a 3×3
/// cell grid, L2-normalized as a single block.
///
/// Bin `i` is centred on `i · 180° / bins`; votes are split linearly between
/// the two nearest centres, wrapping at 180°. The last cell row/column absorbs
/// the remainder pixels.
pub fn hog_of_map(map: &FeatureMap, bins: usize) -> Result<Vec<f64>> {
    let (w, h) = (map.width, map.height);
    if w < 3 || h < 3 {
        return Err(Error::ImageTooSmall {
            width: w,
            height: h,
            min: 3,
        });
    }
    if bins == 0 {
        return Err(Error::config("gabor.bins", "must be >= 1"));
    }
    let (cw, ch) = (w / 3, h / 3);
    let bin_width = PI / bins as f64;
    let p = &map.responses;
    let mut hist = vec![0.0; CELLS * bins];
    for y in 0..h {
        let ym = y.saturating_sub(1);
        let yp = (y + 1).min(h - 1);
        let cy = (y / ch).min(2);
        for x in 0..w {
            let xm = x.saturating_sub(1);
            let xp = (x + 1).min(w - 1);
            let gx = p[y * w + xp] - p[y * w + xm];
            let gy = p[yp * w + x] - p[ym * w + x];
            let mag = math::sqrt(gx * gx + gy * gy);
            if mag == 0.0 {
                continue;
            }
            let ang = math::wrap_pi(math::atan2(gy, gx));
            let pos = ang / bin_width;
            let lo_f = math::floor(pos);
            let frac = pos - lo_f;
            let lo = (lo_f as usize) % bins;
            let hi = (lo + 1) % bins;
            let cell = cy * 3 + (x / cw).min(2);
            let base = cell * bins;
            hist[base + lo] += mag * (1.0 - frac);
            hist[base + hi] += mag * frac;
        }
    }
    let norm = math::sqrt(hist.iter().map(|v| v * v).sum::<f64>());
    if norm > DEAD_BLOCK_NORM {
        hist.iter_mut().for_each(|v| *v /= norm);
    } else {
        hist.fill(0.0);
    }
    Ok(hist)
}

pub fn build_gabor_hog(img: &GrayImage, bank: &GaborBank, bins: usize) -> Result<GaborHogDescriptor> {
    let maps = apply_bank(img, bank)?;
    let mut values = Vec::with_capacity(maps.len() * CELLS * bins);
    for m in &maps {
        values.extend(hog_of_map(m, bins)?);
    }
    Ok(GaborHogDescriptor { values, bins })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grating(w: usize, h: usize, lambda: f64, alpha: f64) -> GrayImage {
        GrayImage::from_fn(w, h, |x, y| {
            let t = (x as f64 * alpha.cos() + y as f64 * alpha.sin()) / lambda;
            128.0 + 60.0 * (2.0 * PI * t).cos()
        })
    }

    fn mean_abs(m: &FeatureMap) -> f64 {
        m.responses.iter().map(|v| v.abs()).sum::<f64>() / m.responses.len() as f64
    }

    #[test]
    fn default_bank_shape_and_dc() {
        let bank = make_gabor_bank(&GaborConfig::default()).unwrap();
        assert_eq!(bank.filters.len(), 32);
        for f in &bank.filters {
            assert!(f.kernel.iter().sum::<f64>().abs() < 1e-9);
        }
        assert_eq!(bank.filters[9].scale_index, 1);
        assert!((bank.filters[9].orientation_degrees() - 22.5).abs() < 1e-12);
    }

    #[test]
    fn invalid_wavelength() {
        let cfg = GaborConfig {
            wavelengths: vec![4.0, -1.0, 8.0, 12.0],
            ..GaborConfig::default()
        };
        assert!(matches!(make_gabor_bank(&cfg), Err(Error::InvalidConfig { .. })));
    }

    #[test]
    fn constant_image_gives_zero_maps() {
        let bank = make_gabor_bank(&GaborConfig::default()).unwrap();
        let img = GrayImage::from_fn(64, 64, |_, _| 173.0);
        let maps = apply_bank(&img, &bank).unwrap();
        assert_eq!(maps.len(), 32);
        for m in &maps {
            assert_eq!((m.width, m.height), (64, 64));
            assert!(m.responses.iter().all(|v| v.abs() <= 1e-6));
        }
        let d = build_gabor_hog(&img, &bank, 9).unwrap();
        assert_eq!(d.len(), 2592);
        assert!(d.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn separable_matches_direct() {
        let bank = make_gabor_bank(&GaborConfig::default()).unwrap();
        let img = GrayImage::from_fn(70, 66, |x, y| {
            ((x * 37 + y * 11) % 97) as f64 + 40.0 * ((x as f64) * 0.3).sin()
        });
        let mean = img.mean();
        let centred = GrayImage::from_fn(70, 66, |x, y| img.get(x, y) - mean + 100.0);
        let maps = apply_bank(&img, &bank).unwrap();
        for i in [0usize, 5, 13, 22, 31] {
            let direct = convolve_direct(&centred, &bank.filters[i]);
            for (a, b) in maps[i].responses.iter().zip(&direct) {
                assert!((a - b).abs() < 1e-8, "filter {i}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn anisotropic_bank_uses_direct_path() {
        let cfg = GaborConfig {
            aspect_ratio: 0.5,
            wavelengths: vec![3.0, 3.5, 4.0, 4.5],
            ..GaborConfig::default()
        };
        let bank = make_gabor_bank(&cfg).unwrap();
        let img = grating(40, 40, 4.0, 0.0);
        let maps = apply_bank(&img, &bank).unwrap();
        let mean = img.mean();
        let centred = GrayImage::from_fn(40, 40, |x, y| img.get(x, y) - mean + 100.0);
        let direct = convolve_direct(&centred, &bank.filters[3]);
        for (a, b) in maps[3].responses.iter().zip(&direct) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn matched_orientation_responds_most() {
        let bank = make_gabor_bank(&GaborConfig::default()).unwrap();
        for (scale, &lambda) in DEFAULT_WAVELENGTHS.iter().enumerate() {
            for o in 0..8 {
                let alpha = o as f64 * PI / 8.0;
                let img = grating(96, 96, lambda, alpha);
                let maps = apply_bank(&img, &bank).unwrap();
                let energies: Vec<f64> = maps[scale * 8..scale * 8 + 8].iter().map(mean_abs).collect();
                let best = (0..8)
                    .max_by(|&a, &b| energies[a].partial_cmp(&energies[b]).unwrap())
                    .unwrap();
                assert_eq!(best, o, "scale {scale}, energies {energies:?}");
            }
        }
    }

    #[test]
    fn hog_of_constant_and_ramp() {
        let flat = FeatureMap {
            width: 30,
            height: 30,
            responses: vec![4.0; 900],
            scale_index: 0,
            orientation: 0.0,
        };
        let h = hog_of_map(&flat, 9).unwrap();
        assert_eq!(h.len(), 81);
        assert!(h.iter().all(|&v| v == 0.0));

        let ramp = FeatureMap {
            responses: (0..900).map(|i| (i % 30) as f64).collect(),
            ..flat
        };
        let h = hog_of_map(&ramp, 9).unwrap();
        for cell in h.chunks(9) {
            assert!(cell[0] > 0.0);
            assert!(cell[1..].iter().all(|&v| v == 0.0));
        }
        let norm: f64 = h.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hog_linear_interpolation() {
        // 45° unsigned gradient with 9 bins of 20°: pos = 2.25 → 75% bin 2, 25% bin 3.
        let map = FeatureMap {
            width: 9,
            height: 9,
            responses: (0..81).map(|i| ((i % 9) + (i / 9)) as f64).collect(),
            scale_index: 0,
            orientation: 0.0,
        };
        let h = hog_of_map(&map, 9).unwrap();
        let centre = &h[4 * 9..5 * 9];
        assert!((centre[2] / centre[3] - 3.0).abs() < 1e-9);
    }

    #[test]
    fn descriptor_blocks_unit_norm_and_offset_invariant() {
        let bank = make_gabor_bank(&GaborConfig::default()).unwrap();
        let img = GrayImage::from_fn(80, 72, |x, y| {
            120.0 + 50.0 * ((x as f64 * 0.7 + y as f64 * 0.4).sin() * (y as f64 * 0.05).cos())
        });
        let shifted = GrayImage::from_fn(80, 72, |x, y| img.get(x, y) + 20.0);
        let a = build_gabor_hog(&img, &bank, 9).unwrap();
        let b = build_gabor_hog(&shifted, &bank, 9).unwrap();
        for block in a.blocks() {
            let n: f64 = block.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!((n - 1.0).abs() < 1e-9);
        }
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!((x - y).abs() < 1e-6);
        }
        assert_eq!(a, build_gabor_hog(&img, &bank, 9).unwrap());
    }

    #[test]
    fn too_small_for_bank() {
        let bank = make_gabor_bank(&GaborConfig::default()).unwrap();
        let img = GrayImage::from_fn(30, 30, |x, _| x as f64);
        assert!(matches!(apply_bank(&img, &bank), Err(Error::ImageTooSmall { .. })));
    }
}
