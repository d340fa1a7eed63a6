//! End-to-end descriptor extraction under one validated configuration.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::coror::{self, CoRorDescriptor, Direction};
use crate::error::{Error, Result};
use crate::fusion::{hex, CcaOptions};
use crate::gaborhog::{self, GaborBank, GaborConfig, GaborHogDescriptor};
use crate::image::{ForegroundMask, GrayImage, MIN_EXTRACT_SIZE};
use crate::orientation::{self, OrientationField, QuantizedOrientationField};
use crate::preprocess;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PreprocessingConfig {
    pub target_mean: f64,
    pub target_variance: f64,
    pub seg_block: usize,
    pub seg_threshold: f64,
}

impl Default for PreprocessingConfig {
    fn default() -> Self {
        Self {
            target_mean: preprocess::DEFAULT_TARGET_MEAN,
            target_variance: preprocess::DEFAULT_TARGET_VARIANCE,
            seg_block: preprocess::DEFAULT_SEG_BLOCK,
            seg_threshold: preprocess::DEFAULT_SEG_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OrientationConfig {
    pub w: usize,
    pub sigma: f64,
}

impl Default for OrientationConfig {
    fn default() -> Self {
        Self {
            w: orientation::DEFAULT_WINDOW,
            sigma: orientation::DEFAULT_SMOOTH_SIGMA,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CororConfig {
    pub offsets: Vec<usize>,
    /// Degrees; each one of 0, 45, 90, 135.
    pub directions: Vec<Direction>,
}

impl Default for CororConfig {
    fn default() -> Self {
        Self {
            offsets: coror::OFFSETS_G1.to_vec(),
            directions: Direction::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaborSection {
    pub wavelengths: Vec<f64>,
    pub bins: usize,
    pub sigma_factor: f64,
    pub aspect_ratio: f64,
}

impl Default for GaborSection {
    fn default() -> Self {
        let g = GaborConfig::default();
        Self {
            wavelengths: g.wavelengths,
            bins: gaborhog::DEFAULT_BINS,
            sigma_factor: g.sigma_factor,
            aspect_ratio: g.aspect_ratio,
        }
    }
}

impl GaborSection {
    pub fn bank_config(&self) -> GaborConfig {
        GaborConfig {
            wavelengths: self.wavelengths.clone(),
            sigma_factor: self.sigma_factor,
            aspect_ratio: self.aspect_ratio,
            phase: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CcaSection {
    pub epsilon: f64,
    pub max_k: usize,
    pub fusion_mode: crate::fusion::FusionMode,
    pub variance_retained: f64,
}

impl Default for CcaSection {
    fn default() -> Self {
        let o = CcaOptions::default();
        Self {
            epsilon: o.epsilon,
            max_k: o.max_k,
            fusion_mode: o.fusion_mode,
            variance_retained: o.variance_retained,
        }
    }
}

impl CcaSection {
    pub fn options(&self) -> CcaOptions {
        CcaOptions {
            epsilon: self.epsilon,
            max_k: self.max_k,
            variance_retained: self.variance_retained,
            fusion_mode: self.fusion_mode,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub preprocessing: PreprocessingConfig,
    pub orientation: OrientationConfig,
    pub coror: CororConfig,
    pub gabor: GaborSection,
    pub cca: CcaSection,
}

fn positive(key: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::config(key, format!("must be positive, got {v}")))
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        let p = &self.preprocessing;
        if !(0.0..=255.0).contains(&p.target_mean) {
            return Err(Error::config("preprocessing.target_mean", "must lie in [0, 255]"));
        }
        positive("preprocessing.target_variance", p.target_variance)?;
        if p.seg_block == 0 {
            return Err(Error::config("preprocessing.seg_block", "must be >= 1"));
        }
        if !(p.seg_threshold >= 0.0) {
            return Err(Error::config("preprocessing.seg_threshold", "must be >= 0"));
        }
        let o = &self.orientation;
        if o.w < 3 || o.w % 2 == 0 {
            return Err(Error::config("orientation.w", "must be odd and >= 3"));
        }
        positive("orientation.sigma", o.sigma)?;
        let c = &self.coror;
        if c.offsets.is_empty() {
            return Err(Error::config("coror.offsets", "must not be empty"));
        }
        if let Some(&d) = c.offsets.iter().find(|&&d| d < 1 || d >= MIN_EXTRACT_SIZE) {
            return Err(Error::config(
                "coror.offsets",
                format!("offset {d} must lie in [1, {})", MIN_EXTRACT_SIZE),
            ));
        }
        if c.directions.is_empty() {
            return Err(Error::config("coror.directions", "must not be empty"));
        }
        let g = &self.gabor;
        if g.wavelengths.len() != gaborhog::SCALES {
            return Err(Error::config(
                "gabor.wavelengths",
                format!("expected {} wavelengths", gaborhog::SCALES),
            ));
        }
        for &l in &g.wavelengths {
            positive("gabor.wavelengths", l)?;
        }
        if g.bins == 0 {
            return Err(Error::config("gabor.bins", "must be >= 1"));
        }
        positive("gabor.sigma_factor", g.sigma_factor)?;
        positive("gabor.aspect_ratio", g.aspect_ratio)?;
        let k = &self.cca;
        if !(k.epsilon >= 0.0) {
            return Err(Error::config("cca.epsilon", "must be >= 0"));
        }
        if k.max_k == 0 {
            return Err(Error::config("cca.max_k", "must be >= 1"));
        }
        if !(k.variance_retained > 0.0 && k.variance_retained <= 1.0) {
            return Err(Error::config("cca.variance_retained", "must lie in (0, 1]"));
        }
        Ok(())
    }

    /// Hash of every extraction-relevant setting.
    pub fn extraction_hash(&self) -> String {
        let text = format!(
            "{:?}|{:?}|{:?}|{:?}",
            self.preprocessing, self.orientation, self.coror, self.gabor
        );
        hex(&Sha256::digest(text.as_bytes()))
    }

    pub fn coror_len(&self) -> usize {
        orientation::LEVELS * orientation::LEVELS * self.coror.offsets.len() * self.coror.directions.len()
    }

    pub fn gaborhog_len(&self) -> usize {
        gaborhog::SCALES * gaborhog::ORIENTATIONS * gaborhog::CELLS * self.gabor.bins
    }
}

/// Both descriptors plus the intermediate products useful for inspection.
#[derive(Debug, Clone)]
pub struct Features {
    pub coror: CoRorDescriptor,
    pub gaborhog: GaborHogDescriptor,
    pub mask: ForegroundMask,
    /// Smoothed orientation restricted to the foreground, before alignment.
    pub orientation: OrientationField,
    pub dominant: f64,
    pub quantized: QuantizedOrientationField,
}

/// Holds a validated configuration and the prebuilt Gabor bank.
#[derive(Debug, Clone)]
pub struct Extractor {
    config: PipelineConfig,
    bank: GaborBank,
}

impl Extractor {
    pub fn new(config: PipelineConfig) -> Result<Self> {
        config.validate()?;
        let bank = gaborhog::make_gabor_bank(&config.gabor.bank_config())?;
        Ok(Self { config, bank })
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    pub fn bank(&self) -> &GaborBank {
        &self.bank
    }

    /// Segments the raw image, normalizes it, then derives the aligned,
    /// quantized orientation field for Co-Ror and the Gabor-HoG descriptor
    /// from the normalized image.
    pub fn extract(&self, img: &GrayImage) -> Result<Features> {
        img.ensure_min_size(MIN_EXTRACT_SIZE)?;
        let pc = &self.config.preprocessing;
        let mask = preprocess::segment(img, pc.seg_block, pc.seg_threshold)?;
        let norm = preprocess::normalize(img, pc.target_mean, pc.target_variance)?;

        let grad = orientation::compute_gradients(&norm)?;
        let mut field = orientation::estimate_orientation(&grad, self.config.orientation.w)?;
        field.restrict_to(&mask)?;
        let field = orientation::smooth_orientation(&field, self.config.orientation.sigma)?;
        let dominant = orientation::dominant_orientation(&field)?;
        let aligned = orientation::align_to_dominant(&field, dominant)?;
        let quantized = orientation::quantize(&aligned);
        let coror = coror::build_coror(&quantized, &self.config.coror.offsets, &self.config.coror.directions)?;
        let gaborhog = gaborhog::build_gabor_hog(&norm, &self.bank, self.config.gabor.bins)?;
        Ok(Features {
            coror,
            gaborhog,
            mask,
            orientation: field,
            dominant,
            quantized,
        })
    }
}

/// SHA-256 of the image dimensions and 8-bit pixel values, hex encoded.
pub fn image_hash(img: &GrayImage) -> String {
    let mut h = Sha256::new();
    h.update((img.width() as u64).to_le_bytes());
    h.update((img.height() as u64).to_le_bytes());
    for v in img.pixels() {
        h.update(v.to_le_bytes());
    }
    hex(&h.finalize())
}
