//! Seeded synthetic fingerprints rendered through several sensor profiles.
//!
//! A finger is a smooth scalar "ridge phase" field whose level sets are the
//! ridges: one of a few global pattern classes (arch, loops, whorl) placed at a
//! random core with a random tilt, plus low-frequency warps that make every
//! finger distinct. A sensor profile re-renders the same finger with its own
//! geometric scale, contrast gain/offset, noise level and capture crop.
//! Impressions add a small rotation and translation.

use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::GrayImage;
use crate::math::{self, PI};

/// Base ridge period range in pixels at scale 1.
pub const PERIOD_RANGE: (f64, f64) = (5.0, 11.0);
pub const DEFAULT_CANVAS: usize = 224;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorProfile {
    pub name: String,
    /// Geometric magnification applied to the finger.
    pub scale: f64,
    pub gain: f64,
    pub offset: f64,
    pub noise_sigma: f64,
    /// Fraction of each side removed by the capture window.
    pub crop: f64,
}

impl SensorProfile {
    /// Reference optical-like sensor.
    pub fn reference() -> Self {
        Self {
            name: "sensorA".into(),
            scale: 1.0,
            gain: 1.0,
            offset: 0.0,
            noise_sigma: 2.0,
            crop: 0.0,
        }
    }

    /// Magnifying, lower-contrast, noisier sensor with a smaller window.
    pub fn secondary() -> Self {
        Self {
            name: "sensorB".into(),
            scale: 1.15,
            gain: 0.8,
            offset: 15.0,
            noise_sigma: 6.0,
            crop: 0.10,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |reason: &str| {
            Err(Error::InvalidProfile {
                name: self.name.clone(),
                reason: reason.into(),
            })
        };
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return bad("name must be a non-empty path component");
        }
        if !(self.scale > 0.0) || !self.scale.is_finite() {
            return bad("scale must be positive");
        }
        if !(self.gain > 0.0) || !self.gain.is_finite() {
            return bad("gain must be positive");
        }
        if !(self.noise_sigma >= 0.0) {
            return bad("noise sigma must be >= 0");
        }
        if !(0.0..0.5).contains(&self.crop) {
            return bad("crop must lie in [0, 0.5)");
        }
        if !self.offset.is_finite() {
            return bad("offset must be finite");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub seed: u64,
    pub n_fingers: usize,
    pub impressions_per_sensor: usize,
    pub profiles: Vec<SensorProfile>,
    pub canvas: usize,
    /// Maximum impression rotation, degrees.
    pub max_rotation_deg: f64,
    /// Maximum impression translation, pixels.
    pub max_shift: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            n_fingers: 50,
            impressions_per_sensor: 2,
            profiles: alloc::vec![SensorProfile::reference(), SensorProfile::secondary()],
            canvas: DEFAULT_CANVAS,
            max_rotation_deg: 5.0,
            max_shift: 6.0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_fingers < 2 {
            return Err(Error::config("fingers", "need at least 2 fingers"));
        }
        if self.impressions_per_sensor == 0 {
            return Err(Error::config("impressions", "need at least 1 impression"));
        }
        if self.profiles.len() < 2 {
            return Err(Error::config("profiles", "need at least 2 sensor profiles"));
        }
        for p in &self.profiles {
            p.validate()?;
        }
        for (i, p) in self.profiles.iter().enumerate() {
            if self.profiles[..i].iter().any(|o| o.name == p.name) {
                return Err(Error::InvalidProfile {
                    name: p.name.clone(),
                    reason: "duplicate profile name".into(),
                });
            }
        }
        if self.canvas < 96 {
            return Err(Error::config("canvas", "must be >= 96"));
        }
        Ok(())
    }

    /// Every `(finger, profile, impression)` triple in corpus order.
    pub fn jobs(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        (0..self.profiles.len()).flat_map(move |p| {
            (0..self.n_fingers)
                .flat_map(move |f| (0..self.impressions_per_sensor).map(move |i| (f, p, i)))
        })
    }

    /// `<subject>_<finger>_<impression>.png` with zero-padded subject.
    pub fn file_name(&self, finger: usize, impression: usize) -> String {
        alloc::format!("{:04}_1_{}.png", finger + 1, impression + 1)
    }

    pub fn render(&self, finger: usize, profile: usize, impression: usize) -> Result<GrayImage> {
        let model = FingerModel::generate(self.seed, finger);
        let p = self
            .profiles
            .get(profile)
            .ok_or_else(|| Error::config("profiles", "profile index out of range"))?;
        p.validate()?;
        let tag = ((finger as u64) << 24) | ((profile as u64) << 8) | impression as u64;
        let mut rng = stream(self.seed, 1 + tag);
        let rot = rng.random_range(-1.0..=1.0) * self.max_rotation_deg * PI / 180.0;
        let shift = (
            rng.random_range(-1.0..=1.0) * self.max_shift,
            rng.random_range(-1.0..=1.0) * self.max_shift,
        );
        let pressure = rng.random_range(0.9..1.1);
        Ok(model.render(p, self.canvas, rot, shift, pressure, &mut rng))
    }
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PatternClass {
    Arch,
    LeftLoop,
    RightLoop,
    Whorl,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Warp {
    amp: f64,
    kx: f64,
    ky: f64,
    phase: f64,
}

/// Geometry of one synthetic finger in finger coordinates (pixels at scale 1,
/// origin at the finger centre, y downward).
#[derive(Debug, Clone, PartialEq)]
pub struct FingerModel {
    pub class: PatternClass,
    pub period: f64,
    core: (f64, f64),
    tilt: f64,
    arch_height: f64,
    arch_width: f64,
    ellipticity: f64,
    semi_axes: (f64, f64),
    warps: Vec<Warp>,
}

impl FingerModel {
    pub fn generate(seed: u64, finger: usize) -> Self {
        let mut rng = stream(seed, (finger as u64) << 32);
        let class = match rng.random_range(0..4) {
            0 => PatternClass::Arch,
            1 => PatternClass::LeftLoop,
            2 => PatternClass::RightLoop,
            _ => PatternClass::Whorl,
        };
        let period = rng.random_range(PERIOD_RANGE.0..=PERIOD_RANGE.1);
        let core = (rng.random_range(-25.0..25.0), rng.random_range(-30.0..15.0));
        let tilt = rng.random_range(-0.5..0.5);
        let warps = (0..4)
            .map(|_| {
                let wavelength = rng.random_range(45.0..110.0);
                let dir = rng.random_range(0.0..PI);
                let k = 2.0 * PI / wavelength;
                Warp {
                    // keep |∇| of each warp below ~0.12
                    amp: rng.random_range(0.04..0.12) / k,
                    kx: k * math::cos(dir),
                    ky: k * math::sin(dir),
                    phase: rng.random_range(0.0..2.0 * PI),
                }
            })
            .collect();
        Self {
            class,
            period,
            core,
            tilt,
            arch_height: rng.random_range(12.0..35.0),
            arch_width: rng.random_range(25.0..50.0),
            ellipticity: rng.random_range(0.7..1.3),
            semi_axes: (rng.random_range(68.0..82.0), rng.random_range(88.0..102.0)),
            warps,
        }
    }

    /// Ridge phase in pixels; ridges are the level sets of this field.
    pub fn phase(&self, x: f64, y: f64) -> f64 {
        let (dx, dy) = (x - self.core.0, y - self.core.1);
        let (c, s) = (math::cos(self.tilt), math::sin(self.tilt));
        let u = c * dx + s * dy;
        let v = -s * dx + c * dy;
        let base = match self.class {
            PatternClass::Arch => {
                v + self.arch_height * math::exp(-(u * u) / (2.0 * self.arch_width * self.arch_width))
            }
            PatternClass::Whorl => {
                math::sqrt(u * u * self.ellipticity + v * v / self.ellipticity)
            }
            PatternClass::LeftLoop | PatternClass::RightLoop => {
                // Hairpin: semicircles above the core, parallel flow below that
                // bends sideways with depth.
                let side = if self.class == PatternClass::LeftLoop { -1.0 } else { 1.0 };
                let bend = if v > 0.0 { side * 0.35 * v * v / (v + 40.0) } else { 0.0 };
                let uu = u - bend;
                if v < 0.0 {
                    math::sqrt(uu * uu + v * v)
                } else {
                    math::abs(uu)
                }
            }
        };
        let warp: f64 = self
            .warps
            .iter()
            .map(|w| w.amp * math::sin(w.kx * x + w.ky * y + w.phase))
            .sum();
        base + warp
    }

    /// Foreground weight in `[0, 1]` from a soft elliptical contact region.
    fn contact(&self, x: f64, y: f64) -> f64 {
        let (a, b) = (x / self.semi_axes.0, y / self.semi_axes.1);
        let e = a * a + b * b;
        ((1.0 - e) * 6.0).clamp(0.0, 1.0)
    }

    #[allow(clippy::too_many_arguments)]
    fn render(
        &self,
        profile: &SensorProfile,
        canvas: usize,
        rotation: f64,
        shift: (f64, f64),
        pressure: f64,
        rng: &mut ChaCha8Rng,
    ) -> GrayImage {
        const BACKGROUND: f64 = 215.0;
        const DEPTH: f64 = 150.0;
        let crop_px = math::round(canvas as f64 * profile.crop) as usize;
        let out = canvas - crop_px;
        let (ox, oy) = if crop_px > 0 {
            (rng.random_range(0..=crop_px), rng.random_range(0..=crop_px))
        } else {
            (0, 0)
        };
        let centre = canvas as f64 / 2.0;
        let (c, s) = (math::cos(rotation), math::sin(rotation));
        let noise = Normal::new(0.0, profile.noise_sigma.max(1e-12)).expect("sigma validated");
        GrayImage::from_fn(out, out, |px, py| {
            let x = (px + ox) as f64 - centre;
            let y = (py + oy) as f64 - centre;
            // canvas -> finger coordinates: undo scale, rotation, shift
            let (sx, sy) = (x / profile.scale, y / profile.scale);
            let fx = c * sx + s * sy - shift.0;
            let fy = -s * sx + c * sy - shift.1;
            let w = self.contact(fx, fy);
            let ridge = 0.5 + 0.5 * math::cos(2.0 * PI * self.phase(fx, fy) / self.period);
            let clean = BACKGROUND - w * DEPTH * pressure * ridge;
            let n = if profile.noise_sigma > 0.0 {
                noise.sample(rng)
            } else {
                0.0
            };
            math::round(profile.gain * clean + profile.offset + n)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_sized() {
        let cfg = SynthConfig {
            n_fingers: 3,
            ..SynthConfig::default()
        };
        let a = cfg.render(1, 0, 0).unwrap();
        let b = cfg.render(1, 0, 0).unwrap();
        assert_eq!(a, b);
        assert_eq!((a.width(), a.height()), (224, 224));
        let c = cfg.render(1, 1, 0).unwrap();
        assert_eq!(c.width(), 224 - 22);
        assert_ne!(cfg.render(1, 0, 1).unwrap(), a);
        assert_eq!(cfg.jobs().count(), 3 * 2 * 2);
    }

    #[test]
    fn profile_validation() {
        let mut p = SensorProfile::secondary();
        p.scale = 0.0;
        assert!(matches!(p.validate(), Err(Error::InvalidProfile { .. })));
        let cfg = SynthConfig {
            profiles: alloc::vec![SensorProfile::reference()],
            ..SynthConfig::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn file_names() {
        let cfg = SynthConfig::default();
        assert_eq!(cfg.file_name(6, 1), "0007_1_2.png");
    }
}
