//! Alignment-free fingerprint verification across heterogeneous sensors.
//!
//! The crate is `no_std` (with `alloc`) and holds every pure algorithm of the
//! pipeline. IO, file formats and the command-line front end live in the
//! `coror` companion crate.
//!
//! Pipeline stages:
//!
//! 1. [`preprocess`]: mean/variance normalization and block-variance segmentation.
//! 2. [`orientation`]: Sobel gradients, dense ridge orientation, doubled-angle
//!    smoothing, alignment to the dominant orientation, 8-level quantization.
//! 3. [`coror`]: co-occurrence of quantized ridge orientations over several
//!    offsets and directions.
//! 4. [`gaborhog`]: 4-scale, 8-orientation Gabor bank followed by a 3×3-cell HoG
//!    on every response map.
//! 5. [`fusion`]: regularized canonical correlation analysis and projection of
//!    both descriptors into one fused vector.
//! 6. [`matcher`]: template store, city-block scoring and the min-over-templates
//!    rule.
//! 7. [`metrics`]: FMR/FNMR sweeps, EER, DET and fixed-FMR operating points.
//!
//! [`synth`] renders a seeded synthetic multi-sensor corpus and [`pipeline`]
//! wires the stages together behind one [`PipelineConfig`].
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

mod error;
mod math;

pub mod coror;
pub mod fusion;
pub mod gaborhog;
pub mod image;
pub mod linalg;
pub mod matcher;
pub mod metrics;
pub mod orientation;
pub mod pipeline;
pub mod preprocess;
pub mod synth;

pub use coror::{CoRorDescriptor, CoRorMatrix, Direction};
pub use error::{Error, Result};
pub use fusion::{CcaModel, DescriptorPairSet, FusionMode};
pub use gaborhog::{GaborBank, GaborConfig, GaborHogDescriptor};
pub use image::{ForegroundMask, GrayImage};
pub use matcher::{cityblock, Decision, MatchResult, TemplateDb, TemplateRecord};
pub use metrics::{compute_metrics, Metrics, ScoreSet};
pub use orientation::{GradientField, OrientationField, QuantizedOrientationField};
pub use pipeline::{Extractor, Features, PipelineConfig};
