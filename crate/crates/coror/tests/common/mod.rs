#![allow(dead_code)]

use std::path::{Path, PathBuf};

use coror::corpus::write_corpus;
use coror::protocol::train_model;
use coror_core::synth::SynthConfig;
use coror_core::{CcaModel, Extractor, PipelineConfig};

pub fn small_corpus(seed: u64, fingers: usize) -> SynthConfig {
    SynthConfig {
        seed,
        n_fingers: fingers,
        canvas: 128,
        ..SynthConfig::default()
    }
}

/// Writes a corpus under `root/corpus` and fits a model on its first sensor.
pub fn corpus_and_model(root: &Path, seed: u64, fingers: usize) -> (PathBuf, CcaModel, Extractor) {
    let cfg = small_corpus(seed, fingers);
    let dir = root.join("corpus");
    write_corpus(&cfg, &dir).unwrap();
    let extractor = Extractor::new(PipelineConfig::default()).unwrap();
    let model = train_model(&extractor, &[dir.join("sensorA")]).unwrap();
    (dir, model, extractor)
}

pub fn run(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = coror::cli::dispatch(std::iter::once("coror").chain(args.iter().copied()), &mut out, &mut err);
    (
        code,
        String::from_utf8_lossy(&out).into_owned(),
        String::from_utf8_lossy(&err).into_owned(),
    )
}
