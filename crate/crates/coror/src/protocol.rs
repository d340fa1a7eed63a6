//! Gallery/probe evaluation: every probe is scored against every gallery
//! finger's template set, and scores are routed by finger identity.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use coror_core::fusion::DescriptorPairSet;
use coror_core::matcher::{cityblock, min_score};
use coror_core::{fusion, CcaModel, Extractor, ScoreSet};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dataset::{scan_dataset, Sample};
use crate::error::{Error, Result};
use crate::imageio::load_image;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetSpec {
    pub tag: String,
    pub dir: PathBuf,
}

impl DatasetSpec {
    pub fn new(tag: impl Into<String>, dir: impl Into<PathBuf>) -> Self {
        Self {
            tag: tag.into(),
            dir: dir.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProtocolSpec {
    pub gallery: DatasetSpec,
    pub probe: DatasetSpec,
    /// Keep at most this many impostor comparisons, drawn with `seed`.
    pub impostor_cap: Option<usize>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub probe: PathBuf,
    pub subject: String,
    pub finger: String,
    pub genuine: bool,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolOutcome {
    pub scores: ScoreSet,
    pub comparisons: Vec<Comparison>,
}

fn canonical(p: &Path) -> PathBuf {
    p.canonicalize().unwrap_or_else(|_| p.to_path_buf())
}

/// Descriptor pairs `(coror, gaborhog)` for every sample, in order.
pub fn extract_pairs(extractor: &Extractor, samples: &[Sample]) -> Result<Vec<(Vec<f64>, Vec<f64>)>> {
    samples
        .par_iter()
        .map(|s| {
            let img = load_image(&s.path)?;
            let f = extractor.extract(&img)?;
            Ok((f.coror.values, f.gaborhog.values))
        })
        .collect()
}

/// Fits the fusion model on every image found in `dirs`.
pub fn train_model(extractor: &Extractor, dirs: &[PathBuf]) -> Result<CcaModel> {
    let mut samples = Vec::new();
    for d in dirs {
        samples.extend(scan_dataset(d)?);
    }
    let pairs = extract_pairs(extractor, &samples)?;
    let xs: Vec<&[f64]> = pairs.iter().map(|p| p.0.as_slice()).collect();
    let ys: Vec<&[f64]> = pairs.iter().map(|p| p.1.as_slice()).collect();
    let ids = samples.iter().map(|s| s.path.display().to_string()).collect();
    let set = DescriptorPairSet::new(&xs, &ys, ids)?;
    Ok(fusion::fit_cca(&set, &extractor.config().cca.options())?)
}

fn check_model(extractor: &Extractor, model: &CcaModel) -> Result<()> {
    let cfg = extractor.config();
    let (p, q) = (cfg.coror_len(), cfg.gaborhog_len());
    if model.p() != p || model.q() != q {
        return Err(coror_core::Error::ModelMismatch {
            expected: format!("descriptor lengths ({p}, {q}) from the configuration"),
            found: format!("({}, {})", model.p(), model.q()),
        }
        .into());
    }
    Ok(())
}

/// Fused vectors for each sample, extracting each distinct file once.
fn fuse_all(
    extractor: &Extractor,
    model: &CcaModel,
    sets: [&[Sample]; 2],
) -> Result<BTreeMap<PathBuf, Vec<f64>>> {
    let mut unique: BTreeMap<PathBuf, &Sample> = BTreeMap::new();
    for s in sets.into_iter().flatten() {
        unique.entry(canonical(&s.path)).or_insert(s);
    }
    let keys: Vec<_> = unique.into_iter().collect();
    keys.into_par_iter()
        .map(|(key, s)| {
            let img = load_image(&s.path)?;
            let f = extractor.extract(&img)?;
            Ok((key, model.project_fuse(&f.coror.values, &f.gaborhog.values)?))
        })
        .collect()
}

pub fn run_protocol(spec: &ProtocolSpec, model: &CcaModel, extractor: &Extractor) -> Result<ProtocolOutcome> {
    check_model(extractor, model)?;
    let gallery = scan_dataset(&spec.gallery.dir)?;
    let probes = scan_dataset(&spec.probe.dir)?;
    let fused = fuse_all(extractor, model, [&gallery, &probes])?;

    // Gallery fingers with their templates as (canonical path, vector).
    let mut fingers: BTreeMap<(String, String), Vec<(PathBuf, &[f64])>> = BTreeMap::new();
    for s in &gallery {
        let key = canonical(&s.path);
        let v = fused[&key].as_slice();
        fingers
            .entry((s.subject.clone(), s.finger.clone()))
            .or_default()
            .push((key, v));
    }
    let fingers: Vec<_> = fingers.into_iter().collect();

    // All (probe, finger) pairs with a nonempty template set once the probe
    // itself is excluded.
    let mut genuine_pairs = Vec::new();
    let mut impostor_pairs = Vec::new();
    for (pi, p) in probes.iter().enumerate() {
        let pkey = canonical(&p.path);
        for (fi, ((subject, finger), templates)) in fingers.iter().enumerate() {
            if templates.iter().all(|(k, _)| *k == pkey) {
                continue;
            }
            if p.finger_key() == (subject.as_str(), finger.as_str()) {
                genuine_pairs.push((pi, fi));
            } else {
                impostor_pairs.push((pi, fi));
            }
        }
    }
    if let Some(cap) = spec.impostor_cap.filter(|&c| c < impostor_pairs.len()) {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let mut keep = rand::seq::index::sample(&mut rng, impostor_pairs.len(), cap).into_vec();
        keep.sort_unstable();
        impostor_pairs = keep.into_iter().map(|i| impostor_pairs[i]).collect();
    }

    let score = |&(pi, fi): &(usize, usize), genuine: bool| -> Result<Comparison> {
        let p = &probes[pi];
        let pkey = canonical(&p.path);
        let probe = &fused[&pkey];
        let ((subject, finger), templates) = &fingers[fi];
        let per = templates
            .iter()
            .filter(|(k, _)| *k != pkey)
            .map(|(_, t)| cityblock(probe, t))
            .collect::<coror_core::Result<Vec<_>>>()?;
        Ok(Comparison {
            probe: p.path.clone(),
            subject: subject.clone(),
            finger: finger.clone(),
            genuine,
            score: min_score(&per),
        })
    };
    let mut comparisons: Vec<Comparison> = genuine_pairs
        .par_iter()
        .map(|pair| score(pair, true))
        .collect::<Result<_>>()?;
    comparisons.extend(
        impostor_pairs
            .par_iter()
            .map(|pair| score(pair, false))
            .collect::<Result<Vec<_>>>()?,
    );

    let mut scores = ScoreSet::default();
    for c in &comparisons {
        if c.genuine {
            scores.genuine.push(c.score);
        } else {
            scores.impostor.push(c.score);
        }
    }
    if scores.genuine.is_empty() || scores.impostor.is_empty() {
        return Err(Error::EmptyDataset(format!(
            "{} vs {}: no {} comparisons",
            spec.gallery.tag,
            spec.probe.tag,
            if scores.genuine.is_empty() { "genuine" } else { "impostor" }
        )));
    }
    Ok(ProtocolOutcome { scores, comparisons })
}
