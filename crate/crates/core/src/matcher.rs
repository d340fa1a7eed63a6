//! Template store and city-block scoring. Scores are distances: smaller is
//! more similar, and a probe's score against a subject is the minimum over
//! that subject's templates.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fusion::CcaModel;
use crate::image::GrayImage;
use crate::math;
use crate::pipeline::{self, Extractor};

/// `Σ |a_i − b_i|`.
pub fn cityblock(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    Ok(a.iter().zip(b).map(|(x, y)| math::abs(x - y)).sum())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemplateRecord {
    pub subject_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub finger_id: Option<String>,
    /// Hash of the model that produced `fused`.
    pub model_hash: String,
    pub image_hash: String,
    pub config_hash: String,
    #[serde(skip)]
    pub fused: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Decision {
    Accept,
    Reject,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchResult {
    pub score: f64,
    pub per_template_scores: Vec<f64>,
    pub decision: Option<Decision>,
}

/// Accepts when `score ≤ threshold`.
pub fn verify(result: &MatchResult, threshold: f64) -> Decision {
    if result.score <= threshold {
        Decision::Accept
    } else {
        Decision::Reject
    }
}

/// In-memory template store bound to one fusion model.
#[derive(Debug, Clone, PartialEq)]
pub struct TemplateDb {
    model_hash: String,
    dim: Option<usize>,
    subjects: BTreeMap<String, Vec<TemplateRecord>>,
}

impl TemplateDb {
    pub fn new(model_hash: impl Into<String>) -> Self {
        Self {
            model_hash: model_hash.into(),
            dim: None,
            subjects: BTreeMap::new(),
        }
    }

    pub fn model_hash(&self) -> &str {
        &self.model_hash
    }

    pub fn insert(&mut self, record: TemplateRecord) -> Result<()> {
        if record.subject_id.is_empty() {
            return Err(Error::config("subject_id", "must not be empty"));
        }
        if record.model_hash != self.model_hash {
            return Err(Error::ModelMismatch {
                expected: self.model_hash.clone(),
                found: record.model_hash,
            });
        }
        match self.dim {
            Some(d) if d != record.fused.len() => {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: record.fused.len(),
                })
            }
            _ => self.dim = Some(record.fused.len()),
        }
        self.subjects
            .entry(record.subject_id.clone())
            .or_default()
            .push(record);
        Ok(())
    }

    /// Records for a subject in insertion order.
    pub fn templates(&self, subject_id: &str) -> Option<&[TemplateRecord]> {
        self.subjects.get(subject_id).map(Vec::as_slice)
    }

    pub fn subjects(&self) -> impl Iterator<Item = &str> {
        self.subjects.keys().map(String::as_str)
    }

    pub fn records(&self) -> impl Iterator<Item = &TemplateRecord> {
        self.subjects.values().flatten()
    }

    pub fn len(&self) -> usize {
        self.subjects.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Scores a fused probe against every template of `subject_id`.
    pub fn score(&self, subject_id: &str, probe: &[f64]) -> Result<MatchResult> {
        let records = self
            .subjects
            .get(subject_id)
            .filter(|r| !r.is_empty())
            .ok_or_else(|| Error::UnknownSubject(subject_id.into()))?;
        let per_template_scores = records
            .iter()
            .map(|r| cityblock(probe, &r.fused))
            .collect::<Result<Vec<_>>>()?;
        Ok(MatchResult {
            score: min_score(&per_template_scores),
            per_template_scores,
            decision: None,
        })
    }
}

/// Extracts both descriptors from `img` and fuses them with `model`.
pub fn fused_descriptor(extractor: &Extractor, model: &CcaModel, img: &GrayImage) -> Result<Vec<f64>> {
    let f = extractor.extract(img)?;
    model.project_fuse(&f.coror.values, &f.gaborhog.values)
}

fn check_model(db: &TemplateDb, model: &CcaModel) -> Result<String> {
    let hash = model.fingerprint();
    if hash != db.model_hash {
        return Err(Error::ModelMismatch {
            expected: db.model_hash.clone(),
            found: hash,
        });
    }
    Ok(hash)
}

/// Fuses `img` into a template and stores it under `subject_id`.
pub fn enroll(
    extractor: &Extractor,
    model: &CcaModel,
    db: &mut TemplateDb,
    img: &GrayImage,
    subject_id: &str,
) -> Result<TemplateRecord> {
    let model_hash = check_model(db, model)?;
    let record = TemplateRecord {
        subject_id: subject_id.into(),
        finger_id: None,
        model_hash,
        image_hash: pipeline::image_hash(img),
        config_hash: extractor.config().extraction_hash(),
        fused: fused_descriptor(extractor, model, img)?,
    };
    db.insert(record.clone())?;
    Ok(record)
}

/// Scores `img` against the templates of `subject_id`.
pub fn match_subject(
    extractor: &Extractor,
    model: &CcaModel,
    db: &TemplateDb,
    img: &GrayImage,
    subject_id: &str,
) -> Result<MatchResult> {
    check_model(db, model)?;
    let probe = fused_descriptor(extractor, model, img)?;
    db.score(subject_id, &probe)
}

/// Running minimum starting at +∞.
pub fn min_score(scores: &[f64]) -> f64 {
    scores.iter().copied().fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn rec(subject: &str, fused: Vec<f64>) -> TemplateRecord {
        TemplateRecord {
            subject_id: subject.into(),
            finger_id: None,
            model_hash: "m".into(),
            image_hash: String::new(),
            config_hash: String::new(),
            fused,
        }
    }

    #[test]
    fn cityblock_examples() {
        assert_eq!(cityblock(&[1.0, 2.0], &[3.0, 5.0]).unwrap(), 5.0);
        assert_eq!(cityblock(&[1.5, -2.0], &[1.5, -2.0]).unwrap(), 0.0);
        assert!(cityblock(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn min_rule() {
        let mut db = TemplateDb::new("m");
        db.insert(rec("a", vec![4.0])).unwrap();
        db.insert(rec("a", vec![2.5])).unwrap();
        db.insert(rec("a", vec![7.1])).unwrap();
        let r = db.score("a", &[0.0]).unwrap();
        assert_eq!(r.per_template_scores, vec![4.0, 2.5, 7.1]);
        assert_eq!(r.score, 2.5);
        assert_eq!(db.templates("a").unwrap().len(), 3);
        assert!(matches!(db.score("b", &[0.0]), Err(Error::UnknownSubject(_))));
    }

    #[test]
    fn model_mismatch_rejected() {
        let mut db = TemplateDb::new("other");
        assert!(matches!(
            db.insert(rec("a", vec![1.0])),
            Err(Error::ModelMismatch { .. })
        ));
    }

    #[test]
    fn threshold_boundary_inclusive() {
        let r = |score| MatchResult {
            score,
            per_template_scores: vec![score],
            decision: None,
        };
        assert_eq!(verify(&r(0.0), 0.0), Decision::Accept);
        assert_eq!(verify(&r(5.0), 4.9), Decision::Reject);
        assert_eq!(verify(&r(3.25), 3.25), Decision::Accept);
    }
}
