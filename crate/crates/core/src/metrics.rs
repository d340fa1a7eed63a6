//! Verification error rates from genuine and impostor distance scores.
//!
//! A comparison is accepted when its distance is `≤ t`. Sweeping `t` over the
//! sorted distinct scores gives `FMR(t)` (impostors accepted) and `FNMR(t)`
//! (genuines rejected).

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ScoreSet {
    pub genuine: Vec<f64>,
    pub impostor: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetPoint {
    pub threshold: f64,
    pub fmr: f64,
    pub fnmr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub eer: f64,
    /// Interpolated threshold at the FMR/FNMR crossing.
    pub eer_threshold: f64,
    /// Lowest FNMR with FMR ≤ 1%.
    pub fmr100: f64,
    /// Lowest FNMR with FMR ≤ 0.1%.
    pub fmr1000: f64,
    /// Lowest FNMR with FMR = 0.
    pub zero_fmr: f64,
    pub n_genuine: usize,
    pub n_impostor: usize,
    #[serde(skip)]
    pub det: Vec<DetPoint>,
}

impl ScoreSet {
    pub fn validate(&self) -> Result<()> {
        if self.genuine.is_empty() {
            return Err(Error::EmptyScores("genuine"));
        }
        if self.impostor.is_empty() {
            return Err(Error::EmptyScores("impostor"));
        }
        if self
            .genuine
            .iter()
            .chain(&self.impostor)
            .any(|s| !s.is_finite() || *s < 0.0)
        {
            return Err(Error::NumericalFailure("scores must be finite and non-negative"));
        }
        Ok(())
    }
}

/// FMR/FNMR at every distinct score, in increasing threshold order.
pub fn det_curve(scores: &ScoreSet) -> Result<Vec<DetPoint>> {
    scores.validate()?;
    let mut gen = scores.genuine.clone();
    let mut imp = scores.impostor.clone();
    gen.sort_by(f64::total_cmp);
    imp.sort_by(f64::total_cmp);
    let mut all: Vec<f64> = gen.iter().chain(&imp).copied().collect();
    all.sort_by(f64::total_cmp);
    all.dedup();
    let (ng, ni) = (gen.len() as f64, imp.len() as f64);
    let (mut gi, mut ii) = (0, 0);
    let mut det = Vec::with_capacity(all.len());
    for t in all {
        while gi < gen.len() && gen[gi] <= t {
            gi += 1;
        }
        while ii < imp.len() && imp[ii] <= t {
            ii += 1;
        }
        det.push(DetPoint {
            threshold: t,
            fmr: ii as f64 / ni,
            fnmr: (gen.len() - gi) as f64 / ng,
        });
    }
    Ok(det)
}

pub fn compute_metrics(scores: &ScoreSet) -> Result<Metrics> {
    let det = det_curve(scores)?;
    // Operating point below every score: nothing accepted.
    let start = DetPoint {
        threshold: det[0].threshold,
        fmr: 0.0,
        fnmr: 1.0,
    };
    let pts: Vec<DetPoint> = core::iter::once(start).chain(det.iter().copied()).collect();

    let cross = pts
        .iter()
        .position(|p| p.fmr >= p.fnmr)
        .ok_or(Error::NumericalFailure("DET curve never crosses"))?;
    let (eer, eer_threshold) = if cross == 0 || pts[cross].fmr == pts[cross].fnmr {
        (pts[cross].fmr, pts[cross].threshold)
    } else {
        let (a, b) = (pts[cross - 1], pts[cross]);
        let da = a.fmr - a.fnmr;
        let db = b.fmr - b.fnmr;
        let alpha = -da / (db - da);
        let t = if cross == 1 {
            b.threshold
        } else {
            a.threshold + alpha * (b.threshold - a.threshold)
        };
        (a.fmr + alpha * (b.fmr - a.fmr), t)
    };

    let best_fnmr = |limit: f64| {
        pts.iter()
            .filter(|p| p.fmr <= limit)
            .map(|p| p.fnmr)
            .fold(1.0f64, f64::min)
    };
    Ok(Metrics {
        eer,
        eer_threshold,
        fmr100: best_fnmr(0.01),
        fmr1000: best_fnmr(0.001),
        zero_fmr: best_fnmr(0.0),
        n_genuine: scores.genuine.len(),
        n_impostor: scores.impostor.len(),
        det,
    })
}
