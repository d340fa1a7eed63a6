//! Evaluation reports: `metrics.json`, `scores.csv` and `det.csv`.

use std::fs;
use std::path::Path;

use coror_core::{Metrics, ScoreSet};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Serialize, Deserialize)]
struct ScoreRow {
    label: String,
    score: f64,
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    Error::io(path, std::io::Error::other(e))
}

pub fn emit_report(metrics: &Metrics, scores: &ScoreSet, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;

    let path = dir.join("metrics.json");
    let mut json = serde_json::to_string_pretty(metrics).expect("metrics serialize");
    json.push('\n');
    fs::write(&path, json).map_err(|e| Error::io(&path, e))?;

    let path = dir.join("scores.csv");
    let mut w = csv::Writer::from_path(&path).map_err(|e| csv_err(&path, e))?;
    let rows = scores
        .genuine
        .iter()
        .map(|&s| ("genuine", s))
        .chain(scores.impostor.iter().map(|&s| ("impostor", s)));
    for (label, score) in rows {
        w.serialize(ScoreRow {
            label: label.into(),
            score,
        })
        .map_err(|e| csv_err(&path, e))?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;

    let path = dir.join("det.csv");
    let mut w = csv::Writer::from_path(&path).map_err(|e| csv_err(&path, e))?;
    for p in &metrics.det {
        w.serialize(p).map_err(|e| csv_err(&path, e))?;
    }
    w.flush().map_err(|e| Error::io(&path, e))
}

pub fn read_scores(path: &Path) -> Result<ScoreSet> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let mut scores = ScoreSet::default();
    for row in r.deserialize() {
        let row: ScoreRow = row.map_err(|e| csv_err(path, e))?;
        match row.label.as_str() {
            "genuine" => scores.genuine.push(row.score),
            "impostor" => scores.impostor.push(row.score),
            other => {
                return Err(Error::io(
                    path,
                    std::io::Error::other(format!("unknown label `{other}`")),
                ))
            }
        }
    }
    Ok(scores)
}
