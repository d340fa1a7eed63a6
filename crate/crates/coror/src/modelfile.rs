//! Fusion model files: one JSON header line, then little-endian `f64`
//! matrices in the order listed by `matrices`.

use std::fs;
use std::path::Path;

use coror_core::linalg::Matrix;
use coror_core::{CcaModel, FusionMode};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixEntry {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelHeader {
    pub version: u32,
    pub p: usize,
    pub q: usize,
    pub k: usize,
    pub epsilon: f64,
    pub fusion_mode: FusionMode,
    pub matrices: Vec<MatrixEntry>,
}

fn entry(name: &str, rows: usize, cols: usize) -> MatrixEntry {
    MatrixEntry {
        name: name.into(),
        rows,
        cols,
    }
}

pub fn encode(model: &CcaModel) -> Vec<u8> {
    let mut parts: Vec<(MatrixEntry, &[f64])> = vec![
        (entry("mean_x", model.p(), 1), &model.mean_x),
        (entry("mean_y", model.q(), 1), &model.mean_y),
    ];
    for (name, m) in [("pca_x", &model.pca_x), ("pca_y", &model.pca_y)] {
        if let Some(m) = m {
            parts.push((entry(name, m.rows(), m.cols()), m.as_slice()));
        }
    }
    parts.push((entry("wx", model.wx.rows(), model.wx.cols()), model.wx.as_slice()));
    parts.push((entry("wy", model.wy.rows(), model.wy.cols()), model.wy.as_slice()));
    parts.push((entry("lambdas", model.k(), 1), &model.lambdas));

    let header = ModelHeader {
        version: MODEL_VERSION,
        p: model.p(),
        q: model.q(),
        k: model.k(),
        epsilon: model.epsilon,
        fusion_mode: model.fusion_mode,
        matrices: parts.iter().map(|(e, _)| e.clone()).collect(),
    };
    let mut out = serde_json::to_vec(&header).expect("header serializes");
    out.push(b'\n');
    for (_, data) in parts {
        for v in data {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

pub fn decode(bytes: &[u8]) -> Result<CcaModel> {
    let corrupt = |m: String| Error::CorruptModel(m);
    let nl = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| corrupt("missing header line".into()))?;
    let header: ModelHeader =
        serde_json::from_slice(&bytes[..nl]).map_err(|e| corrupt(e.to_string()))?;
    if header.version != MODEL_VERSION {
        return Err(Error::VersionMismatch {
            kind: "model",
            found: header.version,
            expected: MODEL_VERSION,
        });
    }
    let body = &bytes[nl + 1..];
    let expected: usize = header
        .matrices
        .iter()
        .map(|m| m.rows.checked_mul(m.cols).unwrap_or(usize::MAX))
        .fold(0usize, usize::saturating_add);
    if expected.checked_mul(8) != Some(body.len()) {
        return Err(corrupt(format!(
            "payload has {} bytes, header declares {} values",
            body.len(),
            expected
        )));
    }
    let mut pos = 0;
    let mut take = |m: &MatrixEntry| -> Matrix {
        let n = m.rows * m.cols;
        let vals = body[pos..pos + 8 * n]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        pos += 8 * n;
        Matrix::from_vec(m.rows, m.cols, vals).expect("sizes checked")
    };
    let (mut mean_x, mut mean_y, mut wx, mut wy, mut lambdas) = (None, None, None, None, None);
    let (mut pca_x, mut pca_y) = (None, None);
    for m in &header.matrices {
        let mat = take(m);
        let slot = match m.name.as_str() {
            "mean_x" => {
                mean_x = Some(mat.as_slice().to_vec());
                continue;
            }
            "mean_y" => {
                mean_y = Some(mat.as_slice().to_vec());
                continue;
            }
            "lambdas" => {
                lambdas = Some(mat.as_slice().to_vec());
                continue;
            }
            "pca_x" => &mut pca_x,
            "pca_y" => &mut pca_y,
            "wx" => &mut wx,
            "wy" => &mut wy,
            other => return Err(corrupt(format!("unknown matrix `{other}`"))),
        };
        *slot = Some(mat);
    }
    let missing = |n: &str| corrupt(format!("missing matrix `{n}`"));
    let model = CcaModel {
        mean_x: mean_x.ok_or_else(|| missing("mean_x"))?,
        mean_y: mean_y.ok_or_else(|| missing("mean_y"))?,
        pca_x,
        pca_y,
        wx: wx.ok_or_else(|| missing("wx"))?,
        wy: wy.ok_or_else(|| missing("wy"))?,
        lambdas: lambdas.ok_or_else(|| missing("lambdas"))?,
        epsilon: header.epsilon,
        fusion_mode: header.fusion_mode,
    };
    if (model.p(), model.q(), model.k()) != (header.p, header.q, header.k) {
        return Err(corrupt("header dimensions disagree with matrices".into()));
    }
    model.validate().map_err(|e| corrupt(e.to_string()))?;
    Ok(model)
}

pub fn save_model(model: &CcaModel, path: &Path) -> Result<()> {
    fs::write(path, encode(model)).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: &Path) -> Result<CcaModel> {
    decode(&fs::read(path).map_err(|e| Error::io(path, e))?)
}
