//! Debug exports of intermediate products.

use std::path::Path;

use coror_core::OrientationField;
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Serialize)]
struct Row {
    row: usize,
    col: usize,
    theta_degrees: f64,
    valid: bool,
}

/// One CSV row per pixel: `row,col,theta_degrees,valid`.
pub fn write_orientation_csv(field: &OrientationField, path: &Path) -> Result<()> {
    let err = |e: csv::Error| Error::io(path, std::io::Error::other(e));
    let mut w = csv::Writer::from_path(path).map_err(err)?;
    for r in 0..field.height {
        for c in 0..field.width {
            let i = r * field.width + c;
            w.serialize(Row {
                row: r,
                col: c,
                theta_degrees: field.theta[i].to_degrees(),
                valid: field.valid[i],
            })
            .map_err(err)?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}
