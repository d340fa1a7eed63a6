//! Dataset directories of `<subject>_<finger>_<impression>.png|pgm` files.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sample {
    pub path: PathBuf,
    pub subject: String,
    pub finger: String,
    pub impression: String,
}

impl Sample {
    /// Identity of the physical finger.
    pub fn finger_key(&self) -> (&str, &str) {
        (&self.subject, &self.finger)
    }
}

pub fn is_image(path: &Path) -> bool {
    matches!(
        path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref(),
        Some("png" | "pgm")
    )
}

/// Splits `<subject>_<finger>_<impression>` into its three parts.
pub fn parse_name(stem: &str) -> Option<(&str, &str, &str)> {
    let mut parts = stem.split('_');
    let ids = (parts.next()?, parts.next()?, parts.next()?);
    if parts.next().is_some() || [ids.0, ids.1, ids.2].iter().any(|s| s.is_empty()) {
        return None;
    }
    Some(ids)
}

pub fn sample_from_path(path: &Path) -> Result<Sample> {
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default();
    let stem = path.file_stem().and_then(|n| n.to_str()).unwrap_or_default();
    let (s, f, i) = parse_name(stem).ok_or_else(|| Error::BadFileName(name.into()))?;
    Ok(Sample {
        path: path.to_path_buf(),
        subject: s.into(),
        finger: f.into(),
        impression: i.into(),
    })
}

/// Every image in `dir` (non-recursive), sorted by file name. Files with
/// other extensions are ignored; misnamed images are an error.
pub fn scan_dataset(dir: &Path) -> Result<Vec<Sample>> {
    if !dir.is_dir() {
        return Err(Error::FileNotFound(dir.to_path_buf()));
    }
    let mut paths = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.is_file() && is_image(&path) {
            paths.push(path);
        }
    }
    paths.sort();
    if paths.is_empty() {
        return Err(Error::EmptyDataset(dir.display().to_string()));
    }
    paths.iter().map(|p| sample_from_path(p)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names() {
        assert_eq!(parse_name("0001_1_2"), Some(("0001", "1", "2")));
        assert_eq!(parse_name("0001_1"), None);
        assert_eq!(parse_name("a_b_c_d"), None);
        assert_eq!(parse_name("a__c"), None);
    }
}
