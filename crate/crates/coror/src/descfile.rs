//! Descriptor files: one JSON header line, then little-endian `f32` values.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DESCRIPTOR_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DescriptorKind {
    Coror,
    Gaborhog,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescriptorHeader {
    pub version: u32,
    pub kind: DescriptorKind,
    pub length: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub offsets: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub directions: Vec<u32>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub wavelengths: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bins: Option<usize>,
    pub config_hash: String,
    pub image_hash: String,
}

pub fn encode(header: &DescriptorHeader, values: &[f64]) -> Result<Vec<u8>> {
    if header.length != values.len() {
        return Err(coror_core::Error::DimensionMismatch {
            expected: header.length,
            found: values.len(),
        }
        .into());
    }
    let mut out = serde_json::to_vec(header).expect("header serializes");
    out.push(b'\n');
    for v in values {
        out.extend_from_slice(&(*v as f32).to_le_bytes());
    }
    Ok(out)
}

pub fn decode(bytes: &[u8]) -> Result<(DescriptorHeader, Vec<f32>)> {
    let corrupt = |m: &str| Error::CorruptDescriptor(m.into());
    let nl = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| corrupt("missing header line"))?;
    let header: DescriptorHeader =
        serde_json::from_slice(&bytes[..nl]).map_err(|e| Error::CorruptDescriptor(e.to_string()))?;
    if header.version != DESCRIPTOR_VERSION {
        return Err(Error::VersionMismatch {
            kind: "descriptor",
            found: header.version,
            expected: DESCRIPTOR_VERSION,
        });
    }
    let body = &bytes[nl + 1..];
    if body.len() != header.length * 4 {
        return Err(corrupt("payload length does not match header"));
    }
    let values = body
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok((header, values))
}

pub fn save(path: &Path, header: &DescriptorHeader, values: &[f64]) -> Result<()> {
    let bytes = encode(header, values)?;
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&bytes).map_err(|e| Error::io(path, e))
}

pub fn load(path: &Path) -> Result<(DescriptorHeader, Vec<f32>)> {
    decode(&fs::read(path).map_err(|e| Error::io(path, e))?)
}
