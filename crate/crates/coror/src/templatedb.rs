//! Template database file: a JSON header line `{version, model_hash}`
//! followed by an append-only log of records, each a `u32` length plus JSON
//! metadata and a `u32` count plus little-endian `f64` values.
//!
//! Readers take a shared lock and writers an exclusive one, so any number of
//! readers may coexist with at most one writer.

use std::fs::{File, OpenOptions};
use std::io::{Read, Seek, SeekFrom, Write};
use std::path::Path;

use coror_core::{TemplateDb, TemplateRecord};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DB_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct DbHeader {
    version: u32,
    model_hash: String,
}

fn header_bytes(model_hash: &str) -> Vec<u8> {
    let mut out = serde_json::to_vec(&DbHeader {
        version: DB_VERSION,
        model_hash: model_hash.into(),
    })
    .expect("header serializes");
    out.push(b'\n');
    out
}

pub fn encode_record(record: &TemplateRecord) -> Vec<u8> {
    let meta = serde_json::to_vec(record).expect("record serializes");
    let mut out = Vec::with_capacity(8 + meta.len() + 8 * record.fused.len());
    out.extend_from_slice(&(meta.len() as u32).to_le_bytes());
    out.extend_from_slice(&meta);
    out.extend_from_slice(&(record.fused.len() as u32).to_le_bytes());
    for v in &record.fused {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode(bytes: &[u8]) -> Result<TemplateDb> {
    let corrupt = |m: &str| Error::CorruptDb(m.into());
    let nl = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| corrupt("missing header line"))?;
    let header: DbHeader =
        serde_json::from_slice(&bytes[..nl]).map_err(|e| Error::CorruptDb(e.to_string()))?;
    if header.version != DB_VERSION {
        return Err(Error::VersionMismatch {
            kind: "template database",
            found: header.version,
            expected: DB_VERSION,
        });
    }
    let mut db = TemplateDb::new(header.model_hash);
    let mut rest = &bytes[nl + 1..];
    let take = |n: usize, rest: &mut &[u8]| -> Result<Vec<u8>> {
        if rest.len() < n {
            return Err(corrupt("truncated record"));
        }
        let (head, tail) = rest.split_at(n);
        *rest = tail;
        Ok(head.to_vec())
    };
    while !rest.is_empty() {
        let len = u32::from_le_bytes(take(4, &mut rest)?.try_into().unwrap()) as usize;
        let meta = take(len, &mut rest)?;
        let mut record: TemplateRecord =
            serde_json::from_slice(&meta).map_err(|e| Error::CorruptDb(e.to_string()))?;
        let n = u32::from_le_bytes(take(4, &mut rest)?.try_into().unwrap()) as usize;
        let raw = take(n.checked_mul(8).ok_or_else(|| corrupt("bad vector length"))?, &mut rest)?;
        record.fused = raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        db.insert(record)?;
    }
    Ok(db)
}

fn read_locked(file: &mut File, path: &Path) -> Result<Vec<u8>> {
    let mut bytes = Vec::new();
    file.seek(SeekFrom::Start(0)).map_err(|e| Error::io(path, e))?;
    file.read_to_end(&mut bytes).map_err(|e| Error::io(path, e))?;
    Ok(bytes)
}

/// Loads the whole database under a shared lock.
pub fn open(path: &Path) -> Result<TemplateDb> {
    let mut file = File::open(path).map_err(|e| Error::io(path, e))?;
    file.lock_shared().map_err(|e| Error::io(path, e))?;
    let bytes = read_locked(&mut file, path)?;
    decode(&bytes)
}

/// Appends `record` to the database at `path`, creating it bound to
/// `model_hash` if absent. The existing contents are validated first, so
/// a mismatched model or dimension leaves the file untouched.
pub fn append(path: &Path, model_hash: &str, record: &TemplateRecord) -> Result<TemplateDb> {
    let mut file = OpenOptions::new()
        .read(true)
        .append(true)
        .create(true)
        .open(path)
        .map_err(|e| Error::io(path, e))?;
    file.lock().map_err(|e| Error::io(path, e))?;
    let existing = read_locked(&mut file, path)?;
    let mut out = Vec::new();
    let mut db = if existing.is_empty() {
        out.extend(header_bytes(model_hash));
        TemplateDb::new(model_hash)
    } else {
        decode(&existing)?
    };
    if db.model_hash() != model_hash {
        return Err(coror_core::Error::ModelMismatch {
            expected: db.model_hash().into(),
            found: model_hash.into(),
        }
        .into());
    }
    db.insert(record.clone())?;
    out.extend(encode_record(record));
    file.write_all(&out)
        .and_then(|_| file.flush())
        .map_err(|e| Error::DbWriteFailure(format!("{}: {e}", path.display())))?;
    Ok(db)
}

/// Writes a complete database, replacing any existing file.
pub fn save(path: &Path, db: &TemplateDb) -> Result<()> {
    let mut out = header_bytes(db.model_hash());
    for r in db.records() {
        out.extend(encode_record(r));
    }
    let mut file = OpenOptions::new()
        .write(true)
        .create(true)
        .truncate(false)
        .open(path)
        .map_err(|e| Error::io(path, e))?;
    file.lock().map_err(|e| Error::io(path, e))?;
    file.set_len(0)
        .and_then(|_| file.write_all(&out))
        .map_err(|e| Error::DbWriteFailure(format!("{}: {e}", path.display())))
}
