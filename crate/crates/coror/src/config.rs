//! TOML pipeline configuration. Absent keys take their defaults, unknown
//! keys are rejected, and the result is fully validated before use.

use std::fs;
use std::path::Path;

use coror_core::PipelineConfig;
use serde::de::DeserializeOwned;
use toml::{Table, Value};

use crate::error::{Error, Result};

pub fn parse_config(path: &Path) -> Result<PipelineConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config_str(&text)
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

fn invalid(key: impl Into<String>, reason: impl Into<String>) -> Error {
    Error::ConfigValidation {
        key: key.into(),
        reason: reason.into(),
    }
}

pub fn parse_config_str(text: &str) -> Result<PipelineConfig> {
    let table: Table = text.parse().map_err(|e: toml::de::Error| Error::ConfigParse {
        line: e.span().map_or(1, |s| line_of(text, s.start)),
        message: e.message().trim().to_string(),
    })?;
    let schema = Table::try_from(PipelineConfig::default()).expect("defaults serialize");

    for (section, value) in &table {
        let known = schema
            .get(section)
            .and_then(Value::as_table)
            .ok_or_else(|| invalid(section.as_str(), "unknown section"))?;
        let entries = value
            .as_table()
            .ok_or_else(|| invalid(section.as_str(), "expected a [section] table"))?;
        for (key, v) in entries {
            if !known.contains_key(key) {
                return Err(invalid(format!("{section}.{key}"), "unknown key"));
            }
            // Each key alone against its section type pins type errors to it.
            let single = Table::from_iter([(key.clone(), v.clone())]);
            check_section(section, single).map_err(|e| invalid(format!("{section}.{key}"), e))?;
        }
    }

    let config: PipelineConfig = Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| invalid("config", e.message().trim()))?;
    config.validate().map_err(|e| match e {
        coror_core::Error::InvalidConfig { key, reason } => invalid(key, reason),
        other => invalid("config", other.to_string()),
    })?;
    Ok(config)
}

fn try_as<T: DeserializeOwned>(t: Table) -> std::result::Result<(), String> {
    Value::Table(t)
        .try_into::<T>()
        .map(drop)
        .map_err(|e| e.message().trim().to_string())
}

fn check_section(section: &str, t: Table) -> std::result::Result<(), String> {
    use coror_core::pipeline::*;
    match section {
        "preprocessing" => try_as::<PreprocessingConfig>(t),
        "orientation" => try_as::<OrientationConfig>(t),
        "coror" => try_as::<CororConfig>(t),
        "gabor" => try_as::<GaborSection>(t),
        "cca" => try_as::<CcaSection>(t),
        _ => Err("unknown section".into()),
    }
}

/// The defaults rendered as TOML, for `inspect --config-defaults`.
pub fn default_toml() -> String {
    toml::to_string(&PipelineConfig::default()).expect("defaults serialize")
}
