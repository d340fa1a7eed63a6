//! Writes a synthetic corpus as `<out>/<sensor>/<subject>_<finger>_<impression>.png`.

use std::fs;
use std::path::{Path, PathBuf};

use coror_core::synth::SynthConfig;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::imageio::save_png;

pub const MANIFEST: &str = "corpus.json";

pub fn write_corpus(cfg: &SynthConfig, out: &Path) -> Result<Vec<PathBuf>> {
    cfg.validate()?;
    for p in &cfg.profiles {
        let dir = out.join(&p.name);
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    }
    let jobs: Vec<_> = cfg.jobs().collect();
    let paths = jobs
        .par_iter()
        .map(|&(finger, profile, impression)| {
            let img = cfg.render(finger, profile, impression)?;
            let path = out
                .join(&cfg.profiles[profile].name)
                .join(cfg.file_name(finger, impression));
            save_png(&img, &path)?;
            Ok(path)
        })
        .collect::<Result<Vec<_>>>()?;
    let manifest = out.join(MANIFEST);
    let mut json = serde_json::to_string_pretty(cfg).expect("config serializes");
    json.push('\n');
    fs::write(&manifest, json).map_err(|e| Error::io(&manifest, e))?;
    Ok(paths)
}
