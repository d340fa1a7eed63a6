//! Command-line front end. `dispatch` never panics on bad input: domain
//! errors exit 1, usage errors exit 2.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use coror_core::matcher::{self, Decision};
use coror_core::synth::SynthConfig;
use coror_core::{pipeline, Extractor, PipelineConfig};
use serde_json::json;

use crate::descfile::{self, DescriptorHeader, DescriptorKind, DESCRIPTOR_VERSION};
use crate::error::{Error, Result};
use crate::protocol::{DatasetSpec, ProtocolSpec};
use crate::{config, corpus, dataset, export, imageio, modelfile, protocol, report, templatedb};

#[derive(Debug, Parser)]
#[command(name = "coror", version, about = "Cross-sensor fingerprint verification")]
pub struct Cli {
    /// Pipeline configuration (TOML). Absent keys take their defaults.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic two-sensor corpus.
    Synth(SynthArgs),
    /// Extract a descriptor from one image.
    Extract(ExtractArgs),
    /// Fit the fusion model on one or more gallery directories.
    Train(TrainArgs),
    /// Add an image to a template database.
    Enroll(EnrollArgs),
    /// Score an image against an enrolled subject.
    Verify(VerifyArgs),
    /// Run a gallery/probe protocol and write a report.
    Evaluate(EvaluateArgs),
    /// Summarize a model, descriptor or template database file.
    Inspect(InspectArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 50)]
    pub fingers: usize,
    #[arg(long, default_value_t = 2)]
    pub impressions: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Kind {
    Coror,
    Gaborhog,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    #[arg(long, value_enum)]
    pub kind: Kind,
    /// Output path; defaults to `<IMG>.<kind>.desc`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the foreground mask as a 0/255 PGM.
    #[arg(long)]
    pub mask: Option<PathBuf>,
    /// Also write the smoothed orientation field as CSV.
    #[arg(long)]
    pub orientation_csv: Option<PathBuf>,
    pub image: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Training directory; repeat to pool several (e.g. mixed-sensor sets).
    #[arg(long, required = true)]
    pub gallery: Vec<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EnrollArgs {
    #[arg(long)]
    pub db: PathBuf,
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub id: String,
    #[arg(long)]
    pub finger: Option<String>,
    pub image: PathBuf,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub db: PathBuf,
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub id: String,
    /// Accept when the distance is at most this value.
    #[arg(long)]
    pub threshold: Option<f64>,
    pub image: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub gallery: PathBuf,
    #[arg(long)]
    pub probe: PathBuf,
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub impostor_cap: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct InspectArgs {
    /// Print the default configuration as TOML.
    #[arg(long, conflicts_with = "file")]
    pub defaults: bool,
    #[arg(required_unless_present = "defaults")]
    pub file: Option<PathBuf>,
}

/// Parses `argv` (including the program name), runs the command and
/// returns the process exit code.
pub fn dispatch<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let _ = if code == 0 { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    let (result, buf) = crate::with_thread_pool(|| {
        let mut buf = Vec::new();
        (run(&cli, &mut buf), buf)
    });
    let _ = out.write_all(&buf);
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<PipelineConfig> {
    match path {
        Some(p) => config::parse_config(p),
        None => Ok(PipelineConfig::default()),
    }
}

fn line(out: &mut dyn Write, value: serde_json::Value) -> Result<()> {
    writeln!(out, "{value}").map_err(|e| Error::io("<stdout>", e))
}

pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<i32> {
    // Configuration errors surface before any file is touched.
    let cfg = load_config(cli.config.as_deref())?;
    match &cli.command {
        Command::Synth(a) => {
            let synth = SynthConfig {
                seed: a.seed,
                n_fingers: a.fingers,
                impressions_per_sensor: a.impressions,
                ..SynthConfig::default()
            };
            let paths = corpus::write_corpus(&synth, &a.out)?;
            line(out, json!({ "images": paths.len(), "out": a.out }))?;
        }
        Command::Extract(a) => extract(cfg, a, out)?,
        Command::Train(a) => {
            let extractor = Extractor::new(cfg)?;
            let model = protocol::train_model(&extractor, &a.gallery)?;
            modelfile::save_model(&model, &a.out)?;
            line(out, json!({ "p": model.p(), "q": model.q(), "k": model.k(), "model": a.out }))?;
        }
        Command::Enroll(a) => {
            if a.id.is_empty() {
                return Err(coror_core::Error::config("id", "must not be empty").into());
            }
            let extractor = Extractor::new(cfg)?;
            let model = modelfile::load_model(&a.model)?;
            let img = imageio::load_image(&a.image)?;
            let record = coror_core::TemplateRecord {
                subject_id: a.id.clone(),
                finger_id: a.finger.clone(),
                model_hash: model.fingerprint(),
                image_hash: pipeline::image_hash(&img),
                config_hash: extractor.config().extraction_hash(),
                fused: matcher::fused_descriptor(&extractor, &model, &img)?,
            };
            let db = templatedb::append(&a.db, &record.model_hash, &record)?;
            let r = db.templates(&a.id).map_or(0, <[_]>::len);
            line(out, json!({ "subject_id": a.id, "templates": r }))?;
        }
        Command::Verify(a) => {
            let extractor = Extractor::new(cfg)?;
            let model = modelfile::load_model(&a.model)?;
            let db = templatedb::open(&a.db)?;
            let img = imageio::load_image(&a.image)?;
            let result = matcher::match_subject(&extractor, &model, &db, &img, &a.id)?;
            return Ok(match a.threshold {
                Some(t) => {
                    let decision = matcher::verify(&result, t);
                    line(out, json!({ "score": result.score, "decision": decision }))?;
                    i32::from(decision == Decision::Reject)
                }
                None => {
                    line(out, json!({ "score": result.score }))?;
                    0
                }
            });
        }
        Command::Evaluate(a) => {
            let extractor = Extractor::new(cfg)?;
            let model = modelfile::load_model(&a.model)?;
            let spec = ProtocolSpec {
                gallery: DatasetSpec::new("gallery", &a.gallery),
                probe: DatasetSpec::new("probe", &a.probe),
                impostor_cap: a.impostor_cap,
                seed: a.seed,
            };
            let outcome = protocol::run_protocol(&spec, &model, &extractor)?;
            let metrics = coror_core::compute_metrics(&outcome.scores)?;
            report::emit_report(&metrics, &outcome.scores, &a.out)?;
            line(out, serde_json::to_value(&metrics).expect("metrics serialize"))?;
        }
        Command::Inspect(a) => inspect(a, out)?,
    }
    Ok(0)
}

fn extract(cfg: PipelineConfig, a: &ExtractArgs, out: &mut dyn Write) -> Result<()> {
    let extractor = Extractor::new(cfg)?;
    let img = imageio::load_image(&a.image)?;
    let f = extractor.extract(&img)?;
    let cfg = extractor.config();
    let base = DescriptorHeader {
        version: DESCRIPTOR_VERSION,
        kind: DescriptorKind::Coror,
        length: 0,
        offsets: Vec::new(),
        directions: Vec::new(),
        wavelengths: Vec::new(),
        bins: None,
        config_hash: cfg.extraction_hash(),
        image_hash: pipeline::image_hash(&img),
    };
    let (header, values, ext) = match a.kind {
        Kind::Coror => (
            DescriptorHeader {
                length: f.coror.len(),
                offsets: f.coror.offsets.clone(),
                directions: f.coror.directions.iter().map(|d| d.degrees()).collect(),
                ..base
            },
            &f.coror.values,
            "coror.desc",
        ),
        Kind::Gaborhog => (
            DescriptorHeader {
                kind: DescriptorKind::Gaborhog,
                length: f.gaborhog.len(),
                wavelengths: cfg.gabor.wavelengths.clone(),
                bins: Some(f.gaborhog.bins),
                ..base
            },
            &f.gaborhog.values,
            "gaborhog.desc",
        ),
    };
    let path = a.out.clone().unwrap_or_else(|| {
        let mut name = a.image.clone().into_os_string();
        name.push(format!(".{ext}"));
        name.into()
    });
    descfile::save(&path, &header, values)?;
    if let Some(p) = &a.mask {
        imageio::save_mask_pgm(&f.mask, p)?;
    }
    if let Some(p) = &a.orientation_csv {
        export::write_orientation_csv(&f.orientation, p)?;
    }
    line(
        out,
        json!({ "out": path, "kind": header.kind, "length": header.length, "dominant_degrees": f.dominant.to_degrees() }),
    )
}

fn inspect(a: &InspectArgs, out: &mut dyn Write) -> Result<()> {
    if a.defaults {
        return write!(out, "{}", config::default_toml()).map_err(|e| Error::io("<stdout>", e));
    }
    let path = a.file.as_deref().expect("clap requires FILE");
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    if let Ok(model) = modelfile::decode(&bytes) {
        return line(
            out,
            json!({
                "type": "model", "p": model.p(), "q": model.q(), "k": model.k(),
                "epsilon": model.epsilon, "fusion_mode": model.fusion_mode,
                "fused_length": model.fused_len(), "lambdas": model.lambdas,
                "hash": model.fingerprint(),
            }),
        );
    }
    if let Ok((header, _)) = descfile::decode(&bytes) {
        return line(out, json!({ "type": "descriptor", "header": header }));
    }
    if let Ok(db) = templatedb::decode(&bytes) {
        let subjects: serde_json::Map<_, _> = db
            .subjects()
            .map(|s| (s.to_string(), json!(db.templates(s).map_or(0, <[_]>::len))))
            .collect();
        return line(
            out,
            json!({ "type": "template_db", "model_hash": db.model_hash(), "records": db.len(), "subjects": subjects }),
        );
    }
    if dataset::is_image(path) {
        let img = imageio::read_image(path)?;
        return line(
            out,
            json!({ "type": "image", "width": img.width(), "height": img.height(), "mean": img.mean(), "hash": pipeline::image_hash(&img) }),
        );
    }
    Err(Error::UnsupportedFormat(format!("{}: not a model, descriptor or template database", path.display())))
}
