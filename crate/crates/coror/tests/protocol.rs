mod common;

use std::fs;

use coror::corpus::write_corpus;
use coror::dataset::scan_dataset;
use coror::imageio::save_png;
use coror::protocol::{run_protocol, DatasetSpec, ProtocolSpec};
use coror::report::{emit_report, read_scores};
use coror::Error;
use coror_core::compute_metrics;
use coror_core::synth::SynthConfig;

fn spec(gallery: &std::path::Path, probe: &std::path::Path, cap: Option<usize>, seed: u64) -> ProtocolSpec {
    ProtocolSpec {
        gallery: DatasetSpec::new("g", gallery),
        probe: DatasetSpec::new("p", probe),
        impostor_cap: cap,
        seed,
    }
}

#[test]
fn pairing_two_by_two() {
    let dir = tempfile::tempdir().unwrap();
    let (corpus, model, extractor) = common::corpus_and_model(dir.path(), 8, 4);
    // two subjects, two impressions each, used as both gallery and probe
    let native = dir.path().join("native");
    fs::create_dir_all(&native).unwrap();
    for name in ["0001_1_1.png", "0001_1_2.png", "0002_1_1.png", "0002_1_2.png"] {
        fs::copy(corpus.join("sensorA").join(name), native.join(name)).unwrap();
    }
    let out = run_protocol(&spec(&native, &native, None, 0), &model, &extractor).unwrap();
    assert_eq!(out.scores.genuine.len(), 4);
    assert_eq!(out.scores.impostor.len(), 4);
    for c in &out.comparisons {
        let probe = c.probe.file_name().unwrap().to_str().unwrap();
        assert_eq!(c.genuine, probe.starts_with(&c.subject), "{probe} vs {}", c.subject);
    }
}

#[test]
fn identical_probe_scores_zero_and_routing_is_correct() {
    let dir = tempfile::tempdir().unwrap();
    let (corpus, model, extractor) = common::corpus_and_model(dir.path(), 9, 4);
    let probe = dir.path().join("probe");
    fs::create_dir_all(&probe).unwrap();
    fs::copy(corpus.join("sensorA/0003_1_1.png"), probe.join("0003_1_9.png")).unwrap();
    fs::copy(corpus.join("sensorB/0002_1_1.png"), probe.join("0002_1_1.png")).unwrap();
    let out = run_protocol(&spec(&corpus.join("sensorA"), &probe, None, 0), &model, &extractor).unwrap();
    let zero = out
        .comparisons
        .iter()
        .find(|c| c.genuine && c.subject == "0003")
        .unwrap();
    assert_eq!(zero.score, 0.0);
    assert_eq!(out.scores.genuine.len(), 2);
    assert_eq!(out.scores.impostor.len(), 6);
}

#[test]
fn impostor_cap_is_seeded() {
    let dir = tempfile::tempdir().unwrap();
    let (corpus, model, extractor) = common::corpus_and_model(dir.path(), 10, 6);
    let (g, p) = (corpus.join("sensorA"), corpus.join("sensorB"));
    let full = run_protocol(&spec(&g, &p, None, 0), &model, &extractor).unwrap();
    assert_eq!(full.scores.impostor.len(), 12 * 5);
    let a = run_protocol(&spec(&g, &p, Some(20), 42), &model, &extractor).unwrap();
    let b = run_protocol(&spec(&g, &p, Some(20), 42), &model, &extractor).unwrap();
    let c = run_protocol(&spec(&g, &p, Some(20), 43), &model, &extractor).unwrap();
    assert_eq!(a.scores.impostor.len(), 20);
    assert_eq!(a.scores, b.scores);
    assert_ne!(a.scores.impostor, c.scores.impostor);
    assert_eq!(a.scores.genuine, full.scores.genuine);
    assert!(a.scores.impostor.iter().all(|s| full.scores.impostor.contains(s)));
}

#[test]
fn empty_and_mismatched_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let (corpus, model, _) = common::corpus_and_model(dir.path(), 11, 3);
    let empty = dir.path().join("empty");
    fs::create_dir_all(&empty).unwrap();
    assert!(matches!(scan_dataset(&empty), Err(Error::EmptyDataset(_))));

    let mut cfg = coror_core::PipelineConfig::default();
    cfg.coror.offsets = vec![5, 10];
    let other = coror_core::Extractor::new(cfg).unwrap();
    let s = spec(&corpus.join("sensorA"), &corpus.join("sensorB"), None, 0);
    assert!(matches!(
        run_protocol(&s, &model, &other),
        Err(Error::Core(coror_core::Error::ModelMismatch { .. }))
    ));

    let bad = dir.path().join("bad");
    fs::create_dir_all(&bad).unwrap();
    save_png(&coror_core::GrayImage::from_fn(80, 80, |x, _| x as f64), &bad.join("nounderscores.png")).unwrap();
    assert!(matches!(scan_dataset(&bad), Err(Error::BadFileName(_))));
}

#[test]
fn report_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("nested/report");
    let scores = coror_core::ScoreSet {
        genuine: vec![0.1, 0.35, 1.0 / 3.0, 2.5],
        impostor: vec![0.3, 2.0, 4.75, 1e-7, 3.0],
    };
    let metrics = compute_metrics(&scores).unwrap();
    emit_report(&metrics, &scores, &out).unwrap();
    let back = read_scores(&out.join("scores.csv")).unwrap();
    assert_eq!(back, scores);
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("metrics.json")).unwrap()).unwrap();
    let again = compute_metrics(&back).unwrap();
    assert!((json["eer"].as_f64().unwrap() - again.eer).abs() <= 1e-12);
    assert!((json["fmr100"].as_f64().unwrap() - again.fmr100).abs() <= 1e-12);

    let det = fs::read_to_string(out.join("det.csv")).unwrap();
    let mut lines = det.lines();
    assert_eq!(lines.next(), Some("threshold,fmr,fnmr"));
    let ts: Vec<f64> = lines.map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(ts.len(), metrics.det.len());
    assert!(ts.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn corpus_layout_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = SynthConfig { canvas: 96, ..common::small_corpus(5, 3) };
    let a = write_corpus(&cfg, &dir.path().join("a")).unwrap();
    let b = write_corpus(&cfg, &dir.path().join("b")).unwrap();
    assert_eq!(a.len(), 3 * 2 * 2);
    for (pa, pb) in a.iter().zip(&b) {
        assert_eq!(fs::read(pa).unwrap(), fs::read(pb).unwrap());
    }
    let names: Vec<_> = scan_dataset(&dir.path().join("a/sensorB"))
        .unwrap()
        .into_iter()
        .map(|s| (s.subject, s.finger, s.impression))
        .collect();
    assert_eq!(names.len(), 6);
    assert_eq!(names[0], ("0001".into(), "1".into(), "1".into()));
    let bad = SynthConfig { n_fingers: 1, ..cfg };
    assert!(write_corpus(&bad, &dir.path().join("c")).is_err());
}
