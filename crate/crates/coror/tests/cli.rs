mod common;

use std::fs;
use std::process::Command;

use common::run;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_coror"))
}

#[test]
fn unknown_subcommand_is_usage_error() {
    let out = bin().arg("frobnicate").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
    let (code, _, _) = run(&["verify", "--db", "x"]);
    assert_eq!(code, 2);
    let (code, out, _) = run(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("evaluate"));
}

#[test]
fn enroll_verify_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let p = |s: &str| dir.path().join(s).to_string_lossy().into_owned();
    let (code, _, err) = run(&["synth", "--out", &p("c"), "--fingers", "4", "--seed", "1"]);
    assert_eq!(code, 0, "{err}");
    let (code, out, err) = run(&["train", "--gallery", &p("c/sensorA"), "--out", &p("m.bin")]);
    assert_eq!(code, 0, "{err}");
    assert!(out.contains("\"p\":768"));
    let img = p("c/sensorA/0001_1_1.png");
    let (code, _, err) = run(&["enroll", "--db", &p("db.bin"), "--model", &p("m.bin"), "--id", "0001", &img]);
    assert_eq!(code, 0, "{err}");

    // through the real binary: exit code and exact JSON line
    let out = bin()
        .args(["verify", "--db", &p("db.bin"), "--model", &p("m.bin"), "--id", "0001", "--threshold", "0.5", &img])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), r#"{"decision":"accept","score":0.0}"#);

    let other = p("c/sensorB/0003_1_2.png");
    let (code, out, _) = run(&["verify", "--db", &p("db.bin"), "--model", &p("m.bin"), "--id", "0001", "--threshold", "0.0", &other]);
    assert_eq!(code, 1);
    assert!(out.contains("\"reject\""));
    let (code, out, _) = run(&["verify", "--db", &p("db.bin"), "--model", &p("m.bin"), "--id", "0001", &other]);
    assert_eq!(code, 0);
    assert!(out.starts_with("{\"score\":"));

    let (code, _, err) = run(&["verify", "--db", &p("db.bin"), "--model", &p("m.bin"), "--id", "nobody", &img]);
    assert_eq!(code, 1);
    assert!(err.contains("nobody"));

    let (code, out, _) = run(&["inspect", &p("db.bin")]);
    assert_eq!(code, 0);
    assert!(out.contains("\"template_db\""));
    let (code, out, _) = run(&["inspect", &p("m.bin")]);
    assert_eq!(code, 0);
    assert!(out.contains("\"model\""));
}

#[test]
fn extract_writes_declared_length() {
    let dir = tempfile::tempdir().unwrap();
    let p = |s: &str| dir.path().join(s).to_string_lossy().into_owned();
    run(&["synth", "--out", &p("c"), "--fingers", "2", "--seed", "2"]);
    let img = p("c/sensorA/0002_1_1.png");
    let (code, _, err) = run(&["extract", "--kind", "coror", &img]);
    assert_eq!(code, 0, "{err}");
    let (h, v) = coror::descfile::load(std::path::Path::new(&format!("{img}.coror.desc"))).unwrap();
    assert_eq!(h.length, 768);
    assert_eq!(v.len(), 768);

    let (code, _, err) = run(&[
        "extract", "--kind", "gaborhog", "--out", &p("g.desc"), "--mask", &p("mask.pgm"),
        "--orientation-csv", &p("o.csv"), &img,
    ]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(coror::descfile::load(std::path::Path::new(&p("g.desc"))).unwrap().0.length, 2592);
    assert!(fs::read_to_string(p("o.csv")).unwrap().starts_with("row,col,theta_degrees,valid\n"));
    assert!(fs::metadata(p("mask.pgm")).is_ok());
}

#[test]
fn config_errors_precede_writes() {
    let dir = tempfile::tempdir().unwrap();
    let p = |s: &str| dir.path().join(s).to_string_lossy().into_owned();
    fs::write(p("bad.toml"), "[coror]\noffsets = [0]\n").unwrap();
    let (code, _, err) = run(&["--config", &p("bad.toml"), "synth", "--out", &p("c"), "--fingers", "2"]);
    assert_eq!(code, 1);
    assert!(err.contains("coror.offsets"), "{err}");
    assert!(!dir.path().join("c").exists());

    fs::write(p("typo.toml"), "[gabor]\nbinz = 4\n").unwrap();
    let (code, _, err) = run(&["synth", "--config", &p("typo.toml"), "--out", &p("c"), "--fingers", "2"]);
    assert_eq!(code, 1);
    assert!(err.contains("gabor.binz"), "{err}");

    fs::write(p("syntax.toml"), "[cca]\nmax_k = \n").unwrap();
    let (code, _, err) = run(&["--config", &p("syntax.toml"), "inspect", "--defaults"]);
    assert_eq!(code, 1);
    assert!(err.contains("line 2"), "{err}");
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let p = |s: &str| dir.path().join(s).to_string_lossy().into_owned();
    fs::write(p("cfg.toml"), "[cca]\nfusion_mode = \"sum\"\n").unwrap();
    run(&["synth", "--out", &p("c"), "--fingers", "3", "--seed", "7"]);
    for tag in ["1", "2"] {
        let model = p(&format!("m{tag}.bin"));
        let (code, _, err) = run(&["--config", &p("cfg.toml"), "train", "--gallery", &p("c/sensorA"), "--out", &model]);
        assert_eq!(code, 0, "{err}");
        let (code, _, err) = run(&[
            "--config", &p("cfg.toml"), "evaluate", "--gallery", &p("c/sensorA"), "--probe", &p("c/sensorB"),
            "--model", &model, "--out", &p(&format!("r{tag}")), "--impostor-cap", "4", "--seed", "3",
        ]);
        assert_eq!(code, 0, "{err}");
    }
    assert_eq!(fs::read(p("m1.bin")).unwrap(), fs::read(p("m2.bin")).unwrap());
    for f in ["metrics.json", "scores.csv", "det.csv"] {
        assert_eq!(fs::read(p(&format!("r1/{f}"))).unwrap(), fs::read(p(&format!("r2/{f}"))).unwrap(), "{f}");
    }
    let (_, out, _) = run(&["inspect", &p("m1.bin")]);
    assert!(out.contains("\"fusion_mode\":\"sum\""));
}

#[test]
fn thread_cap_respected() {
    let out = bin().env("COROR_THREADS", "1").args(["inspect", "--defaults"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("[coror]"));
}
