use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn numid(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_numid"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const SMALL: &str = "scenario = \"scenario1\"\nsnr_db = [0.0, 6.0]\ntrials = 5\nseed = 3\n";

#[test]
fn sweep_writes_deterministic_results() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sim.toml");
    fs::write(&cfg, SMALL).unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let out = numid(&["sweep", "--config", s(&cfg), "--out", s(&a), "--jobs", "1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let out = numid(&["sweep", "--config", s(&cfg), "--out", s(&b), "--jobs", "2"]);
    assert!(out.status.success());
    let csv = fs::read_to_string(a.join("results.csv")).unwrap();
    assert_eq!(csv, fs::read_to_string(b.join("results.csv")).unwrap());
    assert_eq!(csv.lines().count(), 3);
    assert!(csv.starts_with(
        "snr_db,trials,type_rate,loc_rate,joint_rate,ber_blind,ber_nonblind,ber_awgn_theory,ber_rayleigh_theory\n"
    ));

    let sidecar = a.join("config.json");
    let c = dir.path().join("c");
    assert!(numid(&["sweep", "--config", s(&sidecar), "--out", s(&c)])
        .status
        .success());
    assert_eq!(csv, fs::read_to_string(c.join("results.csv")).unwrap());
}

#[test]
fn sweep_flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sim.toml");
    fs::write(&cfg, SMALL).unwrap();
    let out = dir.path().join("o");
    let run = numid(&[
        "sweep",
        "--config",
        s(&cfg),
        "--out",
        s(&out),
        "--trials",
        "2",
        "--seed",
        "9",
    ]);
    assert!(run.status.success());
    let csv = fs::read_to_string(out.join("results.csv")).unwrap();
    assert!(csv.lines().nth(1).unwrap().starts_with("0,2,"));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("config.json")).unwrap()).unwrap();
    assert_eq!(json["seed"], 9);
    assert_eq!(json["trials"], 2);
}

#[test]
fn sweep_errors_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.toml");
    let out = numid(&["sweep", "--config", s(&missing), "--out", s(dir.path())]);
    assert!(!out.status.success());
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "trials = 0\n").unwrap();
    assert!(!numid(&["sweep", "--config", s(&bad), "--out", s(dir.path())])
        .status
        .success());
    fs::write(&bad, "colour = \"red\"\n").unwrap();
    let out = numid(&["sweep", "--config", s(&bad), "--out", s(dir.path())]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("colour"));
}

#[test]
fn classify_synthetic_scenario_two() {
    let dir = tempfile::tempdir().unwrap();
    for format in ["f32le", "i16le"] {
        let cap = dir.path().join(format!("cap.{format}"));
        let out = numid(&["synth", "--out", s(&cap), "--format", format, "--scenario", "scenario2"]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let json = dir.path().join("report.json");
        let out = numid(&[
            "classify",
            "--in",
            s(&cap),
            "--format",
            format,
            "--base",
            "df0=15000,n0=4096,m0=1024,cp=1/16",
            "--candidates",
            "0,2",
            "--json",
            s(&json),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let text = String::from_utf8(out.stdout).unwrap();
        assert!(text.contains("subband 1: k=0 (15 kHz)"), "{text}");
        assert!(text.contains("subband 2: k=2 (60 kHz)"), "{text}");
        let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(&json).unwrap()).unwrap();
        assert_eq!(report["identification"]["assignment"], serde_json::json!([0, 2]));
    }
}

#[test]
fn classify_rejects_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.bin");
    fs::write(&empty, []).unwrap();
    let out = numid(&["classify", "--in", s(&empty), "--format", "f32le"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("empty"));

    let odd = dir.path().join("odd.bin");
    fs::write(&odd, [0u8; 4352 * 8 + 3]).unwrap();
    assert!(!numid(&["classify", "--in", s(&odd), "--format", "f32le"])
        .status
        .success());
    assert!(!numid(&["classify", "--in", s(&odd), "--format", "cs8"])
        .status
        .success());
    assert!(
        !numid(&["classify", "--in", s(&odd), "--format", "f32le", "--base", "n0=3"])
            .status
            .success()
    );

    let zeros = dir.path().join("zeros.bin");
    fs::write(&zeros, vec![0u8; 4352 * 4]).unwrap();
    let out = numid(&["classify", "--in", s(&zeros), "--format", "i16le"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("no numerology matched"));
}

#[test]
fn shipped_configs_load() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut n = 0;
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        numid_core::sim::SimConfig::from_path(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        n += 1;
    }
    assert!(n >= 2);
}
