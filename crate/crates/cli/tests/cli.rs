use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use jsonschema::JSONSchema;
use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn prosody(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_prosody"))
        .args(args)
        .env_remove("PROSODY_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write_wav(dir: &Path, name: &str, samples: &[f64], rate: u32) -> PathBuf {
    let path = dir.join(name);
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: rate,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut w = hound::WavWriter::create(&path, spec).unwrap();
    for s in samples {
        w.write_sample((s * 32767.0).round() as i16).unwrap();
    }
    w.finalize().unwrap();
    path
}

fn tone(freq: f64, mod_hz: f64, dur: f64, rate: u32) -> Vec<f64> {
    (0..(dur * rate as f64) as usize)
        .map(|i| {
            let t = i as f64 / rate as f64;
            0.8 * 0.5 * (1.0 + (2.0 * PI * mod_hz * t).cos()) * (2.0 * PI * freq * t).sin()
        })
        .collect()
}

fn speechlike(dir: &Path) -> PathBuf {
    let mut s = tone(180.0, 4.0, 1.0, 16000);
    s.extend(vec![0.0; 4800]);
    s.extend(tone(150.0, 3.0, 1.2, 16000));
    write_wav(dir, "speech.wav", &s, 16000)
}

fn schema(name: &str) -> JSONSchema {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("schemas")
        .join(format!("{name}.schema.json"));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    JSONSchema::compile(&v).expect("schema compiles")
}

fn assert_valid(name: &str, args: &[&str]) -> Value {
    let mut full = vec!["--json"];
    full.extend_from_slice(args);
    let out = prosody(&full);
    assert_eq!(out.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    let compiled = schema(name);
    if let Err(errors) = compiled.validate(&v) {
        let msgs: Vec<String> = errors.map(|e| format!("{} at {}", e, e.instance_path)).collect();
        panic!("{name}: {msgs:?}");
    }
    v
}

#[test]
fn every_subcommand_matches_its_schema() {
    let dir = tempfile::tempdir().unwrap();
    let wav = speechlike(dir.path());
    let wav = wav.to_str().unwrap();
    let iambic = fixture("iambic.csv");
    let grid = fixture("syllables.TextGrid");
    let constant = fixture("constant.csv");

    let cal = assert_valid("calibrate", &["calibrate"]);
    assert_eq!(cal["pass"], true);
    let a = assert_valid("aems", &["aems", wav, "--cutoff-hz", "20"]);
    assert_eq!(a["files"].as_array().unwrap().len(), 1);
    assert_valid("metrics", &["metrics", grid.to_str().unwrap(), "--tier", "syll"]);
    let m = assert_valid("metrics", &["metrics", constant.to_str().unwrap()]);
    assert!(m["quadrants"].is_null());
    assert_valid(
        "timetree",
        &["timetree", iambic.to_str().unwrap(), "--relation", "iambic", "--polarity", "lower"],
    );
    assert_valid(
        "timetree",
        &["timetree", grid.to_str().unwrap(), "--tier", "syll", "--relation", "trochaic", "--polarity", "higher", "--arity", "nary"],
    );
    assert_valid("spectree", &["spectree", wav, "--cutoff-hz", "10"]);
    assert_valid("tone-gen", &["tone-gen", "HLHLH"]);
    let c = assert_valid("intonation-check", &["intonation", "check", "%H", "H*", "L-", "L%"]);
    assert_eq!(c["accepted"], true);
    let e = assert_valid("intonation-enum", &["intonation", "enum", "--max-len", "4"]);
    assert_eq!(e["count"], 48);
    assert_valid("intonation-machine", &["intonation", "machine", "pierrehumbert"]);
    assert_valid("intonation-machine", &["intonation", "machine", "terracing"]);
    let f = assert_valid("f0", &["f0", wav]);
    assert_eq!(f["files"][0]["ipus"].as_array().unwrap().len(), 2);

    let out = tempfile::tempdir().unwrap();
    let o = prosody(&["f0", wav, "--out-dir", out.path().to_str().unwrap(), "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let track = out.path().join("speech.f0.csv");
    let track = track.to_str().unwrap();
    let cf = assert_valid("contour-fit", &["contour-fit", track, "--degree", "2"]);
    assert_eq!(cf["models"].as_array().unwrap().len(), 1);
    let cf = assert_valid("contour-fit", &["contour-fit", track, "--degree", "2", "--ipus-from", wav]);
    assert_eq!(cf["models"].as_array().unwrap().len(), 2);
    assert_valid("contour-fit", &["contour-fit", track, "--degree", "1", "--domain", "0.1:0.9"]);
}

#[test]
fn worked_time_trees_print_exactly() {
    let o = prosody(&["timetree", fixture("iambic.csv").to_str().unwrap(), "--relation", "iambic", "--polarity", "lower"]);
    assert_eq!(stdout(&o), "(r (w (w miss) (s jones)) (s (w came) (s home)))\n");
    let o = prosody(&["timetree", fixture("trochaic.csv").to_str().unwrap(), "--relation", "trochaic", "--polarity", "lower"]);
    assert_eq!(stdout(&o), "(r (s (s light) (w house)) (w (s keep) (w er)))\n");
}

#[test]
fn constant_durations_give_zero_metrics() {
    let o = prosody(&["--json", "metrics", fixture("constant.csv").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    for k in ["variance", "pim", "pfd", "rpvi", "npvi"] {
        assert_eq!(v["metrics"][k], 0.0, "{k}");
    }
    // the pause interval is excluded
    assert_eq!(v["metrics"]["n"], 4);
}

#[test]
fn exit_codes() {
    assert_eq!(prosody(&[]).status.code(), Some(2));
    assert_eq!(prosody(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(prosody(&["timetree", "x.csv", "--relation", "sideways", "--polarity", "lower"]).status.code(), Some(2));
    assert_eq!(prosody(&["--help"]).status.code(), Some(0));
    // several tiers and no --tier
    let o = prosody(&["metrics", fixture("syllables.TextGrid").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--tier"));
    // missing file, unknown symbol, too few voiced frames
    assert_eq!(prosody(&["aems", "/nonexistent/a.wav"]).status.code(), Some(1));
    assert_eq!(prosody(&["intonation", "check", "%H", "X*"]).status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let track = dir.path().join("t.csv");
    std::fs::write(&track, "time_s,f0_hz\n0,100\n0.01,\n0.02,110\n").unwrap();
    let o = prosody(&["contour-fit", track.to_str().unwrap(), "--degree", "3"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!o.stderr.is_empty());
    // a rejected string is a result, not an error
    let o = prosody(&["intonation", "check", "%H", "H-", "H%"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "rejected\n");
}

#[test]
fn batch_keeps_going_past_bad_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let wav = speechlike(dir.path());
    let o = prosody(&["--json", "aems", "/nonexistent/a.wav", wav.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["files"].as_array().unwrap().len(), 1);
}

fn listing(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect()
}

#[test]
fn outputs_are_deterministic_and_confined() {
    let input = tempfile::tempdir().unwrap();
    let wav = speechlike(input.path());
    let wav = wav.to_str().unwrap();
    let grid = fixture("syllables.TextGrid");
    let runs: Vec<Vec<&str>> = vec![
        vec!["calibrate"],
        vec!["aems", wav, wav],
        vec!["metrics", grid.to_str().unwrap(), "--tier", "syll"],
        vec!["spectree", wav],
        vec!["tone-gen", "HHLLH"],
        vec!["f0", wav],
    ];
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for args in &runs {
        for dir in [&a, &b] {
            let mut full = args.clone();
            full.extend(["--out-dir", dir.path().to_str().unwrap()]);
            let o = prosody(&full);
            assert_eq!(o.status.code(), Some(0), "{args:?}");
        }
    }
    let la = listing(a.path());
    let lb = listing(b.path());
    assert_eq!(la, lb);
    assert!(la.contains_key("calibrate.svg"));
    assert!(la.contains_key("speech-1.aems-heatmap.svg"));
    assert!(la.contains_key("aems-heatmap.svg"));
    assert!(la.contains_key("syllables.metrics.csv"));
    assert!(la.contains_key("tone-gen.csv"));
    // nothing besides the wav was written next to the input
    assert_eq!(listing(input.path()).len(), 1);
}

#[test]
fn out_dir_from_environment_and_format_filter() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_prosody"))
        .args(["tone-gen", "HL", "--format", "svg"])
        .env("PROSODY_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let names: Vec<String> = listing(dir.path()).into_keys().collect();
    assert_eq!(names, vec!["tone-gen.svg".to_string()]);

    // without an output directory nothing is written anywhere
    let cwd = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_prosody"))
        .args(["tone-gen", "HL"])
        .env_remove("PROSODY_OUT_DIR")
        .current_dir(cwd.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(listing(cwd.path()).is_empty());
}

#[test]
fn seed_is_accepted_everywhere() {
    let a = prosody(&["--seed", "1", "--json", "tone-gen", "HLH"]);
    let b = prosody(&["--json", "tone-gen", "HLH", "--seed", "99"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn calibration_plot_marks_five_hz() {
    let dir = tempfile::tempdir().unwrap();
    let o = prosody(&["calibrate", "--out-dir", dir.path().to_str().unwrap(), "--format", "svg"]);
    assert_eq!(o.status.code(), Some(0));
    let doc = std::fs::read_to_string(dir.path().join("calibrate.svg")).unwrap();
    assert_eq!(doc.matches(r#"class="zone""#).count(), 1);
    assert!(doc.contains(">5 Hz<"));
    assert!(doc.contains(r#"class="shape""#));
}
