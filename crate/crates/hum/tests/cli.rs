use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn hum(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hum"))
        .args(args)
        .output()
        .expect("run hum")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write_wav(path: &Path, samples: &[f64]) {
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: 48_000,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut w = hound::WavWriter::create(path, spec).unwrap();
    for &s in samples {
        w.write_sample((s * 32767.0).round() as i16).unwrap();
    }
    w.finalize().unwrap();
}

const CLICKS: [f64; 6] = [0.25, 0.75, 1.25, 1.75, 2.25, 2.75];

/// Three seconds of faint noise with a short decaying 1 kHz burst every
/// half second.
fn click_train(dir: &Path) -> PathBuf {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut x: Vec<f64> = (0..144_000).map(|_| rng.random_range(-1e-3..1e-3)).collect();
    for c in CLICKS {
        let start = (c * 48_000.0) as usize;
        for k in 0..480 {
            let t = k as f64 / 48_000.0;
            x[start + k] += 0.8 * (-t / 0.002).exp() * (2.0 * std::f64::consts::PI * 1000.0 * t).sin();
        }
    }
    let path = dir.join("clicks.wav");
    write_wav(&path, &x);
    path
}

#[test]
fn click_train_gives_one_onset_per_click() {
    let dir = tempfile::tempdir().unwrap();
    let wav = click_train(dir.path());
    let out = hum(&["detect", wav.to_str().unwrap(), "--detector", "energy"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let times: Vec<f64> = stdout(&out).lines().map(|l| l.parse().unwrap()).collect();
    assert_eq!(times.len(), CLICKS.len(), "{times:?}");
    for (t, c) in times.iter().zip(CLICKS) {
        assert!((t - c).abs() <= 0.05, "{t} vs {c}");
    }
    for line in stdout(&out).lines() {
        assert_eq!(line.split('.').nth(1).unwrap().len(), 6);
    }

    let json = hum(&["detect", wav.to_str().unwrap(), "--json"]);
    let parsed: Vec<f64> = serde_json::from_slice(&json.stdout).unwrap();
    assert_eq!(parsed.len(), times.len());
    for (a, b) in parsed.iter().zip(&times) {
        assert!((a - b).abs() < 1e-6);
    }
}

#[test]
fn series_csv_and_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let wav = click_train(dir.path());
    let csv = dir.path().join("series.csv");
    let listing = dir.path().join("onsets.txt");
    let out = hum(&[
        "detect",
        wav.to_str().unwrap(),
        "--detector",
        "sd",
        "--series-csv",
        csv.to_str().unwrap(),
        "--out",
        listing.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("time_seconds,value\n"));
    // 144000 samples at hop 2048.
    assert_eq!(text.lines().count(), 1 + 71);
    assert!(!std::fs::read_to_string(&listing).unwrap().is_empty());
}

#[test]
fn silent_wav_lists_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let wav = dir.path().join("silence.wav");
    write_wav(&wav, &vec![0.0; 48_000]);
    for det in ["energy", "sd", "dsd"] {
        let out = hum(&["detect", wav.to_str().unwrap(), "--detector", det]);
        assert!(out.status.success(), "{det}: {}", stderr(&out));
        assert!(out.stdout.is_empty(), "{det}");
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let wav = click_train(dir.path());
    let w = wav.to_str().unwrap();
    assert_eq!(hum(&["detect", w, "--detector", "pitch"]).status.code(), Some(1));
    assert_eq!(hum(&["detect", w, "--neighbors", "1,x"]).status.code(), Some(1));
    assert_eq!(hum(&["detect", "/nonexistent/a.wav"]).status.code(), Some(3));
    let junk = dir.path().join("junk.wav");
    std::fs::write(&junk, b"definitely not audio").unwrap();
    assert_eq!(hum(&["detect", junk.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(hum(&["detect", w, "--detector", "sd", "--window", "1000"]).status.code(), Some(2));
    assert_eq!(hum(&["power", "simulate", "--trials", "0"]).status.code(), Some(1));
    assert_eq!(hum(&["--help"]).status.code(), Some(0));
    assert_eq!(hum(&[]).status.code(), Some(1));
}

#[test]
fn database_commands() {
    let dir = tempfile::tempdir().unwrap();
    let db = dir.path().join("songs.json");
    let d = db.to_str().unwrap();
    let add = |id: &str, onsets: &str| hum(&["db", "add", "--db", d, "--id", id, "--title", "A Song", "--onsets", onsets]);

    assert!(add("s1", "0,1,2,3.5").status.success());
    assert!(add("s2", "0 0.5 2 2.25 4").status.success());
    let bad = add("s3", "3,1");
    assert_eq!(bad.status.code(), Some(2));
    assert!(stderr(&bad).contains("non-increasing"), "{}", stderr(&bad));
    assert_eq!(add("s1", "0,1").status.code(), Some(2));

    let list = hum(&["db", "list", "--db", d]);
    assert_eq!(stdout(&list), "s1\tA Song\t4\ns2\tA Song\t5\n");
    let json = hum(&["db", "list", "--db", d, "--json"]);
    let parsed = hum::store::db_from_str(&stdout(&json)).unwrap();
    assert_eq!(parsed, hum::store::db_load(&db).unwrap());

    let ok = hum(&["db", "validate", "--db", d]);
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(stdout(&ok), "ok: 2 records\n");

    std::fs::write(&db, r#"[{"id":"x","title":"X","onsets_beats":[0,2,1]}]"#).unwrap();
    let broken = hum(&["db", "validate", "--db", d]);
    assert_eq!(broken.status.code(), Some(2));
    assert!(stderr(&broken).contains("record 0"), "{}", stderr(&broken));
    assert_eq!(hum(&["db", "list", "--db", "/nonexistent/db.json"]).status.code(), Some(3));
}

#[test]
fn search_commands() {
    let dir = tempfile::tempdir().unwrap();
    let db = dir.path().join("songs.json");
    std::fs::write(
        &db,
        r#"[{"id":"a","title":"Alpha","onsets_beats":[0,1,3,4,4.5,6]},
            {"id":"b","title":"Beta","onsets_beats":[0,2,2.5,3,5,8]},
            {"id":"c","title":"Gamma","onsets_beats":[0,0.5,1,1.5,2,2.5]}]"#,
    )
    .unwrap();
    let d = db.to_str().unwrap();
    let query = dir.path().join("q.txt");
    std::fs::write(&query, "0\n2\n2.5\n3\n5\n8\n").unwrap();
    let q = query.to_str().unwrap();

    let out = hum(&["search", q, "--db", d]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    let first = text.lines().nth(1).unwrap();
    assert!(first.contains(" b ") && first.contains("1.0000 *"), "{text}");

    let json = hum(&["search", q, "--db", d, "--json", "--top", "2"]);
    let v: serde_json::Value = serde_json::from_slice(&json.stdout).unwrap();
    assert_eq!(v["entries"].as_array().unwrap().len(), 2);
    assert_eq!(v["entries"][0]["id"], "b");
    assert!((v["entries"][0]["score"].as_f64().unwrap() - 1.0).abs() < 1e-12);

    let short = dir.path().join("one.json");
    std::fs::write(&short, "[1.5]").unwrap();
    let one = hum(&["search", short.to_str().unwrap(), "--db", d]);
    assert_eq!(one.status.code(), Some(2));
    assert!(stderr(&one).contains("re-record"), "{}", stderr(&one));

    assert_eq!(hum(&["search", q, "--db", "/nonexistent/db.json"]).status.code(), Some(3));

    let wav = click_train(dir.path());
    let from_audio = hum(&["search", wav.to_str().unwrap(), "--db", d]);
    assert!(from_audio.status.success(), "{}", stderr(&from_audio));
    assert_eq!(stdout(&from_audio).lines().count(), 4);
}

#[test]
fn power_commands() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("bound.csv");
    let args = [
        "power", "bound", "--from", "-200", "--to", "600", "--step", "100", "--draws", "3000", "--out",
        csv.to_str().unwrap(),
    ];
    let out = hum(&args);
    assert!(out.status.success(), "{}", stderr(&out));
    let summary = stdout(&out);
    assert!(summary.contains("false-positive upper bound: 4.70"), "{summary}");
    assert!(summary.contains("region with bound >= 0.9"), "{summary}");
    let first = std::fs::read(&csv).unwrap();
    assert!(first.starts_with(b"offset_samples,probability,stderr\n"));
    assert_eq!(String::from_utf8_lossy(&first).lines().count(), 1 + 9);
    hum(&args);
    assert_eq!(std::fs::read(&csv).unwrap(), first);

    let sim = ["power", "simulate", "--detector", "sd", "--trials", "8", "--seed", "3"];
    let a = hum(&sim);
    assert!(a.status.success(), "{}", stderr(&a));
    assert_eq!(a.stdout, hum(&sim).stdout);
    assert!(stdout(&a).starts_with("offset_samples,probability,stderr\n"));
    assert_eq!(hum(&["power", "bound", "--from", "5", "--to", "1"]).status.code(), Some(1));
    assert_eq!(hum(&["power", "bound", "--ssnr=-1", "--to", "0"]).status.code(), Some(2));
}
