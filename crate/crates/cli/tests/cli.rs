use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> String {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name);
    p.to_str().unwrap().to_string()
}

fn vvcode(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vvcode")).args(args).env("VVCODE_THREADS", "2").output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn verify_run_length_passes() {
    let out = vvcode(&[
        "verify", "--dict", &fixture("run_length.json"), "--source", &fixture("fair.json"),
        "--depth", "64", "--tol", "1e-9",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert!(r["result"]["residual"].as_f64().unwrap() < 1e-9);
    assert_eq!(r["result"]["verdict"], "pass");
    assert_eq!(r["format_version"], 1);
    assert_eq!(r["config"]["command"], "verify");
}

#[test]
fn improper_dictionary_names_the_pair() {
    let out = vvcode(&["check", "--dict", &fixture("bad_prefix.json")]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.lines().count(), 1);
    assert!(err.contains("`0`") && err.contains("`0.1`"), "{err}");
}

#[test]
fn missing_file_is_an_input_error() {
    let out = vvcode(&["check", "--dict", "/nonexistent/dict.json"]);
    assert_eq!(out.status.code(), Some(2));
    let out = vvcode(&["measure", "--dict", &fixture("d3.json")]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn non_asc_check_is_inconclusive() {
    let out = vvcode(&["check", "--dict", &fixture("non_asc.json"), "--source", &fixture("fair.json")]);
    assert_eq!(out.status.code(), Some(3));
    let r = json(&out);
    assert_eq!(r["result"]["asc"]["status"], "undetermined");
    assert_eq!(r["result"]["asc"]["residual_mass"], 0.5);
}

#[test]
fn non_asc_verify_is_inconclusive() {
    let out = vvcode(&["verify", "--dict", &fixture("non_asc.json"), "--source", &fixture("fair.json")]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn encode_decode_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let bin = dir.path().join("s.bin");
    let back = dir.path().join("s.txt");
    let (d, cb) = (fixture("t4.json"), fixture("t4_codebook.json"));
    let out = vvcode(&["encode", "--dict", &d, "--codebook", &cb, "--in", &fixture("stream.txt"), "--out", bin.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let out = vvcode(&["decode", "--dict", &d, "--codebook", &cb, "--in", bin.to_str().unwrap(), "--out", back.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let original = std::fs::read_to_string(fixture("stream.txt")).unwrap();
    let decoded = std::fs::read_to_string(&back).unwrap();
    let toks = |s: &str| s.split_whitespace().map(str::to_owned).collect::<Vec<_>>();
    assert_eq!(toks(&original), toks(&decoded));

    // Re-encoding the decoded stream gives the same bytes.
    let bin2 = dir.path().join("s2.bin");
    vvcode(&["encode", "--dict", &d, "--codebook", &cb, "--in", back.to_str().unwrap(), "--out", bin2.to_str().unwrap()]);
    assert_eq!(std::fs::read(&bin).unwrap(), std::fs::read(&bin2).unwrap());
}

#[test]
fn corrupt_stream_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.bin");
    std::fs::write(&bad, [0x00, 0x01, 0x02]).unwrap();
    let out = vvcode(&[
        "decode", "--dict", &fixture("t4.json"), "--codebook", &fixture("t4_codebook.json"),
        "--in", bad.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn replay_reproduces_simulation() {
    let dir = tempfile::tempdir().unwrap();
    let stored = dir.path().join("sim.json");
    let out = vvcode(&[
        "--report", stored.to_str().unwrap(), "simulate", "--dict", &fixture("d3.json"),
        "--source", &fixture("fair.json"), "--phrases", "20000", "--seed", "7", "--histogram",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let out = vvcode(&["replay", stored.to_str().unwrap(), "--check"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(String::from_utf8(out.stdout).unwrap(), std::fs::read_to_string(&stored).unwrap());

    // A tampered report no longer matches.
    let text = std::fs::read_to_string(&stored).unwrap().replacen("\"seed\": 7", "\"seed\": 8", 1);
    let tampered = dir.path().join("tampered.json");
    std::fs::write(&tampered, text).unwrap();
    let out = vvcode(&["replay", tampered.to_str().unwrap(), "--check"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn version_is_json() {
    let out = vvcode(&["--version"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["name"], "vvcode");
    assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
}

#[test]
fn csv_measure_row() {
    let out = vvcode(&["--format", "csv", "measure", "--dict", &fixture("d3.json"), "--source", &fixture("fair.json")]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let header = rdr.headers().unwrap().clone();
    let row = rdr.records().next().unwrap().unwrap();
    let get = |k: &str| row[header.iter().position(|h| h == k).unwrap()].to_string();
    assert_eq!(get("h_d_low"), "1.5");
    assert_eq!(get("lbar_high"), "1.5");
    assert_eq!(get("h_p"), "1.0");
}

#[test]
fn tunstall_then_codebook() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().join("t.json");
    let cb = dir.path().join("cb.json");
    let out = vvcode(&["tunstall", "--source", &fixture("biased.json"), "--size", "4", "--out", d.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let out = vvcode(&[
        "codebook", "--dict", d.to_str().unwrap(), "--source", &fixture("biased.json"), "--out", cb.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let out = vvcode(&[
        "rate", "--dict", d.to_str().unwrap(), "--codebook", cb.to_str().unwrap(), "--source", &fixture("biased.json"),
        "--symbols", "10000",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["result"]["lossless"], true);
}

#[test]
fn truncation_identity_over_cli() {
    let out = vvcode(&[
        "verify", "--dict", &fixture("d3.json"), "--source", &fixture("biased.json"), "--identity", "truncation",
        "--m-max", "6",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn unknown_flag_is_usage_error() {
    let out = vvcode(&["check", "--nope"]);
    assert_eq!(out.status.code(), Some(2));
}
