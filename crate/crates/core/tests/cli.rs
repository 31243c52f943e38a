use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use kpsc::ingest::parse_kpjson;

fn kpsc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kpsc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn golden_json() -> String {
    concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/golden_bbox3.json").to_string()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn encode_decode_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let stream = dir.path().join("a.kpsc");
    let back = dir.path().join("back.json");
    let o = kpsc(&["encode", &golden_json(), "-o", s(&stream)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("bits/point"));
    assert!(stream.exists());

    let o = kpsc(&["decode", s(&stream), "-o", s(&back)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let original = parse_kpjson(&fs::read_to_string(golden_json()).unwrap()).unwrap();
    let decoded = parse_kpjson(&fs::read_to_string(&back).unwrap()).unwrap();
    assert_eq!(original, decoded);

    // decode then re-encode gives the same bytes
    let again = dir.path().join("b.kpsc");
    let o = kpsc(&["encode", s(&back), "-o", s(&again)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(fs::read(&stream).unwrap(), fs::read(&again).unwrap());
}

#[test]
fn decode_to_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let stream = dir.path().join("a.kpsc");
    assert!(kpsc(&["encode", &golden_json(), "-o", s(&stream)])
        .status
        .success());
    let o = kpsc(&["decode", s(&stream)]);
    assert!(o.status.success());
    let original = parse_kpjson(&fs::read_to_string(golden_json()).unwrap()).unwrap();
    assert_eq!(parse_kpjson(&stdout(&o)).unwrap(), original);
}

#[test]
fn unknown_profile() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.kpsc");
    let o = kpsc(&[
        "encode",
        &golden_json(),
        "--profile",
        "octopus",
        "-o",
        s(&out),
    ]);
    assert!(!o.status.success());
    let err = stderr(&o);
    assert!(err.contains("unknown profile"), "{err}");
    assert_eq!(err.trim().lines().count(), 1, "{err}");
    assert!(!out.exists());
}

#[test]
fn profile_mismatch_and_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.kpsc");
    let o = kpsc(&[
        "encode",
        &golden_json(),
        "--profile",
        "skeleton15",
        "-o",
        s(&out),
    ]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("profile mismatch"));

    let pf = dir.path().join("box.txt");
    fs::write(&pf, "# same as bbox2d\nbbox2d 2 2\n0 1\n").unwrap();
    let o = kpsc(&[
        "encode",
        &golden_json(),
        "--profile-file",
        s(&pf),
        "-o",
        s(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn encode_mot() {
    let dir = tempfile::tempdir().unwrap();
    let mot = dir.path().join("gt.txt");
    fs::write(
        &mot,
        "1,3,100,200,50,80,1,-1,-1,-1\n2,3,102,201,50,80,1,-1,-1,-1\n1,7,10,10,5,5,1,-1,-1,-1\n",
    )
    .unwrap();
    let o = kpsc(&["encode", s(&mot), "--format", "mot"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let stream = dir.path().join("gt.kpsc");
    let o = kpsc(&["inspect", s(&stream)]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("profile: bbox2d (builtin"), "{text}");
    assert!(text.contains("frames: 2"), "{text}");
    assert!(text.contains("points: 6"), "{text}");

    let decoded = kpsc(&["decode", s(&stream)]);
    let seq = parse_kpjson(&stdout(&decoded)).unwrap();
    assert_eq!(seq.frames[0].objects[0].points[1], Some([150, 280].into()));
}

#[test]
fn bad_mot_line() {
    let dir = tempfile::tempdir().unwrap();
    let mot = dir.path().join("gt.txt");
    fs::write(&mot, "1,3,100,200,50,80\n1,4,1,2\n").unwrap();
    let o = kpsc(&["encode", s(&mot), "--format", "mot"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));
}

#[test]
fn truncated_stream() {
    let dir = tempfile::tempdir().unwrap();
    let stream = dir.path().join("a.kpsc");
    assert!(kpsc(&["encode", &golden_json(), "-o", s(&stream)])
        .status
        .success());
    let bytes = fs::read(&stream).unwrap();
    fs::write(&stream, &bytes[..bytes.len() - 3]).unwrap();
    let o = kpsc(&["decode", s(&stream)]);
    assert!(!o.status.success());
    let err = stderr(&o);
    assert!(err.contains("frame 2"), "{err}");
    assert!(stdout(&o).is_empty());
}

#[test]
fn inspect_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("empty.json");
    fs::write(&json, r#"{"profile":"face68","scale":[1,1],"frames":[]}"#).unwrap();
    let stream = dir.path().join("empty.kpsc");
    assert!(kpsc(&["encode", s(&json), "-o", s(&stream)])
        .status
        .success());
    let o = kpsc(&["inspect", s(&stream)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("frames: 0"));
}

#[test]
fn inspect_reports_budgets() {
    let dir = tempfile::tempdir().unwrap();
    let stream = dir.path().join("a.kpsc");
    assert!(kpsc(&[
        "encode",
        &golden_json(),
        "-o",
        s(&stream),
        "--weights",
        "3,1,1"
    ])
    .status
    .success());
    let text = stdout(&kpsc(&["inspect", s(&stream)]));
    assert!(text.contains("weights: 3,1,1"), "{text}");
    assert!(text.contains("payload bits: 100"), "{text}");
    assert!(
        text.contains("modes: independent 4, temporal 4, spatial_temporal 0, trajectory 0"),
        "{text}"
    );
    assert!(
        text.contains("frame,objects,points,bits,aux_bits\n0,1,2,50,8\n1,1,2,17,7\n2,2,4,30,12\n"),
        "{text}"
    );
}

#[test]
fn bench_skips_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("r.csv");
    let json = dir.path().join("r.json");
    let o = kpsc(&[
        "bench",
        "--synthetic",
        "constant_velocity",
        "--skips",
        "0,1,2",
        "--frames",
        "20",
        "--out-csv",
        s(&csv),
        "--out-json",
        s(&json),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4, "{text}");
    assert!(lines[0]
        .starts_with("sequence,profile,skip,sigma,seed,config,total_bits,points,bits_per_point"));
    let rows: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 3);
}

#[test]
fn bench_rejects_negative_sigma() {
    let o = kpsc(&["bench", "--synthetic", "static", "--sigmas", "0,-1"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("non-negative"), "{}", stderr(&o));
}

#[test]
fn bench_kpjson_input_to_stdout() {
    let o = kpsc(&[
        "bench",
        "--input",
        &golden_json(),
        "--configs",
        "multimodal,independent",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().count(), 3);
}

#[test]
fn missing_input() {
    let o = kpsc(&["decode", "/nonexistent/file.kpsc"]);
    assert!(!o.status.success());
    assert!(stderr(&o).starts_with("kpsc: error: cannot read"));
}
