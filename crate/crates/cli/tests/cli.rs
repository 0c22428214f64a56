use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const TINY: &str = r#"{
 "scenario": {"thickness": 0.005, "excitation": {"duration": 0.25, "f_start": 60, "f_end": 250},
  "sim": {"strip_length": 0.35, "element_size": 0.001, "total_time": 0.25},
  "sampling": {"ppm": 500, "fps": 800, "window": [0.02, 0.1]}, "noise": 0.05},
 "invert": {"roi": {"gamma_max": 1500, "omega_min": 400, "omega_max": 1500, "bins": [32, 32]},
  "grid": {"thickness": {"min": 0.004, "max": 0.006, "count": 3},
           "stiffness": {"min": 8000, "max": 12000, "count": 3}},
  "search": {"fem": {"element_size": 0.001, "branches": 6, "gamma_count": 20}}}
}"#;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wave-elastix"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = run(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn error_line(out: &Output) -> Value {
    let stderr = String::from_utf8_lossy(&out.stderr);
    let line = stderr
        .lines()
        .rev()
        .find(|l| l.starts_with("{\"error\""))
        .expect("no error line");
    serde_json::from_str(line).unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn tiny(dir: &Path) {
    std::fs::write(dir.join("tiny.json"), TINY).unwrap();
}

#[test]
fn pipeline_recovers_truth_and_replays_from_manifest() {
    let d = tempfile::tempdir().unwrap();
    tiny(d.path());
    let stdout = ok(d.path(), &["pipeline", "--config", "tiny.json", "--out-dir", "a"]);
    assert!(stdout.contains("T* = 0.005000 m"), "{stdout}");
    assert!(stdout.contains("E* = 10000.0 Pa"), "{stdout}");
    for f in [
        "field.dfz",
        "dispersion.dgz",
        "dispersion.png",
        "result.json",
        "landscape.csv",
        "landscape.png",
    ] {
        assert!(d.path().join("a").join(f).exists(), "{f} missing");
    }
    let m = json(&d.path().join("a/manifest.json"));
    let stages: Vec<&str> = m["timings"]
        .as_array()
        .unwrap()
        .iter()
        .map(|t| t["stage"].as_str().unwrap())
        .collect();
    assert_eq!(stages, ["simulate", "dispersion", "invert"]);
    assert_eq!(m["config"]["scenario"]["noise"], 0.05);

    ok(d.path(), &["pipeline", "--config", "a/manifest.json", "--out-dir", "b"]);
    let m2 = json(&d.path().join("b/manifest.json"));
    let hashes = |m: &Value| -> Vec<String> {
        m["outputs"]
            .as_array()
            .unwrap()
            .iter()
            .map(|a| a["sha256"].as_str().unwrap().to_string())
            .collect()
    };
    assert_eq!(hashes(&m), hashes(&m2));
    assert_eq!(m["config"], m2["config"]);

    let csv = std::fs::read_to_string(d.path().join("a/landscape.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "thickness_m,stiffness_pa,score");
    assert_eq!(csv.lines().count(), 1 + 9);
}

#[test]
fn staged_commands_match_pipeline() {
    let d = tempfile::tempdir().unwrap();
    tiny(d.path());
    let p = d.path();
    ok(p, &["pipeline", "--config", "tiny.json", "--out-dir", "pipe"]);
    // the staged commands read sub-objects of the same document
    let doc: Value = serde_json::from_str(TINY).unwrap();
    std::fs::write(p.join("scenario.json"), doc["scenario"].to_string()).unwrap();
    std::fs::write(p.join("invert.json"), doc["invert"].to_string()).unwrap();
    ok(
        p,
        &[
            "simulate",
            "--config",
            "scenario.json",
            "-o",
            "f.dfz",
            "--manifest",
            "sim.json",
        ],
    );
    ok(p, &["dispersion", "f.dfz", "-o", "img.dgz", "--png", "img.png"]);
    ok(p, &["invert", "img.dgz", "--config", "invert.json", "--out-dir", "inv"]);
    assert_eq!(
        std::fs::read(p.join("f.dfz")).unwrap(),
        std::fs::read(p.join("pipe/field.dfz")).unwrap()
    );
    let a = json(&p.join("inv/result.json"));
    let b = json(&p.join("pipe/result.json"));
    assert_eq!(a["T_star"], b["T_star"]);
    assert_eq!(a["E_star"], b["E_star"]);
    let sim = json(&p.join("sim.json"));
    assert_eq!(sim["command"], "simulate");
    assert_eq!(
        sim["outputs"][0]["bytes"].as_u64().unwrap(),
        std::fs::metadata(p.join("f.dfz")).unwrap().len()
    );
}

#[test]
fn video_frames_round_trip_through_extract() {
    let d = tempfile::tempdir().unwrap();
    tiny(d.path());
    let p = d.path();
    let doc: Value = serde_json::from_str(TINY).unwrap();
    let mut sc = doc["scenario"].clone();
    sc["noise"] = 0.0.into();
    std::fs::write(p.join("scenario.json"), sc.to_string()).unwrap();
    ok(
        p,
        &[
            "simulate",
            "--config",
            "scenario.json",
            "-o",
            "clean.dfz",
            "--video-dir",
            "frames",
        ],
    );
    let frames = std::fs::read_dir(p.join("frames")).unwrap().count();
    assert_eq!(frames, 200);

    let missing = run(p, &["extract", "frames", "-o", "x.dfz"]);
    assert_eq!(missing.status.code(), Some(3));
    assert_eq!(error_line(&missing)["error"]["kind"], "config");

    let stdout = ok(p, &["extract", "frames", "--fps", "800", "--ppm", "500", "-o", "x.dfz"]);
    assert!(stdout.contains("filled fraction"));
    assert!(p.join("x.dfz").exists());
}

#[test]
fn curves_csv_and_single_wavenumber() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    ok(
        p,
        &[
            "curves",
            "--thickness",
            "0.005",
            "--stiffness",
            "8000",
            "--set",
            "fem.branches=4",
            "-o",
            "c.csv",
            "--png",
            "c.png",
        ],
    );
    let csv = std::fs::read_to_string(p.join("c.csv")).unwrap();
    assert_eq!(
        csv.lines().next().unwrap(),
        "gamma_rad_per_m,omega_1,omega_2,omega_3,omega_4"
    );
    assert!(p.join("c.png").exists());

    ok(
        p,
        &[
            "curves",
            "--set",
            "gamma=[300]",
            "--set",
            "fem.branches=3",
            "-o",
            "one.csv",
            "--png",
            "one.png",
        ],
    );
    let one = std::fs::read_to_string(p.join("one.csv")).unwrap();
    assert_eq!(one.lines().count(), 2);
    assert!(one.lines().nth(1).unwrap().starts_with("300"));
    assert!(!p.join("one.png").exists());
}

#[test]
fn charnums_reports_similitude() {
    let d = tempfile::tempdir().unwrap();
    let scaled = r#"compare={"gamma":3000,"omega":6283.185307179586,"window_length":0.02,"thickness":0.001,"element_size":0.00005,"ppm":10000,"fps":6000,"duration":0.1}"#;
    let out = ok(d.path(), &["charnums", "--set", scaled, "-o", "cn.json"]);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["char_numbers"]["pi1"], 60.0);
    let report = v["similitude"].as_array().unwrap();
    assert_eq!(report.len(), 6);
    assert!(report.iter().all(|r| r["differs"] == false), "{report:?}");
    assert_eq!(json(&d.path().join("cn.json")), v);
}

#[test]
fn runtime_with_empty_grid_writes_empty_table() {
    let d = tempfile::tempdir().unwrap();
    ok(
        d.path(),
        &["runtime", "--set", "grid.thickness.count=0", "--manifest", "m.json"],
    );
    let m = json(&d.path().join("m.json"));
    assert_eq!(m["runtime"], Value::Array(vec![]));
}

#[test]
fn runtime_small_table() {
    let d = tempfile::tempdir().unwrap();
    let out = ok(
        d.path(),
        &[
            "--threads",
            "1",
            "runtime",
            "--set",
            "element_sizes=[0.002,0.001]",
            "--set",
            "grid.thickness.count=2",
            "--set",
            "grid.stiffness.count=3",
            "--set",
            "gamma_count=5",
            "--set",
            "branches=3",
            "--manifest",
            "m.json",
        ],
    );
    assert_eq!(out.lines().count(), 3);
    let m = json(&d.path().join("m.json"));
    let rows = m["runtime"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0]["cells"], 6);
    assert!(rows[1]["elements"].as_u64() > rows[0]["elements"].as_u64());
    assert_eq!(m["threads"], 1);
}

#[test]
fn error_exit_codes() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    let unknown = run(p, &["charnums", "--set", "nonsense=1"]);
    assert_eq!(unknown.status.code(), Some(3));
    assert_eq!(error_line(&unknown)["error"]["code"], 3);

    let missing = run(p, &["dispersion", "nope.dfz", "-o", "x.dgz"]);
    assert_eq!(missing.status.code(), Some(4));
    assert_eq!(error_line(&missing)["error"]["kind"], "io");

    std::fs::write(p.join("junk.dgz"), b"not a container").unwrap();
    let junk = run(p, &["invert", "junk.dgz"]);
    assert_eq!(junk.status.code(), Some(4));

    assert_eq!(run(p, &["simulate"]).status.code(), Some(2));
    assert_eq!(run(p, &["frobnicate"]).status.code(), Some(2));

    let bad_geom = run(p, &["curves", "--thickness=-1", "-o", "c.csv"]);
    assert_eq!(bad_geom.status.code(), Some(3));

    let zero = run(p, &["--threads", "0", "charnums"]);
    assert_eq!(zero.status.code(), Some(3));
}
