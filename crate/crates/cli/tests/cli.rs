use std::process::{Command, Output};

use serde_json::Value;

fn bosonkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bosonkit"))
        .args(args)
        .env_remove("BOSONKIT_SIZE_CAP")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = bosonkit(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn json(args: &[&str]) -> Value {
    serde_json::from_str(&ok(args)).unwrap()
}

fn outcome(dist: &Value, pattern: &[u64]) -> f64 {
    dist["outcomes"]
        .as_array()
        .unwrap()
        .iter()
        .find(|o| o["pattern"] == serde_json::json!(pattern))
        .map_or(0.0, |o| o["p"].as_f64().unwrap())
}

/// Rows of `identifier,K_or_r,coefficient`.
fn correction_rows(csv: &str) -> Vec<(String, f64, f64)> {
    let mut r = csv::Reader::from_reader(csv.as_bytes());
    r.records()
        .map(|rec| {
            let rec = rec.unwrap();
            (rec[0].to_string(), rec[1].parse().unwrap(), rec[2].parse().unwrap())
        })
        .collect()
}

fn column(rows: &[(String, f64, f64)], id: &str) -> Vec<(f64, f64)> {
    rows.iter().filter(|r| r.0 == id).map(|r| (r.1, r.2)).collect()
}

#[test]
fn unitary_generation_and_validation() {
    let dir = tempfile::tempdir().unwrap();
    let dft = dir.path().join("dft.json");
    ok(&["unitary", "--dft", "6", "--out", dft.to_str().unwrap()]);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&dft).unwrap()).unwrap();
    assert_eq!(v["dim"], 6);
    assert!(ok(&["unitary", "--validate", dft.to_str().unwrap()]).starts_with("residual"));

    let a = ok(&["unitary", "--haar", "6", "--seed", "42"]);
    let b = ok(&["unitary", "--haar", "6", "--seed", "42"]);
    assert_eq!(a, b);
    assert_ne!(a, ok(&["unitary", "--haar", "6", "--seed", "43"]));

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"dim":2,"entries":[[[1,0],[1,0]],[[0,0],[1,0]]]}"#).unwrap();
    let out = bosonkit(&["unitary", "--validate", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stdout).contains("residual 1"));
}

#[test]
fn distributions() {
    let d = json(&["dist", "--unitary", "bs", "--input", "1,1"]);
    assert!(outcome(&d, &[1, 1]).abs() < 1e-12);
    assert!((outcome(&d, &[2, 0]) - 0.5).abs() < 1e-12);

    let d = json(&["dist", "--unitary", "bs", "--input", "1,1", "--detector", "array", "--K", "2"]);
    assert!(outcome(&d, &[1, 1]).abs() < 1e-12);
    for k in [[1, 0], [0, 1], [2, 0], [0, 2]] {
        assert!((outcome(&d, &k) - 0.25).abs() < 1e-12);
    }

    let d = json(&["dist", "--unitary", "identity:3", "--input", "2,0,1"]);
    assert_eq!(outcome(&d, &[2, 0, 1]), 1.0);
    assert_eq!(d["outcomes"].as_array().unwrap().iter().filter(|o| o["p"] != 0.0).count(), 1);

    let out = bosonkit(&["dist", "--unitary", "bs", "--input", "1,1"]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("normalization residual"));
}

#[test]
fn distribution_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("a.json");
    let second = dir.path().join("b.json");
    ok(&[
        "dist", "--unitary", "haar:4,9", "--input", "1,1,1,0", "--detector", "deadtime-mono", "--ratio", "0.3",
        "--out", first.to_str().unwrap(),
    ]);
    ok(&["dist", "--from", first.to_str().unwrap(), "--out", second.to_str().unwrap()]);
    assert_eq!(std::fs::read(&first).unwrap(), std::fs::read(&second).unwrap());
    let csv = ok(&["dist", "--from", first.to_str().unwrap(), "--format", "csv"]);
    assert!(csv.starts_with("pattern,p\n"));
}

#[test]
fn array_correction_sweep() {
    let rows = correction_rows(&ok(&[
        "correction", "--detector", "array", "--eta", "1", "--n", "6", "--sweep", "2:10",
    ]));
    for (k, c) in column(&rows, "{}") {
        assert_eq!(c, 1.0, "K = {k}");
    }
    let c2 = column(&rows, "{2}");
    assert_eq!(c2.len(), 9);
    assert!(c2.windows(2).all(|w| w[1].1 > w[0].1));
    assert!((c2[0].1 - 0.5).abs() < 1e-12);
    let names: Vec<&str> = rows.iter().filter(|r| r.1 == 10.0).map(|r| r.0.as_str()).collect();
    assert_eq!(names, ["{}", "{2}", "{3}", "{2,2}", "{4}", "{3,2}", "{5}", "{2,2,2}", "{4,2}", "{3,3}", "{6}"]);
}

#[test]
fn dead_time_correction_sweeps() {
    let mono = correction_rows(&ok(&[
        "correction", "--detector", "deadtime-mono", "--n", "2", "--sweep", "0:1:21",
    ]));
    for (r, c) in column(&mono, "{2}") {
        assert!((c - (1.0 - r) * (1.0 - r)).abs() < 1e-11, "r = {r}: {c}");
    }
    let exp = correction_rows(&ok(&[
        "correction", "--detector", "deadtime-exp", "--gamma", "10", "--n", "2", "--sweep", "0.05:0.95:19",
    ]));
    for (r, c) in column(&exp, "{2}") {
        assert!(c < (1.0 - r) * (1.0 - r), "r = {r}");
    }
}

#[test]
fn sampling() {
    let args = [
        "sample", "--unitary", "haar:5,1", "--input", "1,1,1,0,0", "--detector", "lossy", "--eta", "0.8",
        "--trials", "100000", "--seed", "3", "--postselect",
    ];
    let a = ok(&args);
    assert_eq!(a, ok(&args));
    let report: Value = serde_json::from_str(&a).unwrap();
    let ps = &report["postselection"];
    let acceptance = ps["acceptance"].as_f64().unwrap();
    let sd = (0.512f64 * 0.488 / 100_000.0).sqrt();
    assert!((acceptance - 0.512).abs() <= 4.0 * sd, "{acceptance}");
    assert_eq!(report["generator"], "chacha20");
    assert_eq!(report["trials"], ps["accepted"]);

    let full: Value = serde_json::from_str(&ok(&args[..args.len() - 1])).unwrap();
    assert!(full["postselection"].is_null());
    assert_eq!(full["trials"], 100_000);

    let csv = ok(&["sample", "--unitary", "bs", "--input", "1,1", "--trials", "1000", "--format", "csv"]);
    assert!(csv.starts_with("pattern,count,expected\n"));
    assert!(csv.contains("\"1,1\",0,"));

    let sim: Value = serde_json::from_str(&ok(&[
        "sample", "--unitary", "bs", "--input", "1,1", "--detector", "array", "--K", "2", "--trials", "40000",
        "--simulate-detectors", "--postselect",
    ]))
    .unwrap();
    let acc = sim["postselection"]["acceptance"].as_f64().unwrap();
    assert!((acc - 0.5).abs() <= 4.0 * (0.25f64 / 40_000.0).sqrt());
}

#[test]
fn conditional_probability_tables() {
    let csv = ok(&["pkm", "--detector", "array", "--K", "4", "--max-m", "3"]);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("k,m,p"));
    assert!(csv.contains("\n2,2,0.75\n"));
    let table = json(&["pkm", "--detector", "deadtime-mono", "--ratio", "0.25", "--max-m", "3", "--format", "json"]);
    assert_eq!(table["values"][2][2], 0.5625);
    assert_eq!(table["model"]["kind"], "deadtime-mono");
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(
        &cfg,
        r#"{"unitary": "bs", "input": [1, 1], "detector": {"kind": "array", "K": 2, "eta": 1.0}}"#,
    )
    .unwrap();
    let from_config = json(&["dist", "--config", cfg.to_str().unwrap()]);
    assert!((outcome(&from_config, &[1, 0]) - 0.25).abs() < 1e-12);
    let overridden = json(&["dist", "--config", cfg.to_str().unwrap(), "--detector", "ideal"]);
    assert_eq!(outcome(&overridden, &[1, 0]), 0.0);
    assert!((outcome(&overridden, &[2, 0]) - 0.5).abs() < 1e-12);
}

#[test]
fn exit_codes() {
    assert_eq!(bosonkit(&["bogus"]).status.code(), Some(1));
    assert_eq!(bosonkit(&["dist", "--unitary", "bs"]).status.code(), Some(1));
    assert_eq!(bosonkit(&["--help"]).status.code(), Some(0));
    assert_eq!(
        bosonkit(&["dist", "--unitary", "bs", "--input", "1,1", "--detector", "lossy", "--eta", "1.5"]).status.code(),
        Some(2)
    );
    assert_eq!(bosonkit(&["dist", "--unitary", "bs", "--input", "1,1,0"]).status.code(), Some(2));
    assert_eq!(
        bosonkit(&[
            "pkm", "--detector", "deadtime-exp", "--ratio", "0.2", "--gamma", "10", "--max-m", "4", "--quad-nodes",
            "3", "--quad-tol", "1e-12",
        ])
        .status
        .code(),
        Some(3)
    );
}

#[test]
fn size_cap_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_bosonkit"))
        .args(["dist", "--unitary", "dft:3", "--input", "1,1,1"])
        .env("BOSONKIT_SIZE_CAP", "2")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("cap of 2"), "{err}");
    assert!(err.contains("BOSONKIT_SIZE_CAP"));
}
