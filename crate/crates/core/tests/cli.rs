use std::path::Path;
use std::process::{Command, Output};

use qhlab::corpus;
use serde_json::Value;

fn qhlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qhlab"))
        .args(args)
        .env("QHLAB_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn unknown_command_exits_two_without_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = qhlab(&["plot", "--corpus", "disk", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn invalid_configurations_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let out = out.to_str().unwrap();
    for args in [
        vec!["gh", "--corpus", "disk", "--h", "0.02", "--h", "0.04", "--out", out],
        vec!["gh", "--corpus", "disk", "--eps", "0.9", "--out", out],
        vec!["gh", "--corpus", "nowhere", "--out", out],
        vec!["gh", "--corpus", "disk", "--param", "radius", "--out", out],
        vec!["gh", "--out", out],
    ] {
        let o = qhlab(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
    }
    assert!(!Path::new(out).exists());
}

#[test]
fn dist_reports_the_vertical_ray_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let o = qhlab(&[
        "dist",
        "--corpus",
        "half-plane-box",
        "--h",
        "0.04",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let doc = read_json(&dir.path().join("dist.json"));
    let k = doc["metrics"]["half-plane-box h=0.04"]["k"].as_f64().unwrap();
    assert!((k - 1.0).abs() < 0.06, "k = {k}");
    assert_eq!(doc["config"]["seed"], 42);
    assert!(doc["version"].as_str().unwrap().starts_with("qhlab "));
    assert!(dir.path().join("dist-distances.csv").exists());
}

#[test]
fn probe_theorem_on_the_comb_has_monotone_columns() {
    let dir = tempfile::tempdir().unwrap();
    let o = qhlab(&[
        "probe-theorem",
        "--corpus",
        "comb",
        "--param",
        "n=2,4,8",
        "--h",
        "0.04",
        "--pairs",
        "40",
        "--triples",
        "10",
        "--samples",
        "40",
        "--landmarks",
        "8",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("probe-theorem-probe.csv")).unwrap();
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 3);
    for col in ["fixed_delta_thin", "fixed_C_gh", "fixed_C_bs"] {
        let i = header.iter().position(|h| *h == col).unwrap();
        let v: Vec<f64> = rows.iter().map(|r| r[i].parse().unwrap()).collect();
        assert!(v.windows(2).all(|w| w[1] > w[0]), "{col}: {v:?}");
    }
}

#[test]
fn domain_files_and_svg_overlays() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("square.json");
    std::fs::write(&file, corpus("square", &Default::default()).unwrap().to_json()).unwrap();
    let out = dir.path().join("out");
    let o = qhlab(&[
        "gh",
        "--domain",
        file.to_str().unwrap(),
        "--h",
        "0.05",
        "--pairs",
        "20",
        "--svg",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let svg = std::fs::read_to_string(out.join("gh-square_h_0.05.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("<polyline"));
    let doc = read_json(&out.join("gh.json"));
    assert!(doc["checks"].as_array().unwrap().iter().all(|c| c["passed"] == true));
    assert!(doc["violations"].as_array().unwrap().is_empty());
}

#[test]
fn explicit_endpoints_follow_the_disk_radius_formula() {
    let dir = tempfile::tempdir().unwrap();
    let o = qhlab(&[
        "dist",
        "--corpus",
        "disk",
        "--h",
        "0.02",
        "--from",
        "0,0",
        "--to",
        "-0.5,0",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    // On the unit disk k(0, r) = ln(1/(1 - r)).
    let doc = read_json(&dir.path().join("dist.json"));
    let k = doc["metrics"]["disk h=0.02"]["k"].as_f64().unwrap();
    assert!((k - 2f64.ln()).abs() < 0.01, "k = {k}");
}
