use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn difflab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_difflab")).args(args).env_remove("DIFFLAB_OUT").output().expect("binary runs")
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn varadhan_default_run_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("v");
    let o = difflab(&["varadhan", "--out", path(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&out);
    assert_eq!(r["pass"], true);
    let errors: Vec<f64> = r["results"]["sup_errors"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    assert!(errors[0] <= 0.05, "{errors:?}");
    assert!(out.join("varadhan.csv").exists());
}

#[test]
fn negative_spacing_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.json");
    fs::write(&cfg, r#"{"numerics": {"h": -0.1}}"#).unwrap();
    let o = difflab(&["solve", "--config", path(&cfg), "--out", path(&tmp.path().join("o"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("numerics.h"));
    let o = difflab(&["solve", "--h", "-0.1", "--out", path(&tmp.path().join("o"))]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unknown_fields_and_wrong_experiment_are_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("c.json");
    fs::write(&cfg, r#"{"numerics": {"hh": 0.1}}"#).unwrap();
    assert_eq!(difflab(&["solve", "--config", path(&cfg)]).status.code(), Some(2));
    fs::write(&cfg, r#"{"experiment": "barrier"}"#).unwrap();
    assert_eq!(difflab(&["solve", "--config", path(&cfg)]).status.code(), Some(2));
}

#[test]
fn ellipse_curvature_is_a_finding_not_a_failure() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("ellipse.json");
    fs::write(
        &cfg,
        r#"{"domain": {"kind": "interior", "primitives": [{"type": "ellipse", "center": [0, 0], "radii": [2, 1]}]},
            "symmetry": {"mode": "curvature", "offset": 0.25}}"#,
    )
    .unwrap();
    let out = tmp.path().join("s");
    let o = difflab(&["symmetry", "--config", path(&cfg), "--out", path(&out)]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(report(&out)["results"]["sphere_consistent"], false);

    let mut v: Value = serde_json::from_str(&fs::read_to_string(&cfg).unwrap()).unwrap();
    v["symmetry"]["expect"] = Value::Bool(true);
    fs::write(&cfg, v.to_string()).unwrap();
    assert_eq!(difflab(&["symmetry", "--config", path(&cfg), "--out", path(&out)]).status.code(), Some(1));
}

#[test]
fn empty_suite_name_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = difflab(&["acceptance", "--suite", "", "--out", path(tmp.path())]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(difflab(&["acceptance", "nonsense", "--out", path(tmp.path())]).status.code(), Some(2));
}

#[test]
fn reports_are_deterministic_and_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b, c) = (tmp.path().join("a"), tmp.path().join("b"), tmp.path().join("c"));
    let args = ["symmetry", "--mode", "stationary", "--seed", "7", "--threads", "3"];
    for dir in [&a, &b] {
        let mut v = args.to_vec();
        v.extend(["--out", path(dir)]);
        assert_eq!(difflab(&v).status.code(), Some(0));
    }
    let ra = fs::read(a.join("report.json")).unwrap();
    assert_eq!(ra, fs::read(b.join("report.json")).unwrap());
    let from_report = a.join("report.json");
    assert_eq!(difflab(&["symmetry", "--config", path(&from_report), "--out", path(&c)]).status.code(), Some(0));
    assert_eq!(ra, fs::read(c.join("report.json")).unwrap());
    assert_eq!(report(&a)["seed"], 7);
}

#[test]
fn seed_changes_the_sampled_surface() {
    let tmp = tempfile::tempdir().unwrap();
    let spread = |seed: &str| {
        let out = tmp.path().join(seed);
        difflab(&["symmetry", "--mode", "stationary", "--seed", seed, "--out", path(&out)]);
        report(&out)["results"]["report"]["max_rel_spread"].as_f64().unwrap()
    };
    assert_ne!(spread("1"), spread("2"));
}

#[test]
fn barrier_writes_profile_and_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("b");
    assert_eq!(difflab(&["barrier", "--out", path(&out)]).status.code(), Some(0));
    let mut rdr = csv::Reader::from_path(out.join("barrier.csv")).unwrap();
    assert_eq!(rdr.headers().unwrap(), vec!["xi", "h", "H"]);
    assert!(rdr.records().count() > 10);
    let r = report(&out);
    assert_eq!(r["results"]["envelope_pass"], true);
    assert!(r["results"]["delta"].as_f64().unwrap() > 0.0);
}

#[test]
fn out_directory_can_come_from_the_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_difflab"))
        .arg("barrier")
        .env("DIFFLAB_OUT", tmp.path().join("env"))
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(tmp.path().join("env/report.json").exists());
}
