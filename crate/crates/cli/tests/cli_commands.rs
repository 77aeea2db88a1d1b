use std::process::{Command, Output};

use serde_json::Value;

fn tfv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tfv")).args(args).env("TFV_THREADS", "2").output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn checks(v: &Value) -> &Vec<Value> {
    v["checks"].as_array().unwrap()
}

#[test]
fn suite_exits_zero_and_is_byte_stable() {
    let a = tfv(&["suite"]);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    let stderr = String::from_utf8_lossy(&a.stderr);
    assert_eq!(stderr.lines().filter(|l| l.contains(": PASS ")).count(), 10);
    let b = tfv(&["suite"]);
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    assert!(checks(&v).iter().all(|c| c["as_expected"] == true));
    for c in checks(&v) {
        for key in ["id", "pass", "max_residual", "tolerance", "witnesses"] {
            assert!(c.get(key).is_some(), "{key}");
        }
    }
}

#[test]
fn tolerance_stress_exits_one() {
    let out = tfv(&["suite", "--tol", "1e-15"]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert!(!v["summary"]["unexpected"].as_array().unwrap().is_empty());
}

#[test]
fn configuration_errors_exit_two() {
    for args in [
        &["classify", "--field", "nosuch"][..],
        &["classify"],
        &["curvature", "--space", "klein"],
        &["theorem", "--space", "twisted", "--check", "curvature-identity"],
        &["theorem", "--field", "hyp_torqued", "--check", "anti-obstruction"],
        &["flow", "--start", "1,2"],
        &["classify", "--field", "uhs_en", "--n", "12"],
        &["bogus"],
    ] {
        assert_eq!(tfv(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn negative_controls_are_expected() {
    let rot = tfv(&["classify", "--field", "rot2d"]);
    assert_eq!(rot.status.code(), Some(0));
    let v = json(&rot);
    let c = &checks(&v)[0];
    assert_eq!(c["expected_negative"], true);
    assert_eq!(c["details"]["verdict"], "not_torse_forming");
    assert!(c["max_residual"].as_f64().unwrap() > 0.1);

    let eu = tfv(&["theorem", "--space", "euclidean", "--check", "curvature-identity"]);
    assert_eq!(eu.status.code(), Some(0));
    let v = json(&eu);
    let c = &checks(&v)[0];
    assert_eq!((c["pass"].as_bool(), c["expectation"].as_str()), (Some(false), Some("fail")));
    assert_eq!(c["expected_negative"], true);
}

#[test]
fn classify_reports_catalog_verdicts() {
    let out = tfv(&["classify", "--field", "sphere_torse", "--samples", "50"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let ids: Vec<&str> = checks(&v).iter().map(|c| c["id"].as_str().unwrap()).collect();
    assert!(ids.iter().any(|i| i.contains("sphere-south")) && ids.iter().any(|i| i.contains("sphere-north")), "{ids:?}");
    let out = tfv(&["classify", "--field", "hyp_torqued", "--n", "4", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn theorem_default_runs_every_applicable_check() {
    let out = tfv(&["theorem", "--space", "hyperboloid"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let ids: Vec<&str> = checks(&v).iter().map(|c| c["id"].as_str().unwrap()).collect();
    assert!(ids.iter().any(|i| i.starts_with("curvature-identity")));
    assert!(ids.iter().any(|i| i.starts_with("torqued-closedness")));
    assert!(v["notes"][0].as_str().unwrap().contains("global non-existence"));
}

#[test]
fn flow_writes_report_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("flow.json");
    let run = tfv(&["flow", "--space", "hyperboloid", "--field", "f_torqued", "--t-max", "0.5", "--out", out.to_str().unwrap()]);
    assert_eq!(run.status.code(), Some(0));
    assert!(run.stdout.is_empty());
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(checks(&report)[0]["max_residual"].as_f64().unwrap() < 1e-6);
    let csv = std::fs::read_to_string(dir.path().join("flow.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,x1,x2,x3,f"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 501);
    let f0 = rows[0][4];
    for r in &rows {
        assert!((r[4] - f0 - r[0]).abs() < 1e-6);
    }
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    std::fs::write(&conf, "field = uhs_en\nsamples = 20\nseed = 5\n").unwrap();
    let out = tfv(&["classify", "--config", conf.to_str().unwrap(), "--seed", "9"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["config"]["seed"], 9);
    assert_eq!(v["config"]["samples"], 20);
    assert_eq!(v["config"]["field"], "uhs_en");
}
