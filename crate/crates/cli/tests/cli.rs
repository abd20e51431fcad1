use std::process::{Command, Output};

use serde_json::Value;

const EUCLID2: &str = r#"{"dim": 2, "kind": "builtin", "name": "euclidean"}"#;
const FUNK2: &str = r#"{"dim": 2, "kind": "builtin", "name": "funk"}"#;
const FUNK3: &str = r#"{"dim": 3, "kind": "builtin", "name": "funk"}"#;
const KLEIN2: &str = r#"{"dim": 2, "kind": "builtin", "name": "klein"}"#;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_finsler")).args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}\n{}", String::from_utf8_lossy(&out.stdout), String::from_utf8_lossy(&out.stderr))
    })
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn analyze_euclidean() {
    let out = run(&["analyze", "--metric", EUCLID2, "--x", "0,0", "--y", "3,4"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v = json(&out);
    assert!((v["det_g"].as_f64().unwrap() - 1.0).abs() <= 1e-15);
    assert_eq!(v["F"], 5.0);
    assert_eq!(v["chi"], serde_json::json!([0.0, 0.0]));
    assert_eq!(v["lambda"], 0.0);
    assert!(v["bordered"]["rund_residual"].as_f64().unwrap() <= 1e-15);
}

#[test]
fn analyze_funk() {
    let out = run(&["analyze", "--metric", FUNK2, "--x", "0.2,-0.1", "--y", "1,0.3", "--aux", EUCLID2]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v = json(&out);
    assert!((v["f"].as_f64().unwrap() - 1.5).abs() <= 1e-7);
    assert!((v["lambda"].as_f64().unwrap() - 1.5).abs() <= 1e-6);
    assert!(v["I0"].is_f64());
    for key in ["G", "N", "B", "E", "R2", "R3", "S", "E_alt", "chi_alt", "C", "I", "tau", "alpha", "P", "rapcsak"] {
        assert!(!v[key].is_null(), "missing {key}");
    }
}

#[test]
fn analyze_rejects_points_outside_the_ball() {
    let out = run(&["analyze", "--metric", FUNK2, "--x", "1.2,0", "--y", "1,0"]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.starts_with("error[2]: "), "{err}");
    assert!(err.contains("ball"), "{err}");
    assert_eq!(err.lines().count(), 1);
}

#[test]
fn analyze_reports_singular_metrics() {
    let spec = r#"{"dim": 2, "kind": "expression", "expression": "y1 + 0*y2"}"#;
    let out = run(&["analyze", "--metric", spec, "--x", "0,0", "--y", "1,1"]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
    assert!(stderr(&out).starts_with("error[3]: "));
}

#[test]
fn input_errors_exit_with_code_two() {
    let cases: Vec<Vec<&str>> = vec![
        vec!["analyze", "--x", "0,0", "--y", "1,0"],
        vec!["analyze", "--metric", "{not json", "--x", "0,0", "--y", "1,0"],
        vec!["analyze", "--metric", "/nonexistent/spec.json", "--x", "0,0", "--y", "1,0"],
        vec!["analyze", "--metric", EUCLID2, "--x", "0,0,0", "--y", "1,0"],
        vec!["analyze", "--metric", EUCLID2, "--x", "0,a", "--y", "1,0"],
        vec!["analyze", "--metric", EUCLID2, "--x", "0,0", "--y", "0,0"],
        vec!["analyze", "--metric", r#"{"dim": 2, "kind": "expression", "expression": "sqrt("}"#, "--x", "0,0", "--y", "1,0"],
        vec!["pair-check", "--metric", EUCLID2, "--aux", FUNK3],
        vec!["geodesic", "--metric", KLEIN2, "--x0", "0,0", "--y0", "1,0", "--t", "1", "--track", "I0"],
        vec!["geodesic", "--metric", KLEIN2, "--x0", "0,0", "--y0", "1,0", "--t", "1", "--track", "energy"],
    ];
    for args in cases {
        let out = run(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", stderr(&out));
        let err = stderr(&out);
        assert!(err.starts_with("error[2]: ") && err.lines().count() == 1, "{args:?}: {err}");
    }
}

#[test]
fn verify_exit_codes() {
    let out = run(&["verify", "--theorem", "1", "--metric", FUNK2, "--samples", "20", "--trajectories", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v = json(&out);
    assert_eq!(v["verdict"], "pass");
    assert_eq!(v["seed"], 42);

    let out = run(&["verify", "--theorem", "1", "--metric", EUCLID2, "--samples", "20"]);
    assert_eq!(out.status.code(), Some(4));
    assert_eq!(json(&out)["verdict"], "hypotheses_fail");

    let out = run(&["verify", "--theorem", "2", "--metric", FUNK3, "--samples", "20", "--trajectories", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(json(&out)["f_constant"], true);
}

#[test]
fn verify_fails_when_the_drift_tolerance_is_unreachable() {
    // χ on Funk sits near 1e-14 while λ drifts by about 1e-13, so this
    // tolerance admits the hypotheses but rejects the drift.
    let out = run(&[
        "verify", "--theorem", "1", "--metric", FUNK2, "--samples", "10", "--trajectories", "2", "--tol", "3e-14",
    ]);
    assert_eq!(out.status.code(), Some(1), "{}", stderr(&out));
    assert_eq!(json(&out)["verdict"], "fail");
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let args = ["verify", "--theorem", "1", "--metric", FUNK2, "--samples", "15", "--trajectories", "2", "--seed", "9"];
    let (a, b) = (run(&args), run(&args));
    assert_eq!(a.stdout, b.stdout);
    let args = ["analyze", "--metric", FUNK3, "--x", "0.1,0.2,-0.3", "--y", "1,-0.5,0.25"];
    assert_eq!(run(&args).stdout, run(&args).stdout);
    let other = run(&["verify", "--theorem", "1", "--metric", FUNK2, "--samples", "15", "--trajectories", "2", "--seed", "10"]);
    assert_ne!(a.stdout, other.stdout);
}

fn csv(path: &std::path::Path) -> (Vec<String>, Vec<Vec<f64>>, Vec<String>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let (mut rows, mut comments) = (Vec::new(), Vec::new());
    for line in lines {
        if line.starts_with('#') {
            comments.push(line.to_string());
        } else {
            rows.push(line.split(',').map(|v| v.parse().unwrap()).collect());
        }
    }
    (header, rows, comments)
}

#[test]
fn geodesic_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("line.csv");
    let out = run(&[
        "geodesic", "--metric", EUCLID2, "--x0", "0,1", "--y0", "2,-1", "--t", "3", "--out", path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let (header, rows, comments) = csv(&path);
    assert_eq!(header, ["t", "x1", "x2", "y1", "y2"]);
    assert!(comments.is_empty());
    assert_eq!(rows.last().unwrap()[0], 3.0);
    for r in &rows {
        assert!((r[1] - 2.0 * r[0]).abs() <= 1e-12 && (r[2] - (1.0 - r[0])).abs() <= 1e-12);
    }
    let raw = std::fs::read_to_string(&path).unwrap();
    let first_value = raw.lines().nth(1).unwrap().split(',').nth(1).unwrap();
    assert!(first_value.contains('e') && first_value.split('e').next().unwrap().len() == 18, "{first_value}");

    let path = dir.path().join("funk.csv");
    let out = run(&[
        "geodesic", "--metric", FUNK2, "--x0", "0.1,0", "--y0", "0.5,0.4", "--t", "1", "--track", "F,lambda",
        "--out", path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stderr(&out).lines().last().unwrap().contains("lambda"));
    let (header, rows, _) = csv(&path);
    assert_eq!(&header[5..], ["F", "lambda"]);
    for r in &rows {
        assert!((r[5] - rows[0][5]).abs() <= 1e-6 && (r[6] - 1.5).abs() <= 1e-6);
    }

    let out = run(&[
        "geodesic", "--metric", KLEIN2, "--x0", "0.2,0", "--y0", "1,0.3", "--t", "1", "--track", "I0", "--aux", EUCLID2,
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = String::from_utf8(out.stdout).unwrap();
    let i0: Vec<f64> = text.lines().skip(1).map(|l| l.rsplit(',').next().unwrap().parse().unwrap()).collect();
    assert!(i0.iter().all(|v| (v - i0[0]).abs() <= 1e-6));
}

#[test]
fn geodesic_domain_exit_is_annotated() {
    let out = run(&["geodesic", "--metric", FUNK2, "--x0", "0,0", "--y0", "-1,0", "--t", "100"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().last().unwrap().starts_with("# domain exit"));
}

#[test]
fn pair_check() {
    let out = run(&["pair-check", "--metric", KLEIN2, "--aux", EUCLID2]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v = json(&out);
    assert_eq!(v["projectively_related"], true);
    assert!(v["rapcsak_max"].as_f64().unwrap() <= 1e-7);
    assert!(v["P_trace_vs_log_max_gap"].as_f64().unwrap() <= 1e-6);

    let twice = r#"{"dim": 2, "kind": "expression", "expression": "2*sqrt(y1^2 + y2^2)"}"#;
    let v = json(&run(&["pair-check", "--metric", EUCLID2, "--aux", twice]));
    assert_eq!(v["projectively_related"], true);

    let bumped = r#"{"dim": 2, "kind": "builtin", "name": "riemannian",
        "params": {"a": [["exp(0.8*x1^2 + 0.5*x2)", "0"], ["0", "exp(0.8*x1^2 + 0.5*x2)"]]}}"#;
    let v = json(&run(&["pair-check", "--metric", FUNK2, "--aux", bumped]));
    assert_eq!(v["projectively_related"], false);
    assert!(v["rapcsak_max"].as_f64().unwrap() > 1e-2);
}

#[test]
fn volume_flag_changes_tau_only() {
    let base = ["analyze", "--metric", FUNK2, "--x", "0.2,0.1", "--y", "1,0.3"];
    let a = json(&run(&base));
    let mut tilted = base.to_vec();
    tilted.extend(["--volume", "exp(x1)"]);
    let b = json(&run(&tilted));
    assert!((a["tau"].as_f64().unwrap() - b["tau"].as_f64().unwrap()).abs() > 1e-3);
    for i in 0..2 {
        let (u, v) = (a["chi"][i].as_f64().unwrap(), b["chi"][i].as_f64().unwrap());
        assert!((u - v).abs() <= 1e-7);
    }
}
