use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use locmf::synth::{ModelSpec, Realization};
use serde_json::Value;

fn locmf(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_locmf")).current_dir(dir).args(args).output().expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = locmf(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

fn rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path).unwrap().lines().skip(1).map(|l| l.split(',').map(String::from).collect()).collect()
}

const BINOMIAL: &str = r#"{"kind":"binomial","params":{"p":0.4},"J":14}"#;
const MBM: &str = r#"{"kind":"mbm","params":{"h":{"sine":{"mean":0.5,"amplitude":0.2,"frequency":1,"phase":0}}},"J":14,"seed":3}"#;
const MARKOV: &str = r#"{"kind":"markov_jump","params":{"gamma":{"linear":{"intercept":0.5,"slope":0.25,"max":0.9}}},"N":4096,"T":3,"seed":5}"#;

#[test]
fn binomial_matches_its_oracle() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bin.json"), BINOMIAL).unwrap();
    let stdout = ok(dir.path(), &["check-oracle", "--input", "bin.json", "--p-grid", "-5:5:1", "--tol", "1e-6", "--out", "o"]);
    assert!(stdout.contains("PASS"), "{stdout}");
    let r = report(&dir.path().join("o"));
    assert!(r["oracle"]["max_tau_deviation"].as_f64().unwrap() <= 1e-6);
    assert_eq!(r["family"], "plain-measure");
    assert_eq!(r["p_grid"].as_array().unwrap().len(), 11);
    // Global rows leave x blank.
    let tau = rows(&dir.path().join("o/tau.csv"));
    assert_eq!(tau.len(), 11);
    assert!(tau.iter().all(|r| r[0].is_empty() && r[1] == "0" && r[2] == "1"));
}

#[test]
fn tight_tolerance_fails_with_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("mbm.json"), MBM).unwrap();
    let out = locmf(dir.path(), &["check-oracle", "--input", "mbm.json", "--p-grid", "1:3:1", "--tol", "1e-9", "--out", "o"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn nonpositive_p_leader_order_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("mbm.json"), MBM).unwrap();
    let out = locmf(dir.path(), &["analyze", "--input", "mbm.json", "--family", "p-leaders:0"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.lines().count(), 1, "{err}");
    assert!(err.starts_with("error: validation"), "{err}");
}

#[test]
fn error_paths_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bin.json"), BINOMIAL).unwrap();
    let code = |args: &[&str]| locmf(dir.path(), args).status.code();
    assert_eq!(code(&["analyze"]), Some(2));
    assert_eq!(code(&["local", "--input", "bin.json", "--x-grid", "0.5"]), Some(2));
    assert_eq!(code(&["analyze", "--input", "missing.txt"]), Some(3));
    assert_eq!(code(&["analyze", "--input", "bin.json", "--windows", "0.6,0.2"]), Some(2));
    assert_eq!(code(&["frobnicate"]), Some(2));
}

#[test]
fn local_mbm_writes_a_holder_table() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("mbm.json"), MBM).unwrap();
    ok(
        dir.path(),
        &["local", "--input", "mbm.json", "--x-grid", "0.25,0.5,0.75", "--radii", "0.125,0.0625", "--p-grid", "-2:4:0.5",
          "--h-grid", "0:0.95:0.05", "--out", "o", "--deterministic"],
    );
    let o = dir.path().join("o");
    let holder = rows(&o.join("holder.csv"));
    assert_eq!(holder.len(), 3);
    for r in &holder {
        let x: f64 = r[0].parse().unwrap();
        let (h_hat, h): (f64, f64) = (r[1].parse().unwrap(), r[2].parse().unwrap());
        let truth = 0.5 + 0.2 * (2.0 * std::f64::consts::PI * x).sin();
        assert!((h - truth).abs() < 1e-9);
        assert!((h_hat - h).abs() < 0.2, "x={x}: {h_hat} vs {h}");
    }
    let spectrum = rows(&o.join("spectrum.csv"));
    assert_eq!(spectrum.len(), 60);
    assert!(spectrum.iter().all(|r| !r[0].is_empty()));
    let r = report(&o);
    assert_eq!(r["local"].as_array().unwrap().len(), 3);
    assert!(r.get("timestamp").is_none());
}

#[test]
fn deterministic_reruns_are_identical() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bin.json"), BINOMIAL).unwrap();
    let args = |out: &'static str| ["analyze", "--input", "bin.json", "--windows", "0,1;0,0.5", "--out", out, "--deterministic"];
    ok(dir.path(), &args("a"));
    ok(dir.path(), &args("b"));
    for f in ["report.json", "tau.csv", "spectrum.csv", "oracle_tau.csv", "oracle_spectrum.csv"] {
        assert_eq!(fs::read(dir.path().join("a").join(f)).unwrap(), fs::read(dir.path().join("b").join(f)).unwrap(), "{f}");
    }
    let r = report(&dir.path().join("a"));
    assert_eq!(r["windows"].as_array().unwrap().len(), 2);
    assert_eq!(r["window"], r["windows"][0]["window"]);
}

#[test]
fn report_rebuilds_the_tables() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bin.json"), BINOMIAL).unwrap();
    ok(dir.path(), &["analyze", "--input", "bin.json", "--out", "a", "--deterministic"]);
    ok(dir.path(), &["report", "--input", "a/report.json", "--out", "b"]);
    for f in ["tau.csv", "spectrum.csv", "oracle_tau.csv", "oracle_spectrum.csv"] {
        assert_eq!(fs::read(dir.path().join("a").join(f)).unwrap(), fs::read(dir.path().join("b").join(f)).unwrap(), "{f}");
    }
}

#[test]
fn markov_jumps_match_the_simulator() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("mk.json"), MARKOV).unwrap();
    let stdout = ok(dir.path(), &["analyze", "--input", "mk.json", "--p-grid", "0:2:1", "--out", "o", "--deterministic"]);
    assert!(stdout.contains("drift bound"), "{stdout}");
    let Realization::Jumps(path) = ModelSpec::from_json(MARKOV).unwrap().generate().unwrap() else { panic!("not a path") };
    let written = locmf::io::read_jumps(&dir.path().join("o/jumps.csv")).unwrap();
    assert_eq!(written, path.jumps);
    assert_eq!(report(&dir.path().join("o"))["family"], "oscillation:1");
}

#[test]
fn synth_output_analyzes_like_the_spec() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bin.json"), BINOMIAL).unwrap();
    ok(dir.path(), &["synth", "--config", "bin.json", "--out", "s"]);
    ok(dir.path(), &["analyze", "--input", "s/measure.txt", "--out", "a", "--deterministic"]);
    ok(dir.path(), &["analyze", "--input", "bin.json", "--out", "b", "--deterministic"]);
    let (a, b) = (report(&dir.path().join("a")), report(&dir.path().join("b")));
    let tau = |r: &Value| r["tau"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect::<Vec<_>>();
    for (x, y) in tau(&a).iter().zip(tau(&b)) {
        assert!((x - y).abs() < 1e-9, "{x} vs {y}");
    }
}
