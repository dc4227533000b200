use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_lagrangian-lab");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn schema() -> jsonschema::Validator {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("report.schema.json");
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::validator_for(&schema).expect("schema compiles")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("stdout is not JSON ({e}); stderr: {}", String::from_utf8_lossy(&out.stderr))
    })
}

fn assert_valid(v: &Value) {
    let errors: Vec<String> = schema().iter_errors(v).map(|e| format!("{} at {}", e, e.instance_path())).collect();
    assert!(errors.is_empty(), "{errors:#?}");
}

#[test]
fn every_subcommand_emits_schema_valid_json() {
    let runs: &[&[&str]] = &[
        &["gallery-verify", "--name", "lawlor2", "--a", "1"],
        &["gallery-verify", "--name", "hl-smoothing"],
        &["classify", "--poly", "x*y - 1"],
        &["classify", "--poly", "x^3 + y^3 - 1"],
        &["curvature", "--poly", "x^2 - y"],
        &["curvature", "--name", "sl-z2"],
        &["density", "--name", "lawlor2"],
        &["flow-check", "--name", "grim-reaper"],
        &["asymptotics", "--name", "lawlor2"],
    ];
    for args in runs {
        let out = run(args);
        assert_eq!(code(&out), 0, "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        let v = report(&out);
        assert_valid(&v);
        assert_eq!(v["command"], args[0]);
        assert_eq!(v["pass"], true);
    }
}

#[test]
fn classify_reports_lawlor_type_and_8pi() {
    let v = report(&run(&["classify", "--poly", "x*y - 1"]));
    assert_eq!(v["data"]["classification"]["kind"], "LawlorType");
    assert_eq!(v["data"]["blow_down"]["distinct"], 2);
    let measured = v["data"]["total_curvature"]["measured"].as_f64().unwrap();
    assert!((measured / (8.0 * std::f64::consts::PI) - 1.0).abs() < 0.02);
}

#[test]
fn parabola_curvature_is_4pi() {
    let v = report(&run(&["curvature", "--poly", "x^2 - y"]));
    let m = v["reports"][0]["measured"][0].as_f64().unwrap();
    assert!((m / (4.0 * std::f64::consts::PI) - 1.0).abs() < 0.02, "{m}");
}

fn without_runtime(v: &mut Value) {
    match v {
        Value::Object(m) => {
            m.remove("runtime_ms");
            m.values_mut().for_each(without_runtime);
        }
        Value::Array(a) => a.iter_mut().for_each(without_runtime),
        _ => {}
    }
}

#[test]
fn identical_runs_agree_apart_from_runtime() {
    let args = ["classify", "--poly", "x^2 + 3*x*y - y + 2", "--seed", "4"];
    let (a, b) = (run(&args), run(&args));
    let lines = |o: &Output| -> Vec<String> {
        String::from_utf8_lossy(&o.stdout)
            .lines()
            .filter(|l| !l.contains("\"runtime_ms\""))
            .map(String::from)
            .collect()
    };
    assert_eq!(lines(&a), lines(&b));
    let (mut va, mut vb) = (report(&a), report(&b));
    without_runtime(&mut va);
    without_runtime(&mut vb);
    assert_eq!(va, vb);
}

#[test]
fn exit_codes() {
    assert_eq!(code(&run(&["bogus"])), 2);
    assert_eq!(code(&run(&["classify", "--poly", "x", "--zz"])), 2);
    assert_eq!(code(&run(&["classify", "--poly", "x +* y"])), 2);
    assert_eq!(code(&run(&["gallery-verify", "--name", "lawlor2", "--phi1", "1"])), 2);
    assert_eq!(code(&run(&["gallery-verify", "--name", "nowhere"])), 2);
    assert_eq!(code(&run(&["classify", "--poly", "x", "--grid", "2"])), 2);
    assert_eq!(code(&run(&["--help"])), 0);

    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "").unwrap();
    let target = blocker.join("sub");
    let out = run(&["classify", "--poly", "x*y - 1", "--out", target.to_str().unwrap()]);
    assert_eq!(code(&out), 3);
    let missing = dir.path().join("absent.conf");
    assert_eq!(code(&run(&["classify", "--poly", "x", "--config", missing.to_str().unwrap()])), 3);

    // an unattainable tolerance turns a passing check into a failure
    let out = run(&["curvature", "--poly", "x^2 - y", "--tol", "1e-20"]);
    assert_eq!(code(&out), 1);
    assert_eq!(report(&out)["pass"], false);
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    std::fs::write(&conf, "# defaults for this run\ngrid = 32\nseed = 4\ntol = 0.05\n").unwrap();
    let c = conf.to_str().unwrap();
    let v = report(&run(&["classify", "--poly", "x*y - 1", "--config", c, "--seed", "9"]));
    assert_eq!(v["settings"]["grid"], 32);
    assert_eq!(v["settings"]["seed"], 9);
    assert_eq!(v["settings"]["tol"], 0.05);
    let v = report(&run(&["classify", "--poly", "x*y - 1"]));
    assert_eq!(v["settings"]["grid"], 48);
    assert_eq!(v["settings"]["tol"], Value::Null);
}

#[test]
fn out_directory_receives_report_and_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("run");
    let o = out_dir.to_str().unwrap();
    let out = run(&["density", "--name", "lawlor2", "--out", o]);
    assert_eq!(code(&out), 0);
    assert!(out.stdout.is_empty());
    let json: Value = serde_json::from_str(&std::fs::read_to_string(out_dir.join("density.json")).unwrap()).unwrap();
    assert_valid(&json);
    let table = std::fs::read_to_string(out_dir.join("theta.csv")).unwrap();
    assert_eq!(table.lines().next(), Some("l,theta,tail_bound,quad_error"));
    assert_eq!(table.lines().count(), 5);

    let out = run(&["curvature", "--poly", "x^2 - y", "--format", "csv", "--out", o]);
    assert_eq!(code(&out), 0);
    let csv = std::fs::read_to_string(out_dir.join("curvature.csv")).unwrap();
    assert!(csv.starts_with("check,pass,measured,expected,tolerance,norm,provenance"));
}
