use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use deficit_lab::cli::{MeasurementFile, StateFile};
use deficit_lab::measurement::eigenbasis_measurement;
use deficit_lab::scenarios::build_sw99_state;
use deficit_lab::state::{partial_trace, DensityMatrix, Subsystem};
use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_deficit-lab"));
    c.env_remove("DEFICIT_LAB_THREADS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("not JSON ({e}): {}", stdout(o)))
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn write_state(dir: &TempDir, name: &str, rho: &DensityMatrix) -> PathBuf {
    write(dir, name, &serde_json::to_string(&StateFile::from_density(rho)).unwrap())
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const BELL_PURE: &str = r#"{"dims": [2, 2], "pure": [[0.7071067811865476, 0], [0, 0], [0, 0], [0.7071067811865476, 0]]}"#;
const COMPUTATIONAL: &str = r#"{"kind": "basis", "vectors": [[[1, 0], [0, 0]], [[0, 0], [1, 0]]]}"#;

#[test]
fn version_prints_crate_version() {
    let o = run(&["version"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), format!("deficit-lab {}", env!("CARGO_PKG_VERSION")));
}

#[test]
fn bell_state_measures() {
    let dir = TempDir::new().unwrap();
    let state = write(&dir, "bell.json", BELL_PURE);
    let o = run(&["measures", "--state", s(&state), "--format", "json"]);
    assert!(o.status.success());
    let v = json(&o);
    assert!((v["mutual_information"].as_f64().unwrap() - 2.0).abs() < 1e-12);
    assert!((v["i_go"].as_f64().unwrap() - 2.0).abs() < 1e-12);
    assert!(v["i_lo"].as_f64().unwrap().abs() < 1e-12);

    let m = write(&dir, "comp.json", COMPUTATIONAL);
    let o = run(&["measures", "--state", s(&state), "--measurement", s(&m), "--format", "json"]);
    let v = json(&o);
    for key in ["c_hv", "delta_cl", "deficit_q"] {
        assert!((v["measurement"][key].as_f64().unwrap() - 1.0).abs() < 1e-12, "{key}");
    }

    let o = run(&["measures", "--state", s(&state), "--measurement", s(&m)]);
    let text = stdout(&o);
    assert!(text.contains("I_M") && text.contains("2.00000"), "{text}");
    assert!(text.lines().any(|l| l.starts_with("c_HV") && l.ends_with("1.00000")), "{text}");
}

#[test]
fn povm_measurement_file() {
    let dir = TempDir::new().unwrap();
    let state = write(&dir, "bell.json", BELL_PURE);
    let povm = write(
        &dir,
        "povm.json",
        r#"{"kind": "povm", "matrices": [[[[0.8, 0], [0, 0]], [[0, 0], [0.2, 0]]], [[[0.2, 0], [0, 0]], [[0, 0], [0.8, 0]]]]}"#,
    );
    let v = json(&run(&["measures", "--state", s(&state), "--measurement", s(&povm), "--format", "json"]));
    let h = -(0.8f64 * 0.8f64.log2() + 0.2 * 0.2f64.log2());
    assert!((v["measurement"]["c_hv"].as_f64().unwrap() - (1.0 - h)).abs() < 1e-12);
}

#[test]
fn example_state_in_its_eigenbasis() {
    let dir = TempDir::new().unwrap();
    let rho = build_sw99_state();
    let state = write_state(&dir, "sw.json", &rho);
    let eig = eigenbasis_measurement(&partial_trace(&rho, Subsystem::A)).unwrap();
    let m = write(
        &dir,
        "eig.json",
        &serde_json::to_string(&MeasurementFile::from_basis(eig.basis().unwrap())).unwrap(),
    );
    let v = json(&run(&["measures", "--state", s(&state), "--measurement", s(&m), "--format", "json"]));
    let r = &v["measurement"];
    assert!((r["delta_cl"].as_f64().unwrap() - 0.324521).abs() < 1e-6);
    assert!((r["delta_cl"].as_f64().unwrap() - r["c_hv"].as_f64().unwrap()).abs() < 1e-9);
}

#[test]
fn optimize_is_deterministic_and_round_trips() {
    let dir = TempDir::new().unwrap();
    let state = write_state(&dir, "sw.json", &build_sw99_state());
    let args = ["optimize", "--objective", "chv", "--state", s(&state), "--seed", "7", "--format", "json"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    let value = v["value"].as_f64().unwrap();
    assert!(value >= 0.45667 - 5e-4);

    let m = write(&dir, "best.json", &v["best_measurement"].to_string());
    let r = json(&run(&["measures", "--state", s(&state), "--measurement", s(&m), "--format", "json"]));
    assert!((r["measurement"]["c_hv"].as_f64().unwrap() - value).abs() < 1e-10);

    let t = run(&["optimize", "--objective", "chv", "--state", s(&state), "--restarts", "4"]);
    assert!(stdout(&t).contains("best basis"));
}

#[test]
fn optimize_bell_objectives() {
    let dir = TempDir::new().unwrap();
    let state = write(&dir, "bell.json", BELL_PURE);
    for obj in ["chv", "dcl", "deficit"] {
        let v = json(&run(&["optimize", "--objective", obj, "--state", s(&state), "--restarts", "4", "--format", "json"]));
        assert!((v["value"].as_f64().unwrap() - 1.0).abs() < 1e-6, "{obj}");
        assert_eq!(v["objective"], obj);
    }
}

#[test]
fn optimize_respects_thread_cap() {
    let dir = TempDir::new().unwrap();
    let state = write(&dir, "bell.json", BELL_PURE);
    let args = ["optimize", "--objective", "chv", "--state", s(&state), "--format", "json"];
    let capped = bin().args(args).env("DEFICIT_LAB_THREADS", "1").output().unwrap();
    assert!(capped.status.success());
    assert_eq!(capped.stdout, run(&args).stdout);
    let bad = bin().args(args).env("DEFICIT_LAB_THREADS", "many").output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn reproduce_exit_code_follows_checks() {
    for target in ["sw99", "knr01", "diagram", "chi-scan"] {
        let o = run(&["reproduce", target, "--format", "json"]);
        let v = json(&o);
        let overall = v["overall"].as_bool().unwrap();
        let all = v["checks"].as_array().unwrap().iter().all(|c| c["passed"].as_bool().unwrap());
        assert_eq!(overall, all);
        assert_eq!(o.status.code(), Some(if overall { 0 } else { 1 }), "{target}");
    }
}

#[test]
fn reproduce_tables() {
    let o = run(&["reproduce", "diagram"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("scenario: diagram"));
    assert!(text.contains("damping: members agree"));
    assert!(text.trim_end().ends_with("overall: PASS"));

    let o = run(&["reproduce", "knr01"]);
    let text = stdout(&o);
    assert!(text.contains("a (printed)") && text.contains("0.0701579"));
    assert!(text.contains("a (used)") && text.contains("0.570158"));
    assert!(text.contains("c_HV(|0>,|1>,|2>)") && text.contains("0.324990"));

    let o = run(&["reproduce", "sw99"]);
    let text = stdout(&o);
    // Achieved and target values are both shown.
    assert!(text.contains("0.467595") && text.contains("0.456670"), "{text}");
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(run(&["reproduce", "nope"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["optimize", "--objective", "max", "--state", "x.json"]).status.code(), Some(2));
    assert_eq!(run(&["measures", "--state", "/nonexistent/state.json"]).status.code(), Some(2));
}

#[test]
fn parse_errors_name_the_location() {
    let dir = TempDir::new().unwrap();
    let broken = write(&dir, "broken.json", "{\"dims\": [2, 2],\n \"pure\": [[1, 0], [0, 0]\n");
    let o = run(&["measures", "--state", s(&broken)]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("broken.json") && err.contains("line"), "{err}");

    let not_unit = write(&dir, "bad.json", r#"{"dims": [2, 1], "pure": [[1, 0], [1, 0]]}"#);
    let o = run(&["measures", "--state", s(&not_unit)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("field `pure`"));

    let unknown = write(&dir, "unknown.json", r#"{"dims": [2, 1], "pure": [[1, 0], [0, 0]], "extra": 1}"#);
    assert_eq!(run(&["measures", "--state", s(&unknown)]).status.code(), Some(2));
}

#[test]
fn dimension_mismatch_exits_2() {
    let dir = TempDir::new().unwrap();
    let state = write_state(&dir, "mixed.json", &DensityMatrix::maximally_mixed((3, 2)));
    let m = write(&dir, "comp.json", COMPUTATIONAL);
    let o = run(&["measures", "--state", s(&state), "--measurement", s(&m)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("dimension"));
}

#[test]
fn zero_restarts_rejected() {
    let dir = TempDir::new().unwrap();
    let state = write(&dir, "bell.json", BELL_PURE);
    let o = run(&["optimize", "--objective", "chv", "--state", s(&state), "--restarts", "0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn state_file_json_round_trips() {
    let rho = build_sw99_state();
    let text = serde_json::to_string(&StateFile::from_density(&rho)).unwrap();
    let back: StateFile = serde_json::from_str(&text).unwrap();
    let back = back.to_density().unwrap();
    assert_eq!(back.dims(), rho.dims());
    assert!(back.matrix().max_abs_diff(rho.matrix()) < 1e-15);
}
