use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn profile(name: &str) -> String {
    root().join("profiles").join(name).display().to_string()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_szego")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&out.stdout)))
}

fn assert_schema(name: &str, doc: &Value) {
    let path = root().join("schemas").join(format!("{name}.schema.json"));
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    let validator = jsonschema::validator_for(&schema).expect("schema compiles");
    let errors: Vec<String> = validator.iter_errors(doc).map(|e| format!("{} at {}", e, e.instance_path)).collect();
    assert!(errors.is_empty(), "{name}: {errors:#?}");
}

fn complex(v: &Value) -> (f64, f64) {
    (v[0].as_f64().unwrap(), v[1].as_f64().unwrap())
}

#[test]
fn free_profile_transfer_at_i() {
    let out = run(&["transfer", "--profile", &profile("zero.json"), "--z", "i", "--T", "1"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_schema("transfer", &v);
    let m = &v["result"]["matrix"];
    let e = std::f64::consts::E;
    let (re11, im11) = complex(&m["e11"]);
    let (re22, im22) = complex(&m["e22"]);
    assert!((re11 - 1.0 / e).abs() < 1e-10 && im11.abs() < 1e-10);
    assert!((re22 - e).abs() < 1e-10 && im22.abs() < 1e-10);
    assert_eq!(complex(&m["e12"]), (0.0, 0.0));
}

#[test]
fn real_axis_transfer_is_su11() {
    for z in ["0", "0.7", "-2.5"] {
        let out = run(&["transfer", "--profile", &profile("step_b.json"), "--z", z, "--T", "1"]);
        assert_eq!(code(&out), 0);
        assert_eq!(json(&out)["su11"], Value::Bool(true), "z = {z}");
    }
}

#[test]
fn input_errors_exit_one() {
    let cases: [&[&str]; 5] = [
        &["sumrule", "--profile", &profile("not_psd.json"), "--nodes", "64"],
        &["transfer", "--profile", &profile("zero.json"), "--z", "1+", "--T", "1"],
        &["transfer", "--profile", "no/such/profile.json", "--z", "1", "--T", "1"],
        &["sumrule", "--profile", &profile("zero.json"), "--nodes", "100"],
        &["transfer", "--profile", &profile("zero.json"), "--z", "1", "--T", "1", "--ode-step", "-1"],
    ];
    for args in cases {
        let out = run(args);
        assert_eq!(code(&out), 1, "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(!out.stderr.is_empty());
    }
    assert_eq!(code(&run(&["frobnicate"])), 1);
}

#[test]
fn expanding_matrix_is_a_verification_failure() {
    let out = run(&["jmod", "--matrix", "0.5,0;0,2"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("--expanding"));

    let out = run(&["jmod", "--matrix", "0.5,0;0,2", "--expanding"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_schema("jmod", &v);
    assert_eq!(v["class"], "j_expanding");
    assert!(v["residual_factorization"].as_f64().unwrap() < 1e-12);
}

#[test]
fn jmod_identity_and_diagonal() {
    for m in ["1,0;0,1", "2,0;0,0.5", "1.25,0.75i;-0.75i,1.25"] {
        let out = run(&["jmod", "--matrix", m]);
        assert_eq!(code(&out), 0, "{m}: {}", String::from_utf8_lossy(&out.stderr));
        let v = json(&out);
        assert_schema("jmod", &v);
        for key in ["residual_factorization", "residual_j_unitary", "residual_modulus"] {
            assert!(v[key].as_f64().unwrap() < 1e-12, "{m}: {key} = {}", v[key]);
        }
    }
}

#[test]
fn zero_profile_sumrule() {
    let out = run(&["sumrule", "--profile", &profile("zero.json"), "--nodes", "64"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_schema("sumrule", &v);
    assert_eq!(v["agrees"], Value::Bool(true));
    assert!(v["report"]["abs_diff"].as_f64().unwrap() < 1e-12);
}

#[test]
fn step_sumrule_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = run(&["sumrule", "--profile", &profile("step_b.json"), "--nodes", "256", "--formats", "csv,json,svg", "--out", d]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_schema("sumrule", &v);
    // rhs = 2(1 − √(1 − 0.6²)) = 0.4 on the unit interval
    let rhs = v["report"]["rhs_coefficient_integral"].as_f64().unwrap();
    assert!((rhs - 0.4).abs() < 1e-9, "{rhs}");
    assert!(v["report"]["abs_diff"].as_f64().unwrap() < 1e-3);
    for f in ["sumrule.json", "schur_grid.csv", "w_abs.svg", "entropy.svg"] {
        assert!(dir.path().join(f).is_file(), "missing {f}");
    }
    let written: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("sumrule.json")).unwrap()).unwrap();
    assert_eq!(written, v);
}

#[test]
fn gauge_round_trip_through_csv() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = run(&["gauge", "--direction", "arov2pdb", "--profile", &profile("step_b.json"), "--out", d]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_schema("gauge", &v);
    assert!(v["round_trip_residual"].as_f64().unwrap() <= 1e-3);
    assert!(v["det_defect"].as_f64().unwrap() < 1e-9);

    let csv = dir.path().join("pdb.csv");
    let out = run(&["gauge", "--direction", "pdb2arov", "--profile", csv.to_str().unwrap(), "--out", d]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_schema("gauge", &v);
    assert!(v["round_trip_residual"].as_f64().unwrap() <= 1e-3);
    assert!(dir.path().join("profile.json").is_file());
}

#[test]
fn zero_profile_hamiltonian_is_identity() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = run(&["gauge", "--direction", "arov2pdb", "--profile", &profile("zero.json"), "--T", "1", "--out", d]);
    assert_eq!(code(&out), 0);
    let csv = std::fs::read_to_string(dir.path().join("pdb.csv")).unwrap();
    for line in csv.lines().skip(1).filter(|l| !l.starts_with("inf")) {
        let f: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        assert!((f[1] - 1.0).abs() < 1e-12 && f[2].abs() < 1e-12 && f[3].abs() < 1e-12 && (f[4] - 1.0).abs() < 1e-12, "{line}");
    }
}

#[test]
fn nodes_demo_passes_and_is_deterministic() {
    let a = run(&["nodes-demo", "--seed", "7", "--dims", "2,1"]);
    assert_eq!(code(&a), 0, "{}", String::from_utf8_lossy(&a.stderr));
    let v = json(&a);
    assert_schema("nodes_demo", &v);
    assert_eq!(v["pipeline"]["membership"]["member"], Value::Bool(true));
    let b = run(&["nodes-demo", "--seed", "7", "--dims", "2,1"]);
    assert_eq!(a.stdout, b.stdout);
    let c = run(&["nodes-demo", "--seed", "8", "--dims", "2,1"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn trivial_state_space_gives_constant_characteristic_function() {
    let out = run(&["nodes-demo", "--dims", "0,1"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    let samples = v["pipeline"]["char_samples"].as_array().unwrap();
    // with no state space the resolvent term vanishes and Θ(ζ) = D exactly
    assert!(samples.len() > 1);
    for sample in samples {
        assert_eq!(sample["value"], samples[0]["value"]);
    }
}
