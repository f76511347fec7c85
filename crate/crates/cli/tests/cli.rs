use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "data", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn deloc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_deloc")).args(args).env_remove("DELOC_RADIUS").output().unwrap()
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn real(v: &Value) -> f64 {
    v.as_str().map(|s| s.parse().unwrap()).or_else(|| v.as_f64()).unwrap()
}

#[test]
fn ranks_of_z2() {
    let out = deloc(&["coh", "rank", "--group", "cyclic:2", "--gamma", "1", "--flavor", "cyclic-delocalized", "--max-degree", "2"]);
    let v = json(&out);
    assert_eq!(v["report"]["ranks"], serde_json::json!([1, 0, 1]));
}

#[test]
fn eta_of_the_worked_model() {
    let out = deloc(&["eta", "compute", "--model", &data("z2-model.json"), "--cocycle", &data("trgamma.json"), "--m", "0", "--tol", "1e-8"]);
    let v = json(&out);
    assert!((real(&v["report"]["value"]["re"]) - 1.0).abs() < 1e-8, "{v}");
}

#[test]
fn ball_of_the_lattice() {
    let v = json(&deloc(&["grp", "ball", "--group", "free_abelian:2", "--radius", "1"]));
    assert_eq!(v["report"]["elements"].as_array().unwrap().len(), 5);
}

#[test]
fn tau_and_ch_of_the_half_projection() {
    let v = json(&deloc(&["tau", "compute", "--path", &data("z2-connecting-path.json"), "--cocycle", &data("trgamma.json")]));
    assert!((real(&v["report"]["value"]["re"]) + 1.0).abs() < 1e-8);
    let v = json(&deloc(&["tau", "compute", "--path", &data("z2-rho-path.json"), "--cocycle", &data("trgamma.json")]));
    assert!((real(&v["report"]["value"]["re"]) - 1.0).abs() < 1e-8);
    let v = json(&deloc(&["ch", "compute", "--idempotent", &data("z2-half.json"), "--cocycle", &data("trgamma.json")]));
    assert!((real(&v["report"]["value"]["re"]) - 0.5).abs() < 1e-12);
}

#[test]
fn csv_output_has_the_fixed_header() {
    let out = deloc(&["--format", "csv", "eta", "compute", "--model", &data("z2-model.json"), "--cocycle", &data("trgamma.json")]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("invariant,group,gamma,m,value_re,value_im,err,T,passed\n"), "{text}");
}

#[test]
fn validation_reports_paths() {
    let out = deloc(&["validate", "--schema", "cochain", &data("bad-rational.json")]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stdout).contains("entries[0].re"));
    let out = deloc(&["validate", "--schema", "cochain", &data("trgamma.json")]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn exit_codes() {
    assert_eq!(deloc(&["frobnicate"]).status.code(), Some(64));
    assert_eq!(deloc(&[]).status.code(), Some(64));
    assert_eq!(deloc(&["eta", "compute", "--model", "/nonexistent.json", "--cocycle", &data("trgamma.json")]).status.code(), Some(2));
    assert_eq!(deloc(&["--tol=-1", "eta", "compute", "--model", &data("z2-model.json"), "--cocycle", &data("trgamma.json")]).status.code(), Some(2));
    // A verification whose checks fail exits 1 with its report on stdout.
    let out = deloc(&["verify", "s-invariance", "--model", &data("z2-model.json"), "--cocycle", &data("trgamma.json")]);
    assert_eq!(out.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["report"]["eta_sign_flipped"]["passed"], true);
    assert_eq!(deloc(&["--help"]).status.code(), Some(0));
}

#[test]
fn lipschitz_reports() {
    let v = json(&deloc(&["--radius", "4", "verify", "lipschitz", "--group", "heisenberg", "--gamma", "(0,0,1)"]));
    assert_eq!(v["report"]["bound"], "1");
    let out = deloc(&["--radius", "4", "verify", "lipschitz", "--group", "heisenberg", "--gamma", "(1,0,0)"]);
    assert_eq!(out.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["report"]["bound"], "7");
}

#[test]
fn cocycle_tools() {
    let v = json(&deloc(&["cocycle", "periodicity", "--cochain", &data("trgamma.json")]));
    assert_eq!(v["degree"], 2);
    let v = json(&deloc(&["cocycle", "build", "--alpha", &data("z4-alpha.json")]));
    assert_eq!(v["flavor"], "cyclic-delocalized");
}

#[test]
fn suite_is_deterministic_and_writes_files() {
    let dir = std::env::temp_dir().join(format!("deloc-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let a = dir.join("a.json");
    let b = dir.join("b.json");
    for p in [&a, &b] {
        let out = deloc(&["--seed", "7", "-o", p.to_str().unwrap(), "verify", "suite"]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let ta = std::fs::read(&a).unwrap();
    assert_eq!(ta, std::fs::read(&b).unwrap());
    let v: Value = serde_json::from_slice(&ta).unwrap();
    assert_eq!(v["config"]["seed"], 7);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn eta_from_a_spectrum_file() {
    // Hand sums of sign(λ)·m over the three modes.
    for (class, want) in [("g", 2.5), ("e", 4.0)] {
        let v = json(&deloc(&["eta", "compute", "--spectrum", &data("lens-spectrum.json"), "--class", class]));
        assert!((real(&v["report"]["value"]["re"]) - want).abs() < 1e-8, "{v}");
    }
    let out = deloc(&["eta", "compute", "--spectrum", &data("lens-spectrum.json"), "--class", "g", "--m", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let out = deloc(&["eta", "compute", "--spectrum", &data("lens-spectrum.json"), "--model", &data("z2-model.json"), "--class", "g"]);
    assert_eq!(out.status.code(), Some(2));
}
