use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_indef-entropy"))
        .args(args)
        .output()
        .unwrap()
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.is_file())
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                fs::read(&p).unwrap(),
            )
        })
        .collect();
    out.sort();
    out
}

#[test]
fn run_writes_report_and_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["run", "--out", dir.path().to_str().unwrap()]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
    let names: Vec<String> = files(dir.path()).into_iter().map(|(n, _)| n).collect();
    assert_eq!(
        names,
        [
            "entropy_trace.csv",
            "identity_suite.csv",
            "interpolation.csv",
            "report.json",
            "szego.csv"
        ]
    );
    let report: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("report.json")).unwrap()).unwrap();
    assert!(report.is_object());
}

#[test]
fn non_hermitian_s0_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let gen = run(&["gen", "--seed", "3"]);
    let mut scenario: serde_json::Value = serde_json::from_slice(&gen.stdout).unwrap();
    scenario["instance"] = serde_json::json!({
        "explicit": {
            "p": 1,
            "n": 2,
            "nu": [[[0.0, 0.0]]],
            "blocks": [[[[1.0, 0.5]]], [[[0.3, 0.0]]]]
        }
    });
    scenario["n"] = serde_json::json!(2);
    let path = dir.path().join("bad.json");
    fs::write(&path, serde_json::to_vec(&scenario).unwrap()).unwrap();
    let out = run(&[
        "check",
        "--scenario",
        path.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(!out.status.success());
    let text = String::from_utf8_lossy(&out.stdout).to_lowercase();
    assert!(text.contains("hermitian"), "{text}");
}

#[test]
fn gen_prints_a_loadable_scenario() {
    let out = run(&["gen", "--seed", "7"]);
    assert!(out.status.success());
    let scenario: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(scenario["seed"], 7);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.json");
    fs::write(&path, &out.stdout).unwrap();
    let again = run(&["gen", "--scenario", path.to_str().unwrap()]);
    assert_eq!(again.stdout, out.stdout);
}

#[test]
fn runs_are_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let out = run(&["solve", "--seed", "2", "--out", d.path().to_str().unwrap()]);
        assert!(out.status.code().is_some());
    }
    assert_eq!(files(a.path()), files(b.path()));
}

#[test]
fn unknown_verb_fails() {
    assert!(!run(&["frobnicate"]).status.success());
}
