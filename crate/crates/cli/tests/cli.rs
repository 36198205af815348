//! End-to-end runs of the `phigamma` binary against a freshly generated corpus.

use serde_json::Value;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_phigamma"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn corpus_dir(seed: u64) -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["corpus", "--seed", &seed.to_string(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    dir
}

fn fixture(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_owned()
}

fn json_files(dir: &Path) -> Vec<PathBuf> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    files
}

#[test]
fn validate_trivial_fixture_succeeds() {
    let dir = corpus_dir(0);
    let out = run(&["validate", "--input", &fixture(dir.path(), "trivial_p3_a.json")]);
    assert_eq!(code(&out), 0);
}

#[test]
fn degree_zero_of_trivial_two_variable_module() {
    let dir = corpus_dir(0);
    let out = run(&[
        "--format",
        "json",
        "cohomology",
        "--degree",
        "0",
        "--input",
        &fixture(dir.path(), "trivial_p5_ab.json"),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let d = &v["degrees"][0];
    assert_eq!(d["degree"], 0);
    assert_eq!(d["divisors"], serde_json::json!([]));
    assert_eq!(d["free_rank"], 1);
    assert_eq!(d["stabilized"], true);
    assert_eq!(v["window"]["lo"], serde_json::json!([-16, -16]));
}

#[test]
fn twisted_module_has_no_invariants() {
    let dir = corpus_dir(0);
    let out = run(&["--format", "json", "cohomology", "--input", &fixture(dir.path(), "tate_twist_p3_ab.json")]);
    assert_eq!(code(&out), 0);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["degrees"][0]["free_rank"], 0);
    assert_eq!(v["degrees"][0]["divisors"], serde_json::json!([]));
}

#[test]
fn non_etale_descent_fails_validation() {
    let dir = corpus_dir(0);
    let out = run(&["descend", "--input", &fixture(dir.path(), "finite/phi_not_etale.json")]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("not etale"));
}

#[test]
fn schema_and_usage_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"p": 3}"#).unwrap();
    assert_eq!(code(&run(&["validate", "--input", bad.to_str().unwrap()])), 3);
    let garbage = dir.path().join("garbage.json");
    std::fs::write(&garbage, "not a module").unwrap();
    assert_eq!(code(&run(&["validate", "--input", garbage.to_str().unwrap()])), 3);
    assert_eq!(code(&run(&["no-such-command"])), 3);
}

#[test]
fn window_overrides_may_only_enlarge() {
    let dir = corpus_dir(0);
    let input = fixture(dir.path(), "trivial_p3_a.json");
    assert_eq!(code(&run(&["cohomology", "--input", &input, "--window", "-4:4"])), 3);
    assert_eq!(code(&run(&["cohomology", "--input", &input, "--window", "-20:20"])), 0);
}

#[test]
fn higher_degrees_need_the_experimental_flag() {
    let dir = corpus_dir(0);
    let input = fixture(dir.path(), "trivial_p3_a.json");
    assert_ne!(code(&run(&["cohomology", "--input", &input, "--degree", "1"])), 0);
    let out = run(&["--format", "json", "cohomology", "--input", &input, "--experimental"]);
    assert!(matches!(code(&out), 0 | 2));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["degrees"][1]["experimental"], true);
}

#[test]
fn corpus_is_deterministic_and_complete() {
    let (a, b) = (corpus_dir(0), corpus_dir(0));
    for sub in ["", "finite"] {
        let fa = json_files(&a.path().join(sub));
        let fb = json_files(&b.path().join(sub));
        assert_eq!(fa.len(), fb.len());
        for (x, y) in fa.iter().zip(&fb) {
            assert_eq!(x.file_name(), y.file_name());
            assert_eq!(std::fs::read(x).unwrap(), std::fs::read(y).unwrap(), "{x:?}");
        }
    }
    let names: Vec<String> = json_files(a.path())
        .iter()
        .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
        .collect();
    for stem in ["trivial", "tate_twist", "induced", "tensor_of_twists"] {
        assert!(names.iter().any(|n| n.starts_with(stem)), "missing {stem}");
    }
}

#[test]
fn every_generated_fixture_validates() {
    let dir = corpus_dir(0);
    let mut files = json_files(dir.path());
    files.extend(json_files(&dir.path().join("finite")));
    assert!(files.len() > 100);
    for f in files {
        let out = run(&["validate", "--input", f.to_str().unwrap()]);
        // The one deliberately non-étale fixture must be rejected.
        let expect = if f.ends_with("phi_not_etale.json") { 1 } else { 0 };
        assert_eq!(code(&out), expect, "{f:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn descent_round_trip_and_algebra() {
    let dir = corpus_dir(0);
    let out = run(&[
        "--format",
        "json",
        "descend",
        "--algebra",
        "--input",
        &fixture(dir.path(), "finite/rep_random_p2_m1_f12_r2.json"),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v.is_object());
}

#[test]
fn pairing_reports_adjointness() {
    let dir = corpus_dir(0);
    let out = run(&["pairing", "--input", &fixture(dir.path(), "trivial_p3_a.json"), "--x", "1", "--y", "pi_a^-1"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("{x, y} = 1"), "{text}");
}

#[test]
fn norms_and_selftest_succeed() {
    let out = run(&["norms", "--series", "pi_a", "--p", "3", "--r", "1/2"]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stdout).contains("3/4"));
    assert_eq!(code(&run(&["selftest"])), 0);
}
