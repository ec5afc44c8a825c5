//! End-to-end runs of the `richsing` binary against golden outputs in
//! `tests/golden`. Set `RICHSING_BLESS=1` to regenerate the goldens.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_richsing"));
    c.env_remove("RICHSING_SEED");
    c
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin().arg("--out-dir").arg(dir).args(args).output().expect("spawn richsing")
}

fn golden_dir(case: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(case)
}

fn check_golden(case: &str, dir: &Path, files: &[&str]) {
    let gdir = golden_dir(case);
    let bless = std::env::var_os("RICHSING_BLESS").is_some();
    for f in files {
        let got = std::fs::read(dir.join(f)).unwrap_or_else(|e| panic!("{case}: missing {f}: {e}"));
        if bless {
            std::fs::create_dir_all(&gdir).unwrap();
            std::fs::write(gdir.join(f), &got).unwrap();
            continue;
        }
        let want = std::fs::read(gdir.join(f)).unwrap_or_else(|e| panic!("{case}: no golden {f}: {e}"));
        assert!(got == want, "{case}: {f} differs from golden");
    }
}

fn golden_case(case: &str, args: &[&str], files: &[&str], code: i32) {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), args);
    assert_eq!(out.status.code(), Some(code), "{case}: {}", String::from_utf8_lossy(&out.stderr));
    check_golden(case, dir.path(), files);
    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("manifest.json")).unwrap()).unwrap();
    for f in files {
        assert!(manifest["outputs"].as_array().unwrap().iter().any(|o| o.as_str() == Some(f)), "{case}: {f} not in manifest");
    }
}

#[test]
fn sample_golden() {
    golden_case(
        "sample",
        &["sample", "--ensemble", "harmonic", "--n", "2", "--degree", "4", "--seed", "5", "--count", "2"],
        &["sample-0.json", "sample-1.json"],
        0,
    );
}

#[test]
fn zeros_golden() {
    golden_case("zeros", &["zeros", "--ensemble", "kostlan", "--degree", "12", "--seed", "3"], &["zeros.json", "zeros.csv"], 0);
}

#[test]
fn count_ovals_golden() {
    golden_case("count-ovals", &["count-ovals", "--ensemble", "harmonic", "--degree", "10", "--seed", "4"], &["ovals.json"], 0);
}

#[test]
fn critical_golden() {
    golden_case(
        "critical",
        &["critical", "--ensemble", "harmonic", "--degree", "6", "--seed", "2"],
        &["critical.json", "critical.csv"],
        0,
    );
}

#[test]
fn covariance_golden() {
    golden_case(
        "covariance",
        &["--no-plot", "covariance", "--n", "2", "--degrees", "10,20", "--r-max", "4", "--points", "41"],
        &["covariance.json", "covariance.csv"],
        0,
    );
}

#[test]
fn estimate_golden_for_any_thread_count() {
    for threads in ["1", "3"] {
        golden_case(
            "estimate",
            &[
                "--no-plot", "estimate", "--task", "zeros", "--ensemble", "kostlan", "--n", "1", "--degree", "20", "--samples", "40",
                "--batch-size", "4", "--seed", "1", "--threads", threads,
            ],
            &["estimate.json", "estimate.csv"],
            0,
        );
    }
}

#[test]
fn plots_are_written_unless_disabled() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["covariance", "--n", "1", "--degrees", "10,20", "--points", "21"]);
    assert!(out.status.success());
    let svg = std::fs::read_to_string(dir.path().join("covariance.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
}

#[test]
fn config_file_matches_flags() {
    let flags = tempfile::tempdir().unwrap();
    assert!(run_in(flags.path(), &["zeros", "--ensemble", "kostlan", "--degree", "9", "--seed", "17"]).status.success());

    let cfg = tempfile::tempdir().unwrap();
    let path = cfg.path().join("run.toml");
    std::fs::write(&path, "seed = 17\nensemble = \"harmonic\"\n\n[zeros]\nensemble = \"kostlan\"\ndegree = 9\n").unwrap();
    let out = run_in(cfg.path(), &["--config", path.to_str().unwrap(), "zeros"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(
        std::fs::read(flags.path().join("zeros.json")).unwrap(),
        std::fs::read(cfg.path().join("zeros.json")).unwrap()
    );
    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(cfg.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 17);
    assert_eq!(manifest["config"]["ensemble"], "kostlan");
    assert_eq!(manifest["config"]["degree"], 9);
}

#[test]
fn seed_from_environment() {
    let a = tempfile::tempdir().unwrap();
    assert!(run_in(a.path(), &["zeros", "--ensemble", "harmonic", "--degree", "7", "--seed", "99"]).status.success());
    let b = tempfile::tempdir().unwrap();
    let out = bin()
        .env("RICHSING_SEED", "99")
        .arg("--out-dir")
        .arg(b.path())
        .args(["zeros", "--ensemble", "harmonic", "--degree", "7"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(std::fs::read(a.path().join("zeros.json")).unwrap(), std::fs::read(b.path().join("zeros.json")).unwrap());
}

#[test]
fn sample_file_round_trips_through_input() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run_in(dir.path(), &["sample", "--ensemble", "kostlan", "--n", "1", "--degree", "11", "--seed", "8", "--index", "3"])
        .status
        .success());
    let input = dir.path().join("sample-3.json");
    let from_file = tempfile::tempdir().unwrap();
    assert!(run_in(from_file.path(), &["zeros", "--input", input.to_str().unwrap()]).status.success());
    let drawn = tempfile::tempdir().unwrap();
    assert!(run_in(drawn.path(), &["zeros", "--ensemble", "kostlan", "--degree", "11", "--seed", "8", "--index", "3"])
        .status
        .success());
    assert_eq!(
        std::fs::read(from_file.path().join("zeros.json")).unwrap(),
        std::fs::read(drawn.path().join("zeros.json")).unwrap()
    );
}

#[test]
fn bound_prints_value() {
    let out = bin().args(["bound", "--c1", "2", "--c2", "1", "--c", "0"]).output().unwrap();
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), "0.5");
}

#[test]
fn invalid_input_names_the_flag() {
    let out = bin().args(["bound", "--c1", "1", "--c2", "0.5", "--c", "3"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--c"));

    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["zeros", "--ensemble", "gaussian"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--ensemble"));

    let out = bin().args(["zeros", "--no-such-flag"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}
