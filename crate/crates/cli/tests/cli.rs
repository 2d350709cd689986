use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn mini() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/mini")
}

fn secmsg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_secmsg"))
        .args(args)
        .env("SOURCE_DATE_EPOCH", "1700000000")
        .env_remove("RUST_LOG")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(code(&secmsg(&[])), 2);
    assert_eq!(code(&secmsg(&["frobnicate"])), 2);
    assert_eq!(code(&secmsg(&["--jobs", "0", "clean"])), 2);
    assert_eq!(code(&secmsg(&["--lang-threshold", "1.5", "clean"])), 2);
    assert_eq!(code(&secmsg(&["resolve", "--archive-url", "https://x.org"])), 2);
}

#[test]
fn help_and_version_exit_0() {
    let o = secmsg(&["--help"]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("run-all"));
    assert_eq!(code(&secmsg(&["--version"])), 0);
}

#[test]
fn fatal_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = secmsg(&["--out", out, "classify"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("clean"), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(code(&secmsg(&["--config", "/nonexistent/run.toml", "ingest"])), 1);
    assert_eq!(code(&secmsg(&["--out", out, "ingest"])), 1);
}

#[test]
fn run_all_is_reproducible_across_job_counts() {
    let config = mini().join("config.toml");
    let config = config.to_str().unwrap();
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let oa = secmsg(&["--config", config, "--out", a.path().to_str().unwrap(), "--jobs", "1", "run-all"]);
    assert_eq!(code(&oa), 0, "{}", String::from_utf8_lossy(&oa.stderr));
    let ob = secmsg(&["--config", config, "--out", b.path().to_str().unwrap(), "--jobs", "3", "run-all"]);
    assert_eq!(code(&ob), 0, "{}", String::from_utf8_lossy(&ob.stderr));
    let stdout = String::from_utf8_lossy(&oa.stdout);
    assert!(
        stdout.contains("clean: 17 in, 1 duplicates, 1 bots, 2 non-English or link-only removed, 13 kept"),
        "{stdout}"
    );

    let mut names: Vec<_> = std::fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names.len(), 19);
    for name in names {
        let x = std::fs::read(a.path().join(&name)).unwrap();
        let y = std::fs::read(b.path().join(&name)).unwrap();
        assert!(x == y, "{name:?} differs");
    }
}

#[test]
fn stages_one_by_one_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let m = mini();
    let osv = m.join("osv");
    let nvd = m.join("nvd.json");
    let store = m.join("store.jsonl");
    let steps: Vec<Vec<&str>> = vec![
        vec!["ingest", "--osv", osv.to_str().unwrap(), "--nvd", nvd.to_str().unwrap()],
        vec!["extract"],
        vec!["resolve", "--store", store.to_str().unwrap()],
        vec!["clean"],
        vec!["--ccs-types", "fix,feat", "classify"],
        vec!["--min-group-size", "2", "--cutoffs", "2022-08-12,2025-10-07", "analyze"],
    ];
    for step in steps {
        let mut args = vec!["--out", out];
        args.extend(step.iter().copied());
        let o = secmsg(&args);
        assert_eq!(code(&o), 0, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let rq4 = std::fs::read_to_string(dir.path().join("rq4.txt")).unwrap();
    // docs: is no longer a known type.
    assert!(rq4.contains("Compliant: 2 (15.38%)"), "{rq4}");
    let rq3 = std::fs::read_to_string(dir.path().join("rq3.txt")).unwrap();
    assert!(rq3.contains("Mean score: npm 4.500, PyPI 2.000, Go 1.000"), "{rq3}");
}
