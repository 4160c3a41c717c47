use std::path::Path;
use std::process::{Command, Output};

fn illposed(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_illposed")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn run_shaw(dir: &Path, seed: &str) -> Output {
    illposed(&[
        "run",
        "--problem",
        "shaw",
        "--n",
        "64",
        "--kmax",
        "20",
        "--seed",
        seed,
        "--out",
        dir.to_str().unwrap(),
    ])
}

#[test]
fn run_writes_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_shaw(tmp.path(), "42");
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("k* = "));
    for f in ["summary.csv", "analysis.csv", "panel_a.svg", "panel_d.svg", "config.txt"] {
        assert!(tmp.path().join(f).exists(), "{f}");
    }
}

#[test]
fn config_file_with_overrides() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("exp.cfg");
    let out_dir = tmp.path().join("out");
    std::fs::write(&cfg, "# picard instance\nproblem = picard\nspectrum = severe\nrho = 2\nn = 32\nkmax = 10\n").unwrap();
    let out = illposed(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--set",
        "beta=0.5",
        "--noise",
        "1e-4",
        "--panels",
        "ab",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let echoed = std::fs::read_to_string(out_dir.join("config.txt")).unwrap();
    assert!(echoed.contains("beta = 5e-1"), "{echoed}");
    assert!(echoed.contains("noise = 1e-4"), "{echoed}");
    assert!(out_dir.join("panel_b.svg").exists());
    assert!(!out_dir.join("panel_c.svg").exists());
}

#[test]
fn configuration_errors_exit_with_2() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("x");
    let out = out_dir.to_str().unwrap();
    let cases: [&[&str]; 5] = [
        &["run", "--problem", "shaw", "--n", "64", "--kmax", "300", "--out", out],
        &["run", "--problem", "nosuch", "--out", out],
        &["run", "--problem", "shaw", "--set", "colour=red", "--out", out],
        &["run", "--problem", "picard", "--out", out],
        &["run", "--config", "/nonexistent/file.cfg"],
    ];
    for args in cases {
        let o = illposed(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
        assert!(!stderr(&o).is_empty());
    }
    assert!(!out_dir.exists());
}

#[test]
fn compare_reports_and_exits() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b, c) = (tmp.path().join("a"), tmp.path().join("b"), tmp.path().join("c"));
    for (dir, seed) in [(&a, "1"), (&b, "1"), (&c, "2")] {
        assert_eq!(run_shaw(dir, seed).status.code(), Some(0));
    }
    let same = illposed(&["compare", a.to_str().unwrap(), b.to_str().unwrap()]);
    assert_eq!(same.status.code(), Some(0));
    assert!(stdout(&same).contains("PASS"));

    let differ = illposed(&["compare", a.to_str().unwrap(), c.to_str().unwrap()]);
    assert_eq!(differ.status.code(), Some(1));
    let text = stdout(&differ);
    assert!(text.contains("FAIL") && text.contains("abs_uiTb"), "{text}");
    assert!(!text.contains("[noise-independent]"), "{text}");

    let relaxed = illposed(&["compare", a.to_str().unwrap(), b.to_str().unwrap(), "--tol", "gamma=1e-8"]);
    assert_eq!(relaxed.status.code(), Some(0));
    assert!(stdout(&relaxed).contains("relaxed: gamma"));

    let missing = illposed(&["compare", a.to_str().unwrap(), tmp.path().join("none").to_str().unwrap()]);
    assert_eq!(missing.status.code(), Some(2));
    let bad_tol = illposed(&["compare", a.to_str().unwrap(), b.to_str().unwrap(), "--tol", "gamma"]);
    assert_eq!(bad_tol.status.code(), Some(2));
}
