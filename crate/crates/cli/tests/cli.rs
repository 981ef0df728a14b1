use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn smectic(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_smectic")).args(args).output().expect("binary runs")
}

fn text(b: &[u8]) -> String {
    String::from_utf8_lossy(b).into_owned()
}

fn csv_rows(dir: &Path) -> Vec<String> {
    fs::read_to_string(dir.join("energy.csv")).unwrap().lines().skip(1).map(str::to_string).collect()
}

#[test]
fn help_exits_zero() {
    let out = smectic(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    let usage = text(&out.stdout);
    for flag in ["--config", "--out-dir", "--scheme", "--nx", "--dt", "--t-end", "--out-every", "--override-solvability"] {
        assert!(usage.contains(flag), "{flag} missing from help");
    }
}

#[test]
fn missing_config_is_a_config_error() {
    let out = smectic(&["--config", "/nonexistent/run.cfg"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(text(&out.stderr).contains("/nonexistent/run.cfg"));
}

#[test]
fn bad_values_name_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "epsilon = -1\ncolour = blue\n").unwrap();
    let out = smectic(&["--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = text(&out.stderr);
    assert!(err.contains("colour"), "{err}");

    fs::write(&cfg, "epsilon = -1\n").unwrap();
    let out = smectic(&["--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(text(&out.stderr).contains("epsilon"));

    let out = smectic(&["--nx", "many"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(text(&out.stderr).contains("nx"));

    let out = smectic(&["--bogus"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn solvability_violation_and_override() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let base = ["--nx", "2", "--dt", "0.01", "--t-end", "0.02", "--out-dir", out_dir.to_str().unwrap()];
    let out = smectic(&base);
    assert_eq!(out.status.code(), Some(1));
    assert!(text(&out.stderr).contains("dt"));
    assert!(!out_dir.exists());

    let mut with = base.to_vec();
    with.push("--override-solvability");
    let out = smectic(&with);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    assert_eq!(csv_rows(&out_dir).len(), 2);
}

#[test]
fn default_config_short_run() {
    let dir = tempfile::tempdir().unwrap();
    let out = smectic(&["--t-end", "1e-4", "--out-dir", dir.path().to_str().unwrap(), "--out-every", "5"]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    assert_eq!(csv_rows(dir.path()).len(), 10);
    let stdout = text(&out.stdout);
    assert!(stdout.contains("total steps: 10"));
    assert!(stdout.contains("peak kinetic energy"));
    assert!(stdout.contains("final energies"));
    for step in [0, 5, 10] {
        assert!(dir.path().join(format!("snapshot_{step:06}.vtk")).exists());
    }
}

#[test]
fn flags_override_config_and_output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# small mp run\nscheme = mp\nnx = 8\nt_end = 1\nsnapshots = false\n").unwrap();
    let mut csvs = Vec::new();
    for name in ["a", "b"] {
        let out_dir = dir.path().join(name);
        let out = smectic(&["--config", cfg.to_str().unwrap(), "--t-end", "5e-5", "--out-dir", out_dir.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
        assert!(text(&out.stdout).contains("scheme mp  nx 8"));
        assert!(!out_dir.join("snapshot_000000.vtk").exists());
        csvs.push(fs::read(out_dir.join("energy.csv")).unwrap());
    }
    assert_eq!(csvs[0], csvs[1]);
    assert_eq!(text(&csvs[0]).lines().count(), 6);
}

#[test]
fn runtime_failure_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let out = smectic(&["--nx", "2", "--t-end", "1e-5", "--out-dir", blocker.join("sub").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}
