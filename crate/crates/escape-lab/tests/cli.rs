//! Command-line interface contract: argument handling, exit codes, and
//! artifact placement.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_escape-lab")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("escape-lab-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("config.toml");
    std::fs::write(&path, text).unwrap();
    path
}

const SIMULATE: &str = r#"
[experiment]
kind = "simulate"
seed = 42

[landscape]
name = "double_well_1d"

[schedule]
kind = "constant"
gamma = 0.05
batch = 4.0
beta = 8.0

[simulate]
method = "sgd-sde"
w0 = [-1.0]
dt = 1e-3
t_final = 2.0
record_stride = 100
n_paths = 4
"#;

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().unwrap()
}

#[test]
fn run_writes_artifacts_and_exits_zero() {
    let dir = scratch("run-ok");
    let config = write_config(&dir, SIMULATE);
    let out = dir.join("out");
    let res = run(&["run", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(res.status.success(), "stderr: {}", String::from_utf8_lossy(&res.stderr));
    assert!(out.join("manifest.json").is_file());
    assert!(out.join("trajectory.csv").is_file());
    assert!(out.join("final_states.csv").is_file());
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn out_dir_can_come_from_the_environment() {
    let dir = scratch("env-out");
    let config = write_config(&dir, SIMULATE);
    let out = dir.join("from-env");
    let res = Command::new(bin())
        .args(["run", "--config", config.to_str().unwrap()])
        .env("ESCAPE_LAB_OUT", &out)
        .output()
        .unwrap();
    assert!(res.status.success(), "stderr: {}", String::from_utf8_lossy(&res.stderr));
    assert!(out.join("manifest.json").is_file());
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn validate_reports_the_fingerprint() {
    let dir = scratch("validate");
    let config = write_config(&dir, SIMULATE);
    let res = run(&["validate", "--config", config.to_str().unwrap()]);
    assert!(res.status.success());
    let stdout = String::from_utf8(res.stdout).unwrap();
    assert!(stdout.contains("config ok"), "stdout: {stdout}");
    assert!(stdout.contains("simulate"), "stdout: {stdout}");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn malformed_config_exits_two() {
    let dir = scratch("malformed");
    let config = write_config(&dir, "[experiment\nkind = ");
    let res = run(&["validate", "--config", config.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(2));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn unknown_landscape_exits_two_and_lists_the_catalog() {
    let dir = scratch("unknown-landscape");
    let config = write_config(&dir, &SIMULATE.replace("double_well_1d", "mystery_well"));
    let res = run(&["validate", "--config", config.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(2));
    let stderr = String::from_utf8(res.stderr).unwrap();
    assert!(stderr.contains("double_well_1d"), "stderr should list the catalog: {stderr}");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn invalid_parameters_exit_two_without_artifacts() {
    let dir = scratch("bad-dt");
    let config = write_config(&dir, &SIMULATE.replace("dt = 1e-3", "dt = -1e-3"));
    let out = dir.join("out");
    let res = run(&["run", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(2));
    assert!(!out.exists(), "failed runs must not leave an output directory");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn numeric_failure_exits_three_without_artifacts() {
    // Step size far beyond the explicit-scheme stability bound: the config
    // parses and validates, but the solver rejects it at run time.
    let dir = scratch("unstable");
    let config = write_config(
        &dir,
        r#"
[experiment]
kind = "solve-fpe"
seed = 1

[landscape]
name = "quadratic"

[schedule]
kind = "constant"
gamma = 0.5
batch = 1.0
beta = 1.0

[fpe]
dt = 0.5
t_final = 10.0

[fpe.grid]
min = -6.0
max = 6.0
cells = 240

[fpe.init]
profile = "stationary"
"#,
    );
    let out = dir.join("out");
    let res = run(&["run", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(3), "stderr: {}", String::from_utf8_lossy(&res.stderr));
    assert!(!out.exists(), "failed runs must not leave an output directory");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn missing_config_file_exits_two() {
    let res = run(&["run", "--config", "/nonexistent/config.toml"]);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn sample_configs_all_validate() {
    let configs = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(configs).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().and_then(|e| e.to_str()) != Some("toml") {
            continue;
        }
        let res = run(&["validate", "--config", path.to_str().unwrap()]);
        assert!(
            res.status.success(),
            "{} failed to validate: {}",
            path.display(),
            String::from_utf8_lossy(&res.stderr)
        );
        seen += 1;
    }
    assert!(seen >= 10, "expected the full sample-config set, found {seen}");
}
