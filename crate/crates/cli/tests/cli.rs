use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn qsteer(args: &[&str], env_root: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_qsteer"));
    cmd.args(args).env_remove("QSTEER_OUT_ROOT");
    if let Some(root) = env_root {
        cmd.env("QSTEER_OUT_ROOT", root);
    }
    cmd.output().expect("spawn qsteer")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const TRAJECTORY: &str = "[feedback]\ntarget_theta = 0.6\nt_end = 2.0\ndt = 1e-3\n";

const TARGET: &str = "[spectral]\ncoupling_gamma = 4e-7\n[target]\ninitial_theta = \"pi\"\ntarget_theta = 0\n";

#[test]
fn single_point_curve_is_zero_row() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "c.toml", "[spectral]\ncoupling_gamma = 0.1\n[decoherence]\nregime = \"adiabatic\"\ndt = 0.5\nn = 1\n");
    let out = tmp.path().join("out");
    let o = qsteer(&["decoherence", "--config", &cfg, "--out", out.to_str().unwrap()], None);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(out.join("curve.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows, ["tau,g", "0,0"]);
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "c.toml", TRAJECTORY);
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    let c = tmp.path().join("c");
    for dir in [&a, &b] {
        let o = qsteer(&["feedback", "--config", &cfg, "--out", dir.to_str().unwrap(), "--seed", "7"], None);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let first = fs::read(a.join("trajectory.csv")).unwrap();
    assert_eq!(first, fs::read(b.join("trajectory.csv")).unwrap());

    // The echoed configuration alone reproduces the run, seed included.
    let resolved = a.join("resolved_config.toml");
    let o = qsteer(&["feedback", "--config", resolved.to_str().unwrap(), "--out", c.to_str().unwrap()], None);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(first, fs::read(c.join("trajectory.csv")).unwrap());
    assert_eq!(fs::read(resolved).unwrap(), fs::read(c.join("resolved_config.toml")).unwrap());

    let d = tmp.path().join("d");
    let o = qsteer(&["feedback", "--config", &cfg, "--out", d.to_str().unwrap(), "--seed", "8"], None);
    assert!(o.status.success());
    assert_ne!(first, fs::read(d.join("trajectory.csv")).unwrap());
}

#[test]
fn misspelled_key_is_reported_with_suggestion() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "c.toml", &format!("{TARGET}imax = 0.02\n"));
    let out = tmp.path().join("out");
    let o = qsteer(&["target", "--config", &cfg, "--out", out.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(2));
    let msg = stderr(&o);
    assert!(msg.contains("`target.imax` at line 6"), "{msg}");
    assert!(msg.contains("did you mean `i_max`"), "{msg}");
    assert!(!out.exists());
}

#[test]
fn zero_pulse_bound_is_rejected() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "c.toml", TARGET);
    let out = tmp.path().join("out");
    let o = qsteer(&["target", "--config", &cfg, "--out", out.to_str().unwrap(), "--set", "target.i_max=0"], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("i_max > 0"), "{}", stderr(&o));
}

#[test]
fn minimal_config_echoes_defaults() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "c.toml", TARGET);
    let o = qsteer(&["target", "--config", &cfg], Some(tmp.path()));
    assert!(o.status.success(), "{}", stderr(&o));
    let dir = tmp.path().join("target");
    let resolved = fs::read_to_string(dir.join("resolved_config.toml")).unwrap();
    for line in ["spectral_exponent = 1.0", "dt = 0.01", "hold_cycles = 0", "n_intermediates = 100", "initial_theta = 3.141592653589793"] {
        assert!(resolved.contains(line), "missing `{line}` in\n{resolved}");
    }
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.starts_with("final_fidelity="), "{stdout}");
    assert!(dir.join("control_log.csv").exists());
    assert!(!dir.join("FAILED").exists());
}

#[test]
fn unmet_threshold_exits_nonzero_and_marks_output() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "c.toml", TARGET);
    let out = tmp.path().join("out");
    let o = qsteer(&["target", "--config", &cfg, "--out", out.to_str().unwrap(), "--set", "target.n_intermediates=2"], None);
    assert_eq!(o.status.code(), Some(1));
    assert!(out.join("FAILED").exists());
    assert!(out.join("control_log.csv").exists());

    // A later successful run in the same directory clears the marker.
    let o = qsteer(&["target", "--config", &cfg, "--out", out.to_str().unwrap()], None);
    assert!(o.status.success());
    assert!(!out.join("FAILED").exists());
}

#[test]
fn compare_reports_both_schemes() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(
        tmp.path(),
        "c.toml",
        "[spectral]\ncoupling_gamma = 4e-7\n[compare]\ninitial_theta = \"pi\"\ntarget_theta = 0\n[compare.feedback]\nmethod = \"master\"\n",
    );
    let out = tmp.path().join("out");
    let o = qsteer(&["compare", "--config", &cfg, "--out", out.to_str().unwrap()], None);
    assert!(o.status.success(), "{}", stderr(&o));
    let summary = fs::read_to_string(out.join("summary.txt")).unwrap();
    let lines: Vec<&str> = summary.lines().collect();
    assert_eq!(lines.len(), 2, "{summary}");
    assert!(lines[0].starts_with("open_loop t0=") && lines[0].contains("final_fidelity="), "{summary}");
    assert!(lines[1].starts_with("feedback t0=") && lines[1].contains("final_fidelity="), "{summary}");
    assert!(!summary.contains("t0=none"), "{summary}");
    assert!(out.join("open_loop.csv").exists() && out.join("feedback.csv").exists());
}

#[test]
fn declared_mode_must_match_subcommand() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "c.toml", &format!("mode = \"target\"\n{TARGET}"));
    let o = qsteer(&["decoherence", "--config", &cfg, "--out", tmp.path().join("o").to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(2));
}
