use std::fs;
use std::path::{Path, PathBuf};

use nsch_cli::{main_with, EXIT_CONFIG, EXIT_IO, EXIT_OK};
use nsch_core::coupled::{read_diagnostics, CSV_HEADER, DIAGNOSTICS_FILE};
use nsch_core::{RunConfig, Scenario};

fn invoke(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut full = vec!["nsch"];
    full.extend_from_slice(args);
    let code = main_with(full, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn write_config(dir: &Path, cfg: &RunConfig) -> PathBuf {
    let p = dir.join("run.cfg");
    fs::write(&p, cfg.to_config_string()).unwrap();
    p
}

fn smoke(steps: usize, snapshot_every: usize) -> RunConfig {
    let mut cfg = Scenario::Smoke.preset();
    cfg.time.t_end = steps as f64 * cfg.time.dt;
    cfg.time.snapshot_every = snapshot_every;
    cfg
}

#[test]
fn validate_default_configuration_is_green() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &Scenario::Spinodal.preset());
    let (code, out, err) = invoke(&["validate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK, "{out}\n{err}");
    assert!(out.contains("alpha=1"), "{out}");
    assert!(out.contains("overall.passed=true"));
    assert!(out.contains("poisson_residual"));
    assert!(!out.contains("FAIL"));
}

#[test]
fn validate_flags_violated_assumption() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = Scenario::Spinodal.preset();
    cfg.params.alpha = 0.5;
    let path = write_config(dir.path(), &cfg);
    let (code, out, _) = invoke(&["validate", "--config", path.to_str().unwrap()]);
    assert_eq!(code, EXIT_CONFIG, "{out}");
    assert!(out.contains("overall.passed=false"));
}

#[test]
fn run_smoke_writes_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &smoke(10, 5));
    let out_dir = dir.path().join("out");
    let (code, out, err) = invoke(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--output-dir",
        out_dir.to_str().unwrap(),
        "--threads",
        "2",
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert!(out.contains("steps = 10"), "{out}");
    let csv = fs::read_to_string(out_dir.join(DIAGNOSTICS_FILE)).unwrap();
    assert_eq!(csv.lines().next().unwrap(), CSV_HEADER);
    assert_eq!(read_diagnostics(&out_dir.join(DIAGNOSTICS_FILE)).unwrap().len(), 11);
}

#[test]
fn thread_count_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = smoke(4, 0);
    let a = nsch_cli::cmd_run(&cfg, &nsch_cli::RunOptions { output_dir: dir.path().join("a"), threads: Some(1), ..Default::default() }).unwrap();
    let b = nsch_cli::cmd_run(&cfg, &nsch_cli::RunOptions { output_dir: dir.path().join("b"), threads: Some(3), ..Default::default() }).unwrap();
    assert_eq!(a.final_state.phi, b.final_state.phi);
    assert_eq!(a.final_state.v, b.final_state.v);
}

#[test]
fn analyze_pressure_on_short_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &smoke(10, 1));
    let out_dir = dir.path().join("out");
    let (code, _, err) = invoke(&["run", "--config", cfg.to_str().unwrap(), "--output-dir", out_dir.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK, "{err}");
    let (code, out, err) = invoke(&["analyze", "--input", out_dir.to_str().unwrap(), "--mode", "pressure"]);
    assert_eq!(code, EXIT_OK, "{err}");
    let line = out.lines().find(|l| l.trim_start().starts_with("poisson_residual")).expect(&out);
    let value: f64 = line.split(['=', ':']).nth(1).unwrap().trim().parse().unwrap();
    assert!(value <= 1e-8, "{out}");
}

#[test]
fn analyze_truncation_reports_every_level() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &smoke(4, 2));
    let out_dir = dir.path().join("out");
    assert_eq!(invoke(&["run", "--config", cfg.to_str().unwrap(), "--output-dir", out_dir.to_str().unwrap()]).0, EXIT_OK);
    let (code, out, err) = invoke(&["analyze", "--input", out_dir.to_str().unwrap(), "--mode", "truncation"]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert!(out.contains("frames = 3"), "{out}");
    assert!(out.contains("max_measured_c"));
}

#[test]
fn bad_configuration_exits_with_config_code() {
    let dir = tempfile::tempdir().unwrap();
    let text = Scenario::Smoke.preset().to_config_string().replace("p = 2.0", "p = 0.5");
    let p = dir.path().join("bad.cfg");
    fs::write(&p, text).unwrap();
    let (code, _, err) = invoke(&["validate", "--config", p.to_str().unwrap()]);
    assert_eq!(code, EXIT_CONFIG, "{err}");
    assert!(err.contains("error[config]"));
}

#[test]
fn missing_input_exits_with_io_code() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope");
    let (code, _, err) = invoke(&["analyze", "--input", missing.to_str().unwrap(), "--mode", "pressure"]);
    assert_eq!(code, EXIT_IO, "{err}");
    let (code, _, _) = invoke(&["run", "--config", missing.to_str().unwrap(), "--output-dir", "x"]);
    assert_eq!(code, EXIT_IO);
}

#[test]
fn unknown_arguments_are_usage_errors() {
    assert_eq!(invoke(&["frobnicate"]).0, EXIT_CONFIG);
    assert_eq!(invoke(&["analyze", "--input", "x", "--mode", "bogus"]).0, EXIT_CONFIG);
    assert_eq!(invoke(&["--help"]).0, EXIT_OK);
}

#[test]
fn preset_round_trips_through_the_parser() {
    for s in Scenario::ALL {
        let (code, out, _) = invoke(&["preset", s.name()]);
        assert_eq!(code, EXIT_OK);
        assert_eq!(RunConfig::parse_str(&out, Path::new("preset")).unwrap(), s.preset());
    }
    assert_eq!(invoke(&["preset", "nope"]).0, EXIT_CONFIG);
}
