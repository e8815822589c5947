use std::path::Path;

use nsch_core::config::{GridConfig, RunConfig, TimeConfig};
use nsch_core::grid::{Bc, EllipticMethod};
use nsch_core::{parse_config, Error, Scenario};
use proptest::prelude::*;

const MINIMAL: &str = "[grid]\nnx = 16\nny = 24\n\n[time]\ndt = 0.01\nT = 0.1\n";

fn parse(text: &str) -> nsch_core::Result<RunConfig> {
    RunConfig::parse_str(text, Path::new("test.cfg"))
}

#[test]
fn minimal_file_gets_defaults() {
    let c = parse(MINIMAL).unwrap();
    assert_eq!((c.grid.nx, c.grid.ny), (16, 24));
    assert_eq!(c.grid.bc, Bc::Physical);
    assert_eq!((c.params.eps0, c.params.mobility, c.params.p), (1.0, 1.0, 2.0));
    assert_eq!(c.eps_mollifier, 0.0);
    assert_eq!(c.time.steps(), 10);
    assert_eq!(c.scenario, Scenario::Spinodal);
    assert!(c.output_dir.is_none());
    c.validate().unwrap();
}

#[test]
fn presets_round_trip_through_text() {
    for s in Scenario::ALL {
        let mut c = s.preset();
        c.validate().unwrap();
        c.output_dir = Some("out/dir".into());
        c.tolerances.elliptic_method = EllipticMethod::ConjugateGradient;
        let text = c.to_config_string();
        let back = parse(&text).unwrap();
        assert_eq!(back, c, "{}", s.name());
        assert_eq!(back.to_config_string(), text);
    }
}

#[test]
fn p_at_most_one_is_rejected() {
    let e = parse(&format!("{MINIMAL}[params]\np = 0.5\n")).unwrap_err();
    assert!(e.is_config_error());
    assert!(e.to_string().contains("p > 1"), "{e}");
}

#[test]
fn duplicate_key_reports_both_lines() {
    let e = parse("[grid]\nnx = 16\nny = 16\nnx = 32\n[time]\ndt = 0.1\nT = 1\n").unwrap_err();
    let msg = e.to_string();
    assert!(matches!(e, Error::Parse { line: 4, .. }));
    assert!(msg.contains("lines 2 and 4"), "{msg}");
}

#[test]
fn unknown_keys_and_sections_are_rejected() {
    for text in [
        format!("{MINIMAL}[params]\nviscosity = 1\n"),
        format!("{MINIMAL}[solver]\n"),
        "nx = 3\n".to_string(),
        format!("{MINIMAL}[params]\np 2\n"),
        format!("{MINIMAL}[params]\np = two\n"),
    ] {
        let e = parse(&text).unwrap_err();
        assert!(matches!(e, Error::Parse { .. }), "{text}: {e}");
    }
}

#[test]
fn missing_required_keys_are_named() {
    let e = parse("[grid]\nnx = 16\n[time]\ndt = 0.1\nT = 1\n").unwrap_err();
    assert!(e.to_string().contains("grid.ny"), "{e}");
    let e = parse("[grid]\nnx = 16\nny = 16\n").unwrap_err();
    assert!(e.to_string().contains("[time]"), "{e}");
}

#[test]
fn comments_and_blank_lines_are_ignored() {
    let text = "# header\n[grid]  # c\nnx = 16 # cells\n\nny = 16\nbc = periodic\n[time]\ndt = 0.5e-2\nT = 0.1\n";
    let c = parse(text).unwrap();
    assert_eq!(c.grid.bc, Bc::Periodic);
    assert_eq!(c.time.dt, 0.005);
}

#[test]
fn validation_catches_bad_values() {
    let base = |edit: &dyn Fn(&mut RunConfig)| {
        let mut c = RunConfig::with_grid_and_time(
            GridConfig { nx: 16, ny: 16, lx: 1.0, ly: 1.0, bc: Bc::Physical },
            TimeConfig { dt: 0.01, t_end: 0.1, snapshot_every: 0, checkpoint_every: 0 },
        );
        edit(&mut c);
        c.validate()
    };
    assert!(base(&|_| {}).is_ok());
    assert!(base(&|c| c.time.dt = 0.0).is_err());
    assert!(base(&|c| c.params.eps0 = -1.0).is_err());
    assert!(base(&|c| c.eps_mollifier = -0.1).is_err());
    assert!(base(&|c| c.grid.ny = 7).is_err());
    assert!(base(&|c| c.tolerances.picard_relaxation = 1.5).is_err());
}

#[test]
fn reading_a_missing_file_is_an_io_error() {
    let e = parse_config(Path::new("/nonexistent/run.cfg")).unwrap_err();
    assert!(e.is_io_error());
}

#[test]
fn defaults_help_lists_optional_keys() {
    let h = RunConfig::defaults_help();
    for key in ["eps_mollifier", "picard_tol", "scenario", "capillary"] {
        assert!(h.contains(key), "{key}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn numeric_fields_round_trip(p in 1.01..5.0f64, nu in 1e-3..1e3f64, dt in 1e-6..1.0f64, eps in 0.0..1.0f64, seed in any::<u64>()) {
        let mut c = Scenario::Smoke.preset();
        c.params.p = p;
        c.params.nu2 = nu;
        c.params = c.params.normalized();
        c.time.dt = dt;
        c.eps_mollifier = eps;
        c.seed = seed;
        let back = parse(&c.to_config_string()).unwrap();
        prop_assert_eq!(back, c);
    }
}
