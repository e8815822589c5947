use std::path::Path;
use std::time::Instant;

use nsch_core::config::{GridConfig, RunConfig, TimeConfig};
use nsch_core::constitutive::FluidParams;
use nsch_core::coupled::{
    read_diagnostics, read_trajectory, run, run_from_checkpoint, step_dir_name, total_energy, DiagnosticsRecord, State,
    StepConfig, Stepper, CSV_HEADER, DIAGNOSTICS_FILE,
};
use nsch_core::grid::{Bc, Grid, ScalarField, VectorField};
use nsch_core::Scenario;
use proptest::prelude::*;

fn smoke(steps: usize) -> RunConfig {
    let mut cfg = Scenario::Smoke.preset();
    cfg.time.t_end = steps as f64 * cfg.time.dt;
    cfg
}

fn read(path: &Path) -> Vec<u8> {
    std::fs::read(path).unwrap()
}

#[test]
fn energy_of_pure_and_mixed_states() {
    let g = Grid::new(16, 16, 2.0, 3.0, Bc::Physical).unwrap();
    let p = FluidParams::default().normalized();
    let pure = State::initial(VectorField::zeros(&g), ScalarField::constant(&g, 1.0), &p).unwrap();
    assert_eq!(total_energy(&pure, &p).0, 0.0);
    let mixed = State::initial(VectorField::zeros(&g), ScalarField::constant(&g, 0.0), &p).unwrap();
    let (e, parts) = total_energy(&mixed, &p);
    assert!((e - g.area() / 4.0).abs() <= 1e-14 * g.area());
    assert_eq!(parts.kinetic, 0.0);
    assert_eq!(parts.interface, 0.0);
    // Kinetic part: ρ ≡ 1 and a uniform unit x-flow in a periodic box.
    let gp = Grid::new(16, 16, 2.0, 3.0, Bc::Periodic).unwrap();
    let v = VectorField::from_fn(&gp, |_, _| 1.0, |_, _| 0.0);
    let moving = State::initial(v, ScalarField::constant(&gp, 1.0), &p).unwrap();
    assert!((total_energy(&moving, &p).1.kinetic - gp.area() / 2.0).abs() <= 1e-13);
}

#[test]
fn rest_scenario_stays_at_rest() {
    let s = run(&Scenario::Rest.preset()).unwrap();
    assert_eq!(s.steps, 10);
    assert_eq!(s.final_state.v.max_abs(), 0.0);
    assert!(s.final_state.phi.data().iter().all(|&x| x == 1.0));
    assert!(s.records.iter().all(|r| r.e_total == 0.0 && r.cont_res == 0.0));
}

#[test]
fn smoke_run_respects_invariants() {
    let start = Instant::now();
    let cfg = Scenario::Smoke.preset();
    let s = run(&cfg).unwrap();
    assert!(start.elapsed().as_secs_f64() < 5.0);
    assert_eq!(s.steps, 10);
    assert_eq!(s.records.len(), 11);
    assert!(s.max_mass_drift() <= 1e-10 * cfg.grid.area());
    assert!(s.max_energy_increase() <= 0.0);
    // Matched densities: the continuity residual is exactly zero.
    assert_eq!(s.max_continuity_residual(), 0.0);
    for r in &s.records {
        assert!((r.e_total - (r.e_kin + r.e_int + r.e_bulk)).abs() <= 1e-12 * r.e_total.abs());
        assert!(r.d_visc >= 0.0 && r.d_mix >= 0.0);
    }
    // Discrete energy law: the residual is small compared with dissipation.
    let d_max = s.records.iter().map(|r| r.d_visc + r.d_mix).fold(0.0, f64::max);
    assert!(s.max_abs_energy_residual() <= 0.1 * d_max, "{} vs {d_max}", s.max_abs_energy_residual());
    assert!(s.stats.iter().all(|st| st.picard_iterations == 1 && st.newton_iterations >= 1));
}

#[test]
fn density_contrast_conserves_mass() {
    let mut cfg = Scenario::DensityContrast.preset();
    cfg.grid = GridConfig { nx: 32, ny: 32, ..cfg.grid };
    cfg.time.t_end = 10.0 * cfg.time.dt;
    let s = run(&cfg).unwrap();
    assert!(s.max_mass_drift() <= 1e-10 * cfg.grid.area());
    let c = s.max_continuity_residual();
    assert!(c > 0.0 && c.is_finite());
    assert!(s.final_state.rho.min() > 0.0);
}

#[test]
fn zero_step_run_writes_initial_level_only() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = smoke(0);
    cfg.output_dir = Some(dir.path().to_path_buf());
    let s = run(&cfg).unwrap();
    assert_eq!((s.steps, s.records.len()), (0, 1));
    let text = std::fs::read_to_string(dir.path().join(DIAGNOSTICS_FILE)).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines, [CSV_HEADER, s.records[0].csv_row().as_str()]);
    let frames = read_trajectory(dir.path()).unwrap();
    assert_eq!(frames.len(), 1);
    assert_eq!(frames[0].phi, s.final_state.phi);
}

#[test]
fn outputs_round_trip_from_disk() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = smoke(10);
    cfg.output_dir = Some(dir.path().to_path_buf());
    let s = run(&cfg).unwrap();
    let rows = read_diagnostics(&dir.path().join(DIAGNOSTICS_FILE)).unwrap();
    assert_eq!(rows, s.records);
    let frames = read_trajectory(dir.path()).unwrap();
    assert_eq!(frames.iter().map(|f| f.step).collect::<Vec<_>>(), [0, 5, 10]);
    let last = frames.last().unwrap();
    assert_eq!(last.v, s.final_state.v);
    assert_eq!(last.pi, s.final_state.pi);
    assert_eq!(RunConfig::from_path(&dir.path().join("config.cfg")).unwrap(), RunConfig { output_dir: cfg.output_dir.clone(), ..cfg });
}

#[test]
fn restart_from_checkpoint_is_bitwise_identical() {
    let full = tempfile::tempdir().unwrap();
    let resumed = tempfile::tempdir().unwrap();
    let mut cfg = smoke(10);
    cfg.time.checkpoint_every = 4;
    cfg.output_dir = Some(full.path().to_path_buf());
    let a = run(&cfg).unwrap();
    let ck = full.path().join("checkpoints").join(step_dir_name(8));
    let b = run_from_checkpoint(&ck, Some(resumed.path())).unwrap();
    assert_eq!(b.steps, 2);
    assert_eq!(b.final_state, a.final_state);
    assert_eq!(read(&full.path().join(DIAGNOSTICS_FILE)), read(&resumed.path().join(DIAGNOSTICS_FILE)));
}

#[test]
fn repeated_runs_are_deterministic() {
    let (d1, d2) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let mut outputs = Vec::new();
    for d in [&d1, &d2] {
        let mut cfg = smoke(6);
        cfg.output_dir = Some(d.path().to_path_buf());
        run(&cfg).unwrap();
        outputs.push(read(&d.path().join(DIAGNOSTICS_FILE)));
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn missing_checkpoint_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let e = run_from_checkpoint(&dir.path().join("nope"), None).unwrap_err();
    assert!(e.is_io_error(), "{e}");
}

#[test]
fn stepper_rejects_bad_time_step() {
    let g = Grid::new(16, 16, 1.0, 1.0, Bc::Physical).unwrap();
    assert!(Stepper::new(&g, &FluidParams::default().normalized(), StepConfig::new(-0.1)).is_err());
}

#[test]
fn invalid_run_configuration_fails_before_stepping() {
    let cfg = RunConfig::with_grid_and_time(
        GridConfig { nx: 4, ny: 16, lx: 1.0, ly: 1.0, bc: Bc::Physical },
        TimeConfig { dt: 0.1, t_end: 1.0, snapshot_every: 0, checkpoint_every: 0 },
    );
    assert!(run(&cfg).unwrap_err().is_config_error());
}

#[test]
fn csv_header_lists_all_columns() {
    assert_eq!(CSV_HEADER, "t,E_total,E_kin,E_int,E_bulk,D_visc,D_mix,mass,cont_res,energy_res");
    assert!(DiagnosticsRecord::parse_csv_row("1,2,3").is_none());
    assert!(DiagnosticsRecord::parse_csv_row("1,2,3,4,5,6,7,8,9,x").is_none());
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 256, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn csv_rows_round_trip_exactly(v in proptest::collection::vec(any::<f64>().prop_filter("finite", |x| x.is_finite()), 10)) {
        let r = DiagnosticsRecord {
            t: v[0], e_total: v[1], e_kin: v[2], e_int: v[3], e_bulk: v[4],
            d_visc: v[5], d_mix: v[6], mass: v[7], cont_res: v[8], energy_res: v[9],
        };
        let back = DiagnosticsRecord::parse_csv_row(&r.csv_row()).unwrap();
        prop_assert_eq!(back, r);
    }
}
