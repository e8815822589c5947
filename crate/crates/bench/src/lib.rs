//! Shared fixtures for the benchmarks.

use nsch_core::coupled::State;
use nsch_core::{Result, RunConfig, Scenario};

/// The spinodal preset resized to an `n × n` grid, with its initial state.
pub fn spinodal_fixture(n: usize) -> Result<(RunConfig, State)> {
    let mut cfg = Scenario::from_name("spinodal_64").expect("preset exists").preset();
    cfg.grid.nx = n;
    cfg.grid.ny = n;
    cfg.output_dir = None;
    cfg.validate()?;
    let state = cfg.scenario.initial_state(&cfg)?;
    Ok((cfg, state))
}
