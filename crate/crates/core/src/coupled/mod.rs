//! Lie-split time stepping of the coupled system: a Cahn–Hilliard substep
//! convected by `Ψ_ε vⁿ`, then the momentum substep with the new phase
//! fields, plus the energy, mass and continuity diagnostics.

mod diagnostics;
mod run;
mod state;

pub use diagnostics::{
    advect_scalar, continuity_residual, dissipation, dissipation_parts, kinetic_energy, mixing_dissipation,
    total_energy, DiagnosticsRecord, EnergyParts, CSV_HEADER,
};
pub use run::{
    read_diagnostics, read_trajectory, run, run_from_checkpoint, run_observed, step_dir_name, Checkpoint, Frame, RunSummary,
    CONFIG_FILE, DIAGNOSTICS_FILE,
};
pub use state::State;

use crate::ch_solver::{ChSolver, ChStepConfig};
use crate::constitutive::FluidParams;
use crate::error::Result;
use crate::grid::{EllipticSolverConfig, Grid, ScalarField, VectorField};
use crate::ns_solver::{MomentumSolver, MomentumStepConfig};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepConfig {
    pub ch: ChStepConfig,
    pub momentum: MomentumStepConfig,
    pub elliptic: EllipticSolverConfig,
}

impl StepConfig {
    /// Defaults for a given time step; the phase transport scheme is shared
    /// between both substeps.
    pub fn new(dt: f64) -> Self {
        let ch = ChStepConfig::new(dt);
        let mut momentum = MomentumStepConfig::new(dt);
        momentum.phase_scheme = ch.convection;
        StepConfig { ch, momentum, elliptic: EllipticSolverConfig::default() }
    }

    pub fn dt(&self) -> f64 {
        self.ch.dt
    }
}

/// Solver work for one step.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepStats {
    pub newton_iterations: usize,
    pub ch_linear_iterations: usize,
    pub picard_iterations: usize,
    pub momentum_linear_iterations: usize,
    pub projection_iterations: usize,
}

/// Optional manufactured forcing.
#[derive(Debug, Clone, Copy, Default)]
pub struct Forcing<'a> {
    pub phase_source: Option<&'a ScalarField>,
    pub body_force: Option<&'a VectorField>,
}

#[derive(Debug, Clone)]
pub struct Stepper {
    grid: Grid,
    params: FluidParams,
    cfg: StepConfig,
    ch: ChSolver,
    momentum: MomentumSolver,
}

impl Stepper {
    pub fn new(grid: &Grid, params: &FluidParams, cfg: StepConfig) -> Result<Self> {
        let mut cfg = cfg;
        cfg.momentum.dt = cfg.ch.dt;
        cfg.momentum.phase_scheme = cfg.ch.convection;
        Ok(Stepper {
            grid: *grid,
            params: params.clone(),
            cfg,
            ch: ChSolver::new(grid, params, cfg.ch)?,
            momentum: MomentumSolver::new(grid, params, cfg.momentum, cfg.elliptic)?,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn params(&self) -> &FluidParams {
        &self.params
    }

    pub fn config(&self) -> &StepConfig {
        &self.cfg
    }

    pub fn momentum_solver(&self) -> &MomentumSolver {
        &self.momentum
    }

    /// Diagnostics of the initial level; residual columns are zero.
    pub fn initial_record(&self, state: &State) -> DiagnosticsRecord {
        let (e, parts) = total_energy(state, &self.params);
        let (dv, dm) = dissipation_parts(state, &self.params);
        DiagnosticsRecord {
            t: state.t,
            e_total: e,
            e_kin: parts.kinetic,
            e_int: parts.interface,
            e_bulk: parts.bulk,
            d_visc: dv,
            d_mix: dm,
            mass: state.phi.integral(),
            cont_res: 0.0,
            energy_res: 0.0,
        }
    }

    pub fn step(&self, state: &State) -> Result<(State, DiagnosticsRecord)> {
        let (s, r, _) = self.step_with(state, Forcing::default())?;
        Ok((s, r))
    }

    pub fn step_with(&self, state: &State, forcing: Forcing<'_>) -> Result<(State, DiagnosticsRecord, StepStats)> {
        let dt = self.cfg.dt();
        let ctx = |e: crate::Error| e.at_step(state.step, state.t);
        let w = self.momentum.mollify(&state.v).map_err(ctx)?;
        let ch = self.ch.step(&state.phi, Some(&w), forcing.phase_source).map_err(ctx)?;
        let mo = self
            .momentum
            .step(state, &ch.phi, &ch.mu, Some(&w), forcing.body_force)
            .map_err(ctx)?;
        let next = State::assemble(state.t + dt, state.step + 1, mo.v, ch.phi, ch.mu, mo.pi, &self.params)
            .map_err(ctx)?;

        let (e0, _) = total_energy(state, &self.params);
        let (e1, parts) = total_energy(&next, &self.params);
        let (dv, dm) = dissipation_parts(&next, &self.params);
        let rec = DiagnosticsRecord {
            t: next.t,
            e_total: e1,
            e_kin: parts.kinetic,
            e_int: parts.interface,
            e_bulk: parts.bulk,
            d_visc: dv,
            d_mix: dm,
            mass: next.phi.integral(),
            cont_res: continuity_residual(state, &next, dt, &w, self.cfg.ch.convection),
            energy_res: (e1 - e0) / dt + dv + dm,
        };
        let stats = StepStats {
            newton_iterations: ch.newton_iterations,
            ch_linear_iterations: ch.linear_iterations,
            picard_iterations: mo.picard_iterations,
            momentum_linear_iterations: mo.linear_iterations,
            projection_iterations: mo.projection_iterations,
        };
        Ok((next, rec, stats))
    }
}

/// One coupled step.
pub fn step(state: &State, params: &FluidParams, cfg: &StepConfig) -> Result<(State, DiagnosticsRecord)> {
    Stepper::new(state.grid(), params, *cfg)?.step(state)
}
