//! Named scenarios: a preset configuration plus an initial-condition
//! family that adapts to whatever grid the configuration selects.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{GridConfig, RunConfig, TimeConfig};
use crate::constitutive::FluidParams;
use crate::coupled::State;
use crate::error::{Error, Result};
use crate::grid::{curl_of_nodes, Bc, Grid, NodeField, ScalarField, VectorField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scenario {
    /// Quiescent mixture perturbed by seeded low modes.
    Spinodal,
    /// Circular drop in a periodic shear flow of a shear-thinning pair.
    ShearPowerlaw,
    /// Mixture with `ρ̃₂ = 3ρ̃₁` stirred by a wall-bounded vortex.
    DensityContrast,
    /// Small spinodal run for quick checks.
    Smoke,
    /// `φ ≡ 1`, `v ≡ 0`.
    Rest,
}

impl Scenario {
    pub const ALL: [Scenario; 5] = [
        Scenario::Spinodal,
        Scenario::ShearPowerlaw,
        Scenario::DensityContrast,
        Scenario::Smoke,
        Scenario::Rest,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Spinodal => "spinodal_64",
            Scenario::ShearPowerlaw => "shear_powerlaw",
            Scenario::DensityContrast => "density_contrast",
            Scenario::Smoke => "smoke",
            Scenario::Rest => "rest",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Scenario::ALL.into_iter().find(|s| s.name() == name)
    }

    /// Complete, validated configuration for this scenario.
    pub fn preset(self) -> RunConfig {
        let grid = |n: usize, l: f64, bc: Bc| GridConfig { nx: n, ny: n, lx: l, ly: l, bc };
        let time = |dt: f64, t_end: f64, snap: usize| TimeConfig {
            dt,
            t_end,
            snapshot_every: snap,
            checkpoint_every: 0,
        };
        let mut cfg = match self {
            Scenario::Spinodal => RunConfig::with_grid_and_time(grid(64, 16.0, Bc::Physical), time(1e-3, 1.0, 100)),
            Scenario::ShearPowerlaw => {
                let mut c = RunConfig::with_grid_and_time(grid(64, 16.0, Bc::Periodic), time(1e-3, 0.5, 50));
                c.params = FluidParams { p: 1.5, nu1: 1.0, nu2: 2.0, ..c.params }.normalized();
                c
            }
            Scenario::DensityContrast => {
                let mut c = RunConfig::with_grid_and_time(grid(64, 16.0, Bc::Physical), time(1e-3, 0.1, 10));
                c.params = FluidParams { rho1: 1.0, rho2: 3.0, ..c.params }.normalized();
                c
            }
            Scenario::Smoke => RunConfig::with_grid_and_time(grid(32, 8.0, Bc::Physical), time(1e-3, 0.01, 5)),
            Scenario::Rest => RunConfig::with_grid_and_time(grid(16, 1.0, Bc::Physical), time(1e-2, 0.1, 0)),
        };
        cfg.scenario = self;
        cfg
    }

    pub fn initial_state(self, cfg: &RunConfig) -> Result<State> {
        let g = cfg.grid.build()?;
        let (phi, v) = match self {
            Scenario::Spinodal | Scenario::Smoke => (low_mode_noise(&g, 0.0, 0.6, 6, cfg.seed), VectorField::zeros(&g)),
            Scenario::ShearPowerlaw => {
                let (lx, ly) = (g.lx(), g.ly());
                let w = std::f64::consts::SQRT_2 * cfg.params.eps0;
                let phi = ScalarField::from_fn(&g, |x, y| {
                    let r = ((x - 0.5 * lx).powi(2) + (y - 0.5 * ly).powi(2)).sqrt();
                    -((r - 0.25 * lx.min(ly)) / w).tanh()
                });
                let v = VectorField::from_fn(&g, |_, y| (2.0 * PI * y / ly).sin(), |_, _| 0.0);
                (phi, v)
            }
            Scenario::DensityContrast => {
                let (lx, ly) = (g.lx(), g.ly());
                // Peaks reach into the density blend zone beyond ±1.
                let phi = low_mode_noise(&g, 0.0, 1.08, 4, cfg.seed);
                let psi = NodeField::from_fn(&g, |x, y| {
                    let s = (PI * x / lx).sin() * (PI * y / ly).sin();
                    s * s
                });
                (phi, curl_of_nodes(&psi)?)
            }
            Scenario::Rest => (ScalarField::constant(&g, 1.0), VectorField::zeros(&g)),
        };
        State::initial(v, phi, &cfg.params)
    }
}

/// `mean + amp·g/max|g|` with `g` a random combination of the lowest
/// boundary-compatible modes, `0 ≤ k, l ≤ kmax` (not both zero).
pub fn low_mode_noise(g: &Grid, mean: f64, amp: f64, kmax: usize, seed: u64) -> ScalarField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lx, ly) = (g.lx(), g.ly());
    let mut modes = Vec::new();
    for k in 0..=kmax {
        for l in 0..=kmax {
            if k + l == 0 {
                continue;
            }
            let c: f64 = rng.gen_range(-1.0..1.0);
            let (px, py): (f64, f64) = (rng.gen_range(0.0..2.0 * PI), rng.gen_range(0.0..2.0 * PI));
            modes.push((k as f64, l as f64, c, px, py));
        }
    }
    let periodic = g.bc == Bc::Periodic;
    let mut f = ScalarField::from_fn(g, |x, y| {
        modes
            .iter()
            .map(|&(k, l, c, px, py)| {
                if periodic {
                    c * (2.0 * PI * k * x / lx + px).cos() * (2.0 * PI * l * y / ly + py).cos()
                } else {
                    c * (PI * k * x / lx).cos() * (PI * l * y / ly).cos()
                }
            })
            .sum()
    });
    f.subtract_mean();
    let m = f.max_abs();
    if m > 0.0 {
        f.scale(amp / m);
    }
    f.map(|s| s + mean)
}

impl std::str::FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::from_name(s).ok_or_else(|| Error::Config {
            key: "run.scenario".into(),
            message: format!(
                "unknown scenario `{s}` (expected one of: {})",
                Scenario::ALL.map(|s| s.name()).join(", ")
            ),
        })
    }
}
