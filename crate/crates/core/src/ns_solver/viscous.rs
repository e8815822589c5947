//! Frozen-coefficient viscous operator `A_η v = −div(η D v)` and the
//! matching dissipation quadrature.

use crate::constitutive::FluidParams;
use crate::grid::{cells_to_nodes, stress_divergence, Grid, ScalarField, StrainRate, VectorField};

/// Effective viscosity `η = 2ν(φ)|Dv|^{p−2}` on cell centres (normal
/// stresses) and nodes (shear stress).
#[derive(Debug, Clone)]
pub struct ViscousOperator {
    grid: Grid,
    pub eta_cells: Vec<f64>,
    pub eta_nodes: Vec<f64>,
}

/// Order parameter at cells and nodes, reused across Picard sweeps.
#[derive(Debug, Clone)]
pub struct PhaseSamples {
    pub cells: Vec<f64>,
    pub nodes: Vec<f64>,
}

impl PhaseSamples {
    pub fn new(phi: &ScalarField) -> Self {
        PhaseSamples { cells: phi.data().to_vec(), nodes: cells_to_nodes(phi).data().to_vec() }
    }
}

impl ViscousOperator {
    pub fn new(phase: &PhaseSamples, v: &VectorField, params: &FluidParams) -> Self {
        let g = *v.grid();
        let d = StrainRate::of(v);
        let newtonian = params.p == 2.0;
        let xy_c = if newtonian { Vec::new() } else { d.dxy_at_cells() };
        let eta_cells = (0..g.n_cells())
            .map(|k| {
                let s = phase.cells[k];
                if newtonian {
                    2.0 * params.viscosity(s)
                } else {
                    let m2 = d.dxx[k].powi(2) + d.dyy[k].powi(2) + 2.0 * xy_c[k].powi(2);
                    params.effective_viscosity(s, m2)
                }
            })
            .collect();
        let nsq = if newtonian { Vec::new() } else { d.normal_sq_at_nodes() };
        let eta_nodes = (0..d.dxy.len())
            .map(|k| {
                let s = phase.nodes[k];
                if newtonian {
                    2.0 * params.viscosity(s)
                } else {
                    params.effective_viscosity(s, nsq[k] + 2.0 * d.dxy[k].powi(2))
                }
            })
            .collect();
        ViscousOperator { grid: g, eta_cells, eta_nodes }
    }

    /// Stress components `η D v` on the strain-rate locations.
    pub fn stress(&self, v: &VectorField) -> (Vec<f64>, Vec<f64>, Vec<f64>, StrainRate) {
        let d = StrainRate::of(v);
        let sxx = d.dxx.iter().zip(&self.eta_cells).map(|(a, e)| a * e).collect();
        let syy = d.dyy.iter().zip(&self.eta_cells).map(|(a, e)| a * e).collect();
        let sxy = d.dxy.iter().zip(&self.eta_nodes).map(|(a, e)| a * e).collect();
        (sxx, syy, sxy, d)
    }

    /// `−div(η D v)`.
    pub fn apply(&self, v: &VectorField) -> VectorField {
        let (sxx, syy, sxy, _) = self.stress(v);
        let mut out = stress_divergence(&self.grid, &sxx, &syy, &sxy);
        out.scale(-1.0);
        out
    }

    /// `⟨η D v, D v⟩` in the operator's own quadrature, so that
    /// `⟨A_η v, v⟩` equals it to rounding.
    pub fn dissipation(&self, v: &VectorField) -> f64 {
        let (sxx, syy, sxy, d) = self.stress(v);
        d.pair(&sxx, &syy, &sxy)
    }

    pub fn mean_eta(&self) -> f64 {
        self.eta_cells.iter().sum::<f64>() / self.eta_cells.len() as f64
    }
}

/// `∫ S(φ, Dv) : Dv` with the stress evaluated at `v` itself.
pub fn viscous_dissipation(phi: &ScalarField, v: &VectorField, params: &FluidParams) -> f64 {
    ViscousOperator::new(&PhaseSamples::new(phi), v, params).dissipation(v)
}
