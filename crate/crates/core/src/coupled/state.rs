use crate::ch_solver::chemical_potential;
use crate::constitutive::{flux_j, source_r, FluidParams};
use crate::error::{Error, Result};
use crate::grid::{Grid, ScalarField, VectorField};

/// One time level of the coupled system with its derived fields.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub t: f64,
    pub step: usize,
    pub v: VectorField,
    pub phi: ScalarField,
    pub mu: ScalarField,
    pub pi: ScalarField,
    pub rho: ScalarField,
    pub j: VectorField,
    pub r: ScalarField,
}

impl State {
    /// Initial level: `μ` from `φ`, zero pressure, cached `ρ, J, R`.
    pub fn initial(v: VectorField, phi: ScalarField, params: &FluidParams) -> Result<Self> {
        v.grid().check_same(phi.grid())?;
        let mu = chemical_potential(&phi, params);
        let pi = ScalarField::zeros(phi.grid());
        State::assemble(0.0, 0, v, phi, mu, pi, params)
    }

    pub fn assemble(
        t: f64,
        step: usize,
        v: VectorField,
        phi: ScalarField,
        mu: ScalarField,
        pi: ScalarField,
        params: &FluidParams,
    ) -> Result<Self> {
        let law = params.density_law()?;
        let rho = phi.map(|s| law.rho(s));
        if rho.min() <= 0.0 {
            return Err(Error::invalid("density", "non-positive density encountered"));
        }
        let j = flux_j(&phi, &mu, params)?;
        let r = source_r(&phi, &mu, params)?;
        Ok(State { t, step, v, phi, mu, pi, rho, j, r })
    }

    pub fn grid(&self) -> &Grid {
        self.phi.grid()
    }
}
