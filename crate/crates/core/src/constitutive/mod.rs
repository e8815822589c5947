//! Constitutive laws: free energy, density, viscous stress, the relative
//! mass flux `J` and the continuity source `R`, plus sampling validators for
//! the structural assumptions they must satisfy.

mod density;
mod potential;
mod stress;
mod validate;

pub use density::{clamp_overshoot, density, density_deriv, density_deriv2, smooth_clamp, DensityLaw};
pub use potential::{free_energy, free_energy_derivs, PotentialKind, PotentialSpec};
pub use stress::{contract, frobenius, power_factor, stress, Mat2};
pub use validate::{validate_a1, validate_a2, validate_a3, ValidationReport, Violation};

use crate::error::{Error, Result};
use crate::grid::{gradient, ScalarField, VectorField};

/// Regularisation of `|M|^{p−2}` at `M = 0` for shear-thinning fluids.
pub const DEFAULT_KAPPA: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct FluidParams {
    pub p: f64,
    pub nu1: f64,
    pub nu2: f64,
    pub rho1: f64,
    pub rho2: f64,
    pub eps0: f64,
    pub mobility: f64,
    pub alpha: f64,
    pub blend_width: f64,
    /// Coercivity constants: `S(s, M):M ≥ ω|M|^p − C₁`.
    pub omega: f64,
    pub c1: f64,
    pub kappa: f64,
    pub potential: PotentialSpec,
}

impl Default for FluidParams {
    fn default() -> Self {
        FluidParams {
            p: 2.0,
            nu1: 1.0,
            nu2: 1.0,
            rho1: 1.0,
            rho2: 1.0,
            eps0: 1.0,
            mobility: 1.0,
            alpha: 1.0,
            blend_width: 0.1,
            omega: 1.0,
            c1: 1e-6,
            kappa: DEFAULT_KAPPA,
            potential: PotentialSpec::double_well(1.0),
        }
    }
}

impl FluidParams {
    /// Sets `ω = min(ν₁, ν₂)` and keeps the potential's α in sync.
    pub fn normalized(mut self) -> Self {
        self.omega = self.nu1.min(self.nu2);
        self.potential.alpha = self.alpha;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("nu1", self.nu1),
            ("nu2", self.nu2),
            ("rho1", self.rho1),
            ("rho2", self.rho2),
            ("eps0", self.eps0),
            ("m", self.mobility),
            ("blend_width", self.blend_width),
            ("kappa", self.kappa),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(name, format!("must be positive and finite, got {v}")));
            }
        }
        if !(self.p > 1.0 && self.p.is_finite()) {
            return Err(Error::invalid("p", format!("must exceed 1, got {}", self.p)));
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(Error::invalid("alpha", format!("must be >= 0, got {}", self.alpha)));
        }
        if !(self.omega > 0.0 && self.c1 >= 0.0) {
            return Err(Error::invalid("omega", "coercivity constants must be positive"));
        }
        self.potential.validate()?;
        self.density_law()?;
        Ok(())
    }

    pub fn density_law(&self) -> Result<DensityLaw> {
        DensityLaw::new(self.rho1, self.rho2, self.blend_width)
    }

    pub fn matched_densities(&self) -> bool {
        self.rho1 == self.rho2
    }

    /// `ν(s) = ν₁(1 − χ(s))/2 + ν₂(1 + χ(s))/2`.
    pub fn viscosity(&self, s: f64) -> f64 {
        if self.nu1 == self.nu2 {
            return self.nu1;
        }
        let c = smooth_clamp(s, self.blend_width).0;
        0.5 * self.nu1 * (1.0 - c) + 0.5 * self.nu2 * (1.0 + c)
    }

    pub fn dviscosity(&self, s: f64) -> f64 {
        0.5 * (self.nu2 - self.nu1) * smooth_clamp(s, self.blend_width).1
    }

    /// `2ν(s)|M|^{p−2}` given `|M|²`.
    #[inline]
    pub fn effective_viscosity(&self, s: f64, mag_sq: f64) -> f64 {
        2.0 * self.viscosity(s) * power_factor(self.p, self.kappa, mag_sq)
    }
}

/// Face values of `ρ′(φ)` by arithmetic averaging.
fn drho_faces(phi: &ScalarField, law: &DensityLaw) -> VectorField {
    crate::grid::cell_to_faces(&phi.map(|s| law.drho(s)))
}

/// Relative mass flux `J = −m ρ′(φ) ∇μ` on faces.
pub fn flux_j(phi: &ScalarField, mu: &ScalarField, params: &FluidParams) -> Result<VectorField> {
    phi.grid().check_same(mu.grid())?;
    let law = params.density_law()?;
    let mut j = gradient(mu);
    if params.matched_densities() {
        j.scale(0.0);
        return Ok(j);
    }
    let d = drho_faces(phi, &law);
    let m = params.mobility;
    j.data_mut().iter_mut().zip(d.data()).for_each(|(g, r)| *g *= -m * r);
    Ok(j)
}

/// Continuity source `R = −m ∇ρ′(φ)·∇μ`: face products of the two
/// gradients, averaged to cells. Vanishes exactly wherever `ρ′` is locally
/// constant.
pub fn source_r(phi: &ScalarField, mu: &ScalarField, params: &FluidParams) -> Result<ScalarField> {
    phi.grid().check_same(mu.grid())?;
    let g = *phi.grid();
    let law = params.density_law()?;
    if params.matched_densities() {
        return Ok(ScalarField::zeros(&g));
    }
    let gr = gradient(&phi.map(|s| law.drho(s)));
    let gm = gradient(mu);
    let mut prod = gr.clone();
    prod.data_mut().iter_mut().zip(gm.data()).for_each(|(a, b)| *a *= b);
    let c = crate::grid::faces_to_cells(&prod);
    let m = params.mobility;
    let out: Vec<f64> = c.x.data().iter().zip(c.y.data()).map(|(a, b)| -m * (a + b)).collect();
    Ok(ScalarField::from_vec(&g, out))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn double_well_values() {
        let w = PotentialSpec::double_well(1.0);
        assert_eq!(w.f(1.0), 0.0);
        assert_eq!(w.df(1.0), 0.0);
        assert_eq!(w.f(0.0), 0.25);
        assert_eq!(w.derivs(0.0).1, -1.0);
        assert_eq!(w.f(2.0), 2.25);
        assert_eq!(w.derivs(2.0).2, 12.0);
        let poly = PotentialSpec::polynomial(vec![0.25, 0.0, -0.5, 0.0, 0.25], 1.0).unwrap();
        for s in [-3.0, -0.4, 0.0, 0.7, 2.5] {
            assert!((poly.f(s) - w.f(s)).abs() < 1e-12);
            let (a, b) = (poly.derivs(s), w.derivs(s));
            assert!((a.0 - b.0).abs() < 1e-12 && (a.1 - b.1).abs() < 1e-12 && (a.2 - b.2).abs() < 1e-12);
        }
    }

    #[test]
    fn density_examples() {
        let law = DensityLaw::new(1.0, 3.0, 0.1).unwrap();
        assert_eq!(law.rho(1.0), 3.0);
        assert_eq!(law.rho(0.0), 2.0);
        assert_eq!(law.rho(2.1), 3.0);
        assert_eq!(law.drho(2.1), 0.0);
        assert_eq!(law.drho(0.3), 1.0);
        assert_eq!(law.d2rho(-0.9), 0.0);
    }

    #[test]
    fn stress_examples() {
        let mut p = FluidParams { p: 3.0, nu1: 0.5, nu2: 0.5, ..FluidParams::default() };
        let s = stress(0.0, &[[1.0, 0.0], [0.0, -1.0]], &p).unwrap();
        let r2 = 2f64.sqrt();
        assert!((s[0][0] - r2).abs() < 1e-14 && (s[1][1] + r2).abs() < 1e-14);
        p.p = 1.8;
        assert_eq!(stress(0.3, &[[0.0; 2]; 2], &p).unwrap(), [[0.0; 2]; 2]);
        p.p = 2.0;
        let m = [[0.3, -0.2], [-0.2, 0.7]];
        let s = stress(0.1, &m, &p).unwrap();
        assert!((s[0][1] + 0.2).abs() < 1e-15);
        assert!(matches!(
            stress(0.0, &[[0.0, 1.0], [0.0, 0.0]], &p),
            Err(Error::NonSymmetric { .. })
        ));
    }
}
