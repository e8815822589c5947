//! Free-energy density `f` and its convex split `f = f₀ − α s²/2`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialKind {
    /// `(s² − 1)² / 4`.
    DoubleWell,
    /// User polynomial `Σ c_k s^k`.
    Polynomial,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PotentialSpec {
    pub kind: PotentialKind,
    /// Monomial coefficients, lowest degree first.
    pub coeffs: Vec<f64>,
    /// Convexity defect: `f″ ≥ −α`.
    pub alpha: f64,
}

impl Default for PotentialSpec {
    fn default() -> Self {
        PotentialSpec::double_well(1.0)
    }
}

fn horner(c: &[f64], s: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * s + a)
}

fn derivative(c: &[f64]) -> Vec<f64> {
    c.iter().enumerate().skip(1).map(|(k, &a)| k as f64 * a).collect()
}

impl PotentialSpec {
    pub fn double_well(alpha: f64) -> Self {
        PotentialSpec { kind: PotentialKind::DoubleWell, coeffs: vec![0.25, 0.0, -0.5, 0.0, 0.25], alpha }
    }

    pub fn polynomial(coeffs: Vec<f64>, alpha: f64) -> Result<Self> {
        let spec = PotentialSpec { kind: PotentialKind::Polynomial, coeffs, alpha };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.coeffs.is_empty() || self.coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("potential", "coefficients must be finite and non-empty"));
        }
        if !(self.alpha >= 0.0) {
            return Err(Error::invalid("alpha", format!("must be >= 0, got {}", self.alpha)));
        }
        Ok(())
    }

    pub fn f(&self, s: f64) -> f64 {
        match self.kind {
            PotentialKind::DoubleWell => {
                let a = s * s - 1.0;
                0.25 * a * a
            }
            PotentialKind::Polynomial => horner(&self.coeffs, s),
        }
    }

    /// `(f′, f″, f‴)`.
    pub fn derivs(&self, s: f64) -> (f64, f64, f64) {
        match self.kind {
            PotentialKind::DoubleWell => (s * s * s - s, 3.0 * s * s - 1.0, 6.0 * s),
            PotentialKind::Polynomial => {
                let d1 = derivative(&self.coeffs);
                let d2 = derivative(&d1);
                let d3 = derivative(&d2);
                (horner(&d1, s), horner(&d2, s), horner(&d3, s))
            }
        }
    }

    pub fn df(&self, s: f64) -> f64 {
        match self.kind {
            PotentialKind::DoubleWell => s * s * s - s,
            PotentialKind::Polynomial => self.derivs(s).0,
        }
    }

    /// Convex part `f₀′(s) = f′(s) + α s`.
    pub fn df0(&self, s: f64) -> f64 {
        self.df(s) + self.alpha * s
    }

    pub fn d2f0(&self, s: f64) -> f64 {
        self.derivs(s).1 + self.alpha
    }
}

pub fn free_energy(s: f64, spec: &PotentialSpec) -> f64 {
    spec.f(s)
}

pub fn free_energy_derivs(s: f64, spec: &PotentialSpec) -> (f64, f64, f64) {
    spec.derivs(s)
}
