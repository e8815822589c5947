//! Density as a function of the order parameter: the linear mixture law on
//! `[−1, 1]`, continued C² to the constant phase densities.

use crate::error::{Error, Result};

/// Quintic smoothstep `6t⁵ − 15t⁴ + 10t³` and its first two derivatives.
#[inline]
fn smoothstep(t: f64) -> (f64, f64, f64) {
    let t2 = t * t;
    let t3 = t2 * t;
    (
        t3 * (10.0 - 15.0 * t + 6.0 * t2),
        30.0 * t2 * (1.0 - t) * (1.0 - t),
        60.0 * t * (1.0 - t) * (1.0 - 2.0 * t),
    )
}

/// C² clamp of `s` to `[−1, 1]`: identity on `[−1, 1]`, constant `±1` beyond
/// `1 + δ`, blended by the quintic smoothstep in between. Returns
/// `(χ, χ′, χ″)`.
pub fn smooth_clamp(s: f64, delta: f64) -> (f64, f64, f64) {
    let a = s.abs();
    if a <= 1.0 {
        return (s, 1.0, 0.0);
    }
    if a >= 1.0 + delta {
        return (s.signum(), 0.0, 0.0);
    }
    let t = (a - 1.0) / delta;
    let (g, g1, g2) = smoothstep(t);
    // χ(a) = a + σ(t)(1 − a) for a > 1, odd continuation below
    let c = a + g * (1.0 - a);
    let c1 = 1.0 - g + g1 / delta * (1.0 - a);
    let c2 = -2.0 * g1 / delta + g2 / (delta * delta) * (1.0 - a);
    let sg = s.signum();
    (sg * c, c1, sg * c2)
}

/// Largest overshoot of the clamp beyond ±1, in units of the blend width:
/// `max_t t (1 − σ(t))`.
pub fn clamp_overshoot() -> f64 {
    // The maximiser solves a quintic; a fine scan is accurate to ~1e-12.
    let n = 200_000;
    (0..=n)
        .map(|k| {
            let t = k as f64 / n as f64;
            t * (1.0 - smoothstep(t).0)
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityLaw {
    pub rho1: f64,
    pub rho2: f64,
    pub blend_width: f64,
}

impl DensityLaw {
    pub fn new(rho1: f64, rho2: f64, blend_width: f64) -> Result<Self> {
        let law = DensityLaw { rho1, rho2, blend_width };
        law.validate()?;
        Ok(law)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho1 > 0.0 && self.rho2 > 0.0 && self.rho1.is_finite() && self.rho2.is_finite()) {
            return Err(Error::invalid("density", format!("phase densities must be positive, got {} and {}", self.rho1, self.rho2)));
        }
        if !(self.blend_width > 0.0 && self.blend_width.is_finite()) {
            return Err(Error::invalid("blend_width", format!("must be positive, got {}", self.blend_width)));
        }
        if !(self.lower_bound() > 0.0) {
            return Err(Error::invalid(
                "density",
                format!("blend of width {} drives density below zero", self.blend_width),
            ));
        }
        Ok(())
    }

    pub fn slope(&self) -> f64 {
        0.5 * (self.rho2 - self.rho1)
    }

    fn mid(&self) -> f64 {
        0.5 * (self.rho2 + self.rho1)
    }

    pub fn rho(&self, s: f64) -> f64 {
        self.slope() * smooth_clamp(s, self.blend_width).0 + self.mid()
    }

    pub fn drho(&self, s: f64) -> f64 {
        self.slope() * smooth_clamp(s, self.blend_width).1
    }

    pub fn d2rho(&self, s: f64) -> f64 {
        self.slope() * smooth_clamp(s, self.blend_width).2
    }

    /// Exact infimum of `ρ` over ℝ. Any C¹ continuation of the linear law
    /// with a nonzero slope must dip below the smaller phase density just
    /// outside `[−1, 1]`; for this blend the dip is
    /// `|ρ̃₂ − ρ̃₁|/2 · δ_b · max_t t(1 − σ(t))`.
    pub fn lower_bound(&self) -> f64 {
        self.rho1.min(self.rho2) - self.slope().abs() * self.blend_width * clamp_overshoot()
    }

    pub fn upper_bound(&self) -> f64 {
        self.rho1.max(self.rho2) + self.slope().abs() * self.blend_width * clamp_overshoot()
    }
}

pub fn density(phi: f64, law: &DensityLaw) -> f64 {
    law.rho(phi)
}

pub fn density_deriv(phi: f64, law: &DensityLaw) -> f64 {
    law.drho(phi)
}

pub fn density_deriv2(phi: f64, law: &DensityLaw) -> f64 {
    law.d2rho(phi)
}
