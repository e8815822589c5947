//! Power-law viscous stress `S(s, M) = 2ν(s)|M|^{p−2} M`.

use super::FluidParams;
use crate::error::{Error, Result};

pub type Mat2 = [[f64; 2]; 2];

pub fn frobenius(m: &Mat2) -> f64 {
    (m[0][0] * m[0][0] + m[0][1] * m[0][1] + m[1][0] * m[1][0] + m[1][1] * m[1][1]).sqrt()
}

pub fn contract(a: &Mat2, b: &Mat2) -> f64 {
    a[0][0] * b[0][0] + a[0][1] * b[0][1] + a[1][0] * b[1][0] + a[1][1] * b[1][1]
}

/// `|M|^{p−2}` as a function of `|M|²`, regularised by `κ` when `p < 2`.
#[inline]
pub fn power_factor(p: f64, kappa: f64, mag_sq: f64) -> f64 {
    if p == 2.0 {
        1.0
    } else if p < 2.0 {
        (mag_sq + kappa * kappa).powf(0.5 * (p - 2.0))
    } else {
        mag_sq.powf(0.5 * (p - 2.0))
    }
}

/// Stress for a symmetric rate-of-strain `m` at order parameter `s`.
pub fn stress(s: f64, m: &Mat2, params: &FluidParams) -> Result<Mat2> {
    let scale = frobenius(m).max(1.0);
    if (m[0][1] - m[1][0]).abs() > 1e-12 * scale {
        return Err(Error::NonSymmetric { xy: m[0][1], yx: m[1][0] });
    }
    let mag_sq = m[0][0] * m[0][0] + 2.0 * m[0][1] * m[0][1] + m[1][1] * m[1][1];
    let eta = params.effective_viscosity(s, mag_sq);
    Ok([[eta * m[0][0], eta * m[0][1]], [eta * m[1][0], eta * m[1][1]]])
}
