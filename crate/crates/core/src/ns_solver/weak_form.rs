//! Residual of the integrated-by-parts momentum balance along a discrete
//! trajectory, tested against divergence-free fields that vanish at the
//! final time.

use super::viscous::{PhaseSamples, ViscousOperator};
use crate::constitutive::FluidParams;
use crate::coupled::State;
use crate::error::{Error, Result};
use crate::grid::{
    cell_to_faces, curl_of_nodes, divergence, faces_to_cells, gradient, velocity_gradient, NodeField, StrainRate,
    VectorField,
};

/// `η(t, x) = θ(t, T) η₀(x)` with `div η₀ = 0` and `θ(T, T) = 0`.
#[derive(Debug, Clone)]
pub struct WeakTestField {
    pub spatial: VectorField,
    pub theta: fn(f64, f64) -> f64,
}

fn linear_decay(t: f64, t_end: f64) -> f64 {
    1.0 - t / t_end
}

impl WeakTestField {
    pub fn new(spatial: VectorField, theta: fn(f64, f64) -> f64) -> Result<Self> {
        let div = divergence(&spatial).norm_l2();
        if div > 1e-8 {
            return Err(Error::invalid("test field", format!("divergence {div:e} exceeds 1e-8")));
        }
        Ok(WeakTestField { spatial, theta })
    }

    /// Curl of a node streamfunction with `θ = 1 − t/T`.
    pub fn from_streamfunction(psi: &NodeField) -> Result<Self> {
        WeakTestField::new(curl_of_nodes(psi)?, linear_decay)
    }
}

fn cell_dot_grad(a: &[f64; 2], b: &[f64; 2], gradeta: &[[f64; 2]; 2]) -> f64 {
    // Σ_ij a_i b_j ∂_j η_i
    a[0] * (b[0] * gradeta[0][0] + b[1] * gradeta[0][1]) + a[1] * (b[0] * gradeta[1][0] + b[1] * gradeta[1][1])
}

/// Largest absolute weak-form residual over the test fields. The time
/// integrals use the right end point of each step.
pub fn weak_form_residual(traj: &[State], params: &FluidParams, test_fields: &[WeakTestField]) -> Result<f64> {
    if traj.len() < 2 {
        return Err(Error::invalid("trajectory", "need at least two time levels"));
    }
    let g = *traj[0].grid();
    let t_end = traj.last().expect("non-empty").t - traj[0].t;
    let t0 = traj[0].t;
    let area = g.cell_area();
    let mut worst: f64 = 0.0;
    for tf in test_fields {
        g.check_same(tf.spatial.grid())?;
        if (tf.theta)(t_end, t_end).abs() > 1e-14 {
            return Err(Error::invalid("test field", "time profile must vanish at the final time"));
        }
        let eta0 = &tf.spatial;
        let grad_eta = velocity_gradient(eta0);
        let d_eta = StrainRate::of(eta0);
        let theta = |t: f64| (tf.theta)(t - t0, t_end);

        // −∫ρ₀v₀·η(0)
        let s0 = &traj[0];
        let mut res = -theta(s0.t) * cell_to_faces(&s0.rho).mul(&s0.v).dot(eta0);
        for w in traj.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            let dt = b.t - a.t;
            let (ta, tb) = (theta(a.t), theta(b.t));
            let rho_f = cell_to_faces(&b.rho);
            // −∫ρv·∂_tη
            res -= (tb - ta) * rho_f.mul(&b.v).dot(eta0);

            let vc = faces_to_cells(&b.v);
            let jc = faces_to_cells(&b.j);
            let gphi = faces_to_cells(&gradient(&b.phi));
            let mut conv = 0.0;
            let mut src = 0.0;
            let mut cap = 0.0;
            for k in 0..g.n_cells() {
                let v = [vc.x.data()[k], vc.y.data()[k]];
                let rho = b.rho.data()[k];
                let f = [rho * v[0] + jc.x.data()[k], rho * v[1] + jc.y.data()[k]];
                let ge = [[grad_eta.xx[k], grad_eta.xy[k]], [grad_eta.yx[k], grad_eta.yy[k]]];
                conv += cell_dot_grad(&v, &f, &ge);
                let ec = eta_cell(eta0, k);
                src += 0.5 * b.r.data()[k] * (v[0] * ec[0] + v[1] * ec[1]);
                let gp = [gphi.x.data()[k], gphi.y.data()[k]];
                cap += cell_dot_grad(&gp, &gp, &ge);
            }
            let visc = ViscousOperator::new(&PhaseSamples::new(&b.phi), &b.v, params);
            let (sxx, syy, sxy, _) = visc.stress(&b.v);
            let stress = d_eta.pair(&sxx, &syy, &sxy);
            res += dt * tb * (-(conv + src) * area + stress - params.eps0 * cap * area);
        }
        worst = worst.max(res.abs());
    }
    Ok(worst)
}

fn eta_cell(eta: &VectorField, k: usize) -> [f64; 2] {
    let g = eta.grid();
    let (i, j) = (k % g.nx, k / g.nx);
    let nux = g.nux();
    let ir = if g.periodic() { (i + 1) % g.nx } else { i + 1 };
    let jt = if g.periodic() { (j + 1) % g.ny } else { j + 1 };
    [
        0.5 * (eta.u()[j * nux + i] + eta.u()[j * nux + ir]),
        0.5 * (eta.v()[j * g.nx + i] + eta.v()[jt * g.nx + i]),
    ]
}
