use crate::ch_solver::{ch_energy_parts, face_values, ConvectionScheme};
use crate::constitutive::FluidParams;
use crate::grid::{cell_to_faces, divergence, gradient, ScalarField, VectorField};
use crate::ns_solver::viscous_dissipation;

use super::State;

pub const CSV_HEADER: &str = "t,E_total,E_kin,E_int,E_bulk,D_visc,D_mix,mass,cont_res,energy_res";

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub e_total: f64,
    pub e_kin: f64,
    pub e_int: f64,
    pub e_bulk: f64,
    pub d_visc: f64,
    pub d_mix: f64,
    pub mass: f64,
    pub cont_res: f64,
    pub energy_res: f64,
}

impl DiagnosticsRecord {
    /// One CSV row in shortest round-trip notation.
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.t,
            self.e_total,
            self.e_kin,
            self.e_int,
            self.e_bulk,
            self.d_visc,
            self.d_mix,
            self.mass,
            self.cont_res,
            self.energy_res
        )
    }

    pub fn parse_csv_row(line: &str) -> Option<Self> {
        let v: Vec<f64> = line.split(',').map(|s| s.trim().parse().ok()).collect::<Option<_>>()?;
        if v.len() != 10 {
            return None;
        }
        Some(DiagnosticsRecord {
            t: v[0],
            e_total: v[1],
            e_kin: v[2],
            e_int: v[3],
            e_bulk: v[4],
            d_visc: v[5],
            d_mix: v[6],
            mass: v[7],
            cont_res: v[8],
            energy_res: v[9],
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyParts {
    pub kinetic: f64,
    pub interface: f64,
    pub bulk: f64,
}

pub fn kinetic_energy(rho: &ScalarField, v: &VectorField) -> f64 {
    let rho_f = cell_to_faces(rho);
    0.5 * rho_f.data().iter().zip(v.data()).map(|(r, u)| r * u * u).sum::<f64>() * v.grid().cell_area()
}

/// `∫ρ|v|²/2 + ∫(ε₀|∇φ|²/2 + f(φ)/ε₀)`, returned with its parts.
pub fn total_energy(state: &State, params: &FluidParams) -> (f64, EnergyParts) {
    let kinetic = kinetic_energy(&state.rho, &state.v);
    let (interface, bulk) = ch_energy_parts(&state.phi, params);
    (kinetic + interface + bulk, EnergyParts { kinetic, interface, bulk })
}

/// `m ∫|∇μ|²`.
pub fn mixing_dissipation(mu: &ScalarField, params: &FluidParams) -> f64 {
    let g = gradient(mu);
    params.mobility * g.data().iter().map(|x| x * x).sum::<f64>() * mu.grid().cell_area()
}

/// `(∫S:Dv, m∫|∇μ|²)`.
pub fn dissipation_parts(state: &State, params: &FluidParams) -> (f64, f64) {
    (viscous_dissipation(&state.phi, &state.v, params), mixing_dissipation(&state.mu, params))
}

pub fn dissipation(state: &State, params: &FluidParams) -> f64 {
    let (a, b) = dissipation_parts(state, params);
    a + b
}

/// Transport `w·∇ρ` in the face-difference form `Σ ±w_f (ρ_f − ρ_c)/h`,
/// with the same face reconstruction as the phase transport. Vanishes
/// exactly for constant ρ.
pub fn advect_scalar(rho: &ScalarField, w: &VectorField, scheme: ConvectionScheme) -> ScalarField {
    let g = *rho.grid();
    let rf = face_values(rho, w, scheme);
    let (nx, ny, nux) = (g.nx, g.ny, g.nux());
    let mut out = ScalarField::zeros(&g);
    for j in 0..ny {
        let jt = if g.periodic() { (j + 1) % ny } else { j + 1 };
        for i in 0..nx {
            let ir = if g.periodic() { (i + 1) % nx } else { i + 1 };
            let c = rho.get(i, j);
            let (kl, kr) = (j * nux + i, j * nux + ir);
            let (kb, kt) = (j * nx + i, jt * nx + i);
            let val = (w.u()[kr] * (rf.u()[kr] - c) - w.u()[kl] * (rf.u()[kl] - c)) / g.dx
                + (w.v()[kt] * (rf.v()[kt] - c) - w.v()[kb] * (rf.v()[kb] - c)) / g.dy;
            out.set(i, j, val);
        }
    }
    out
}

/// Discrete L² norm of `(ρ_next − ρ_n)/dt + w·∇ρ_n + div J_next − R_next`.
pub fn continuity_residual(
    state_n: &State,
    state_next: &State,
    dt: f64,
    w: &VectorField,
    scheme: ConvectionScheme,
) -> f64 {
    let adv = advect_scalar(&state_n.rho, w, scheme);
    let divj = divergence(&state_next.j);
    let g = *state_n.grid();
    let mut out = ScalarField::zeros(&g);
    for k in 0..g.n_cells() {
        out.data_mut()[k] = (state_next.rho.data()[k] - state_n.rho.data()[k]) / dt + adv.data()[k]
            + divj.data()[k]
            - state_next.r.data()[k];
    }
    out.norm_l2()
}
