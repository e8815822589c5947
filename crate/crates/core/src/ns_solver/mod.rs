//! Momentum substep of the variable-density power-law system
//!
//! ```text
//! ρ v_t + (ρ w + J)·∇v + R v/2 − div S(φ, Dv) + ∇π = μ∇φ,   div v = 0
//! ```
//!
//! with `w = Ψ_ε v` the mollified transporting velocity. Density and the
//! fluxes are frozen at the new order parameter, transport is explicit, the
//! stress implicit with Picard iteration on its coefficient, and the
//! pressure comes from a density-weighted projection.

mod convection;
mod viscous;
mod weak_form;

pub use convection::{advective, conservative};
pub use viscous::{viscous_dissipation, PhaseSamples, ViscousOperator};
pub use weak_form::{weak_form_residual, WeakTestField};

use crate::ch_solver::{face_values, ConvectionScheme};
use crate::constitutive::{flux_j, source_r, DensityLaw, FluidParams};
use crate::coupled::State;
use crate::error::{Error, Result};
use crate::grid::{
    cell_to_faces, gradient, pcg, CgOptions, EllipticSolverConfig, FastDiag, Grid, Projector, ScalarField,
    VectorField,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvectionForm {
    Advective,
    Conservative,
}

/// Discretisation of the capillary force. Both differ from `μ∇φ` by a
/// gradient that the pressure absorbs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CapillaryForm {
    /// `μ̄_f ∇_hφ`.
    MuGradPhi,
    /// `−φ_f ∇_hμ` with φ_f the face reconstruction of the phase transport,
    /// which makes the discrete capillary work cancel the transport term of
    /// the free energy exactly.
    PhiGradMu,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentumStepConfig {
    pub dt: f64,
    pub picard_tol: f64,
    pub max_picard_iter: usize,
    /// Under-relaxation of Picard updates (1 = plain Picard).
    pub relaxation: f64,
    /// Anderson acceleration depth for the Picard iteration (0 = off).
    pub anderson_depth: usize,
    pub convection_form: ConvectionForm,
    pub capillary: CapillaryForm,
    /// Face reconstruction used by the phase transport (for `PhiGradMu`).
    pub phase_scheme: ConvectionScheme,
    /// Mollifier parameter ε of `Ψ_ε`.
    pub eps: f64,
    pub linear_tol: f64,
    pub max_linear_iter: usize,
}

impl MomentumStepConfig {
    pub fn new(dt: f64) -> Self {
        MomentumStepConfig {
            dt,
            picard_tol: 1e-8,
            max_picard_iter: 50,
            relaxation: 1.0,
            anderson_depth: 5,
            convection_form: ConvectionForm::Advective,
            capillary: CapillaryForm::PhiGradMu,
            phase_scheme: ConvectionScheme::LinearUpwind,
            eps: 0.0,
            linear_tol: 1e-12,
            max_linear_iter: 2000,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::invalid("dt", format!("must be positive, got {}", self.dt)));
        }
        if !(self.picard_tol > 0.0 && self.linear_tol > 0.0) {
            return Err(Error::invalid("picard_tol", "tolerances must be positive"));
        }
        if self.max_picard_iter == 0 || self.max_linear_iter == 0 {
            return Err(Error::invalid("max_picard_iter", "iteration limits must be positive"));
        }
        if !(self.relaxation > 0.0 && self.relaxation <= 1.0) {
            return Err(Error::invalid("relaxation", "must lie in (0, 1]"));
        }
        if self.anderson_depth > 50 {
            return Err(Error::invalid("picard_anderson_depth", "must not exceed 50"));
        }
        if !(self.eps >= 0.0 && self.eps.is_finite()) {
            return Err(Error::invalid("eps_mollifier", format!("must be >= 0, got {}", self.eps)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentumOutput {
    pub v: VectorField,
    pub pi: ScalarField,
    pub picard_iterations: usize,
    pub picard_history: Vec<f64>,
    pub linear_iterations: usize,
    pub projection_iterations: usize,
}

/// `μ̄_f ∇_hφ` on faces (zero on walls).
pub fn capillary_force(phi: &ScalarField, mu: &ScalarField) -> Result<VectorField> {
    phi.grid().check_same(mu.grid())?;
    let mut f = gradient(phi);
    let mbar = cell_to_faces(mu);
    f.data_mut().iter_mut().zip(mbar.data()).for_each(|(a, m)| *a *= m);
    Ok(f)
}

/// `−φ_f ∇_hμ` with the given face values of φ.
pub fn capillary_force_phi_grad_mu(phi_faces: &VectorField, mu: &ScalarField) -> Result<VectorField> {
    phi_faces.grid().check_same(mu.grid())?;
    let mut f = gradient(mu);
    f.data_mut().iter_mut().zip(phi_faces.data()).for_each(|(a, p)| *a *= -p);
    Ok(f)
}

#[derive(Debug, Clone)]
pub struct MomentumSolver {
    grid: Grid,
    params: FluidParams,
    law: DensityLaw,
    cfg: MomentumStepConfig,
    projector: Projector,
    fu: FastDiag,
    fv: FastDiag,
}

fn active_mask(g: &Grid) -> Vec<bool> {
    let mut m = Vec::with_capacity(g.n_xfaces() + g.n_yfaces());
    for _j in 0..g.ny {
        for i in 0..g.nux() {
            m.push(g.xface_active(i));
        }
    }
    for j in 0..g.nvy() {
        for _i in 0..g.nx {
            m.push(g.yface_active(j));
        }
    }
    m
}

impl MomentumSolver {
    pub fn new(grid: &Grid, params: &FluidParams, cfg: MomentumStepConfig, elliptic: EllipticSolverConfig) -> Result<Self> {
        params.validate()?;
        cfg.validate()?;
        Ok(MomentumSolver {
            grid: *grid,
            params: params.clone(),
            law: params.density_law()?,
            cfg,
            projector: Projector::with_config(grid, elliptic)?,
            fu: FastDiag::for_u(grid),
            fv: FastDiag::for_v(grid),
        })
    }

    pub fn config(&self) -> &MomentumStepConfig {
        &self.cfg
    }

    pub fn projector(&self) -> &Projector {
        &self.projector
    }

    /// `Ψ_ε v`.
    pub fn mollify(&self, v: &VectorField) -> Result<VectorField> {
        self.projector.mollify(v, self.cfg.eps)
    }

    /// Capillary force as used by the stepper, including `Ψ_ε` when ε > 0.
    pub fn capillary(&self, phi_n: &ScalarField, w: &VectorField, phi_next: &ScalarField, mu_next: &ScalarField) -> Result<VectorField> {
        let f = match self.cfg.capillary {
            CapillaryForm::MuGradPhi => capillary_force(phi_next, mu_next)?,
            CapillaryForm::PhiGradMu => {
                capillary_force_phi_grad_mu(&face_values(phi_n, w, self.cfg.phase_scheme), mu_next)?
            }
        };
        if self.cfg.eps > 0.0 {
            self.projector.mollify(&f, self.cfg.eps)
        } else {
            Ok(f)
        }
    }

    /// One momentum step from `state` with the new phase fields. `w` is
    /// `Ψ_ε state.v` when already available.
    pub fn step(
        &self,
        state: &State,
        phi_next: &ScalarField,
        mu_next: &ScalarField,
        w: Option<&VectorField>,
        body_force: Option<&VectorField>,
    ) -> Result<MomentumOutput> {
        let g = self.grid;
        g.check_same(state.grid())?;
        g.check_same(phi_next.grid())?;
        g.check_same(mu_next.grid())?;
        let dt = self.cfg.dt;
        let w_owned;
        let w = match w {
            Some(w) => w,
            None => {
                w_owned = self.mollify(&state.v)?;
                &w_owned
            }
        };

        let rho = phi_next.map(|s| self.law.rho(s));
        if rho.min() <= 0.0 {
            return Err(Error::invalid("density", "non-positive density encountered"));
        }
        let rho_f = cell_to_faces(&rho);
        let j = flux_j(phi_next, mu_next, &self.params)?;
        let r_f = cell_to_faces(&source_r(phi_next, mu_next, &self.params)?);

        let mut flux = rho_f.clone();
        flux.data_mut().iter_mut().zip(w.data()).for_each(|(a, b)| *a *= b);
        flux.axpy(1.0, &j);
        let conv = match self.cfg.convection_form {
            ConvectionForm::Advective => advective(&state.v, &flux),
            ConvectionForm::Conservative => conservative(&state.v, &flux),
        };
        let force = self.capillary(&state.phi, w, phi_next, mu_next)?;

        // rhs = ρ vⁿ/dt − conv − R vⁿ/2 + F (+ body)
        let n = rho_f.data().len();
        let mask = active_mask(&g);
        let mut rhs = vec![0.0; n];
        for k in 0..n {
            if mask[k] {
                let vn = state.v.data()[k];
                rhs[k] = rho_f.data()[k] * vn / dt - conv.data()[k] - 0.5 * r_f.data()[k] * vn + force.data()[k];
            }
        }
        if let Some(b) = body_force {
            g.check_same(b.grid())?;
            for k in 0..n {
                if mask[k] {
                    rhs[k] += b.data()[k];
                }
            }
        }

        let phase = PhaseSamples::new(phi_next);
        let rho_bar = rho_f.data().iter().zip(&mask).filter(|(_, m)| **m).map(|(r, _)| *r).sum::<f64>()
            / mask.iter().filter(|m| **m).count() as f64;
        let mut v_k = state.v.clone();
        let mut history = Vec::new();
        let mut linear_iterations = 0;
        let max_picard = if self.params.p == 2.0 { 1 } else { self.cfg.max_picard_iter };
        let mut converged = false;
        let mut picard_iterations = 0;
        let (mut xs, mut fs): (Vec<Vec<f64>>, Vec<Vec<f64>>) = (Vec::new(), Vec::new());
        for _ in 0..max_picard {
            picard_iterations += 1;
            let visc = ViscousOperator::new(&phase, &v_k, &self.params);
            let eta_bar = visc.mean_eta();
            let nux_total = g.n_xfaces();
            let apply = |x: &[f64], y: &mut [f64]| {
                let xf = VectorField::from_parts(&g, x[..nux_total].to_vec(), x[nux_total..].to_vec());
                let a = visc.apply(&xf);
                for k in 0..n {
                    y[k] = if mask[k] { rho_f.data()[k] / dt * x[k] + a.data()[k] } else { x[k] };
                }
            };
            let precond = |r: &[f64], z: &mut [f64]| self.precondition(r, z, rho_bar / dt, 0.5 * eta_bar);
            let mut x = v_k.data().to_vec();
            let st = pcg(
                apply,
                precond,
                &rhs,
                &mut x,
                CgOptions { rel_tol: self.cfg.linear_tol, max_iter: self.cfg.max_linear_iter, zero_mean: false },
            );
            linear_iterations += st.iterations;
            if !st.converged && st.residual > 1e-8 {
                return Err(Error::NotConverged {
                    solver: "momentum-predictor",
                    iterations: st.iterations,
                    residual: st.residual,
                    history: st.history,
                });
            }
            let f: Vec<f64> = x.iter().zip(v_k.data()).map(|(a, b)| a - b).collect();
            let change = VectorField::from_parts(&g, f[..nux_total].to_vec(), f[nux_total..].to_vec()).norm_l2();
            history.push(change);
            if self.params.p == 2.0 || change <= self.cfg.picard_tol {
                v_k = VectorField::from_parts(&g, x[..nux_total].to_vec(), x[nux_total..].to_vec());
                converged = true;
                break;
            }
            xs.push(v_k.data().to_vec());
            fs.push(f);
            if xs.len() > self.cfg.anderson_depth + 1 {
                xs.remove(0);
                fs.remove(0);
            }
            let next = anderson_update(&xs, &fs, self.cfg.relaxation);
            v_k = VectorField::from_parts(&g, next[..nux_total].to_vec(), next[nux_total..].to_vec());
        }
        if !converged {
            return Err(Error::NotConverged {
                solver: "picard",
                iterations: picard_iterations,
                residual: history.last().copied().unwrap_or(f64::NAN),
                history,
            });
        }

        let beta = rho_f.map(|r| 1.0 / r);
        let (v, pi, pst) = self.projector.weighted_project(&v_k, &beta, dt, Some(&state.pi))?;
        Ok(MomentumOutput {
            v,
            pi,
            picard_iterations,
            picard_history: history,
            linear_iterations,
            projection_iterations: pst.iterations,
        })
    }

    /// Componentwise `(a + b(−Δ_h))⁻¹`; inactive faces pass through.
    fn precondition(&self, r: &[f64], z: &mut [f64], a: f64, b: f64) {
        let g = self.grid;
        let (nx, ny, nux) = (g.nx, g.ny, g.nux());
        let sym = |lx: f64, ly: f64| 1.0 / (a + b * (lx + ly));
        z.copy_from_slice(r);
        let nu = g.n_xfaces();
        if g.periodic() {
            let zu = self.fu.apply_symbol(&r[..nu], sym);
            let zv = self.fv.apply_symbol(&r[nu..], sym);
            z[..nu].copy_from_slice(&zu);
            z[nu..].copy_from_slice(&zv);
            return;
        }
        let mut a_in = Vec::with_capacity((nx - 1) * ny);
        for j in 0..ny {
            a_in.extend_from_slice(&r[j * nux + 1..j * nux + nx]);
        }
        let a_out = self.fu.apply_symbol(&a_in, sym);
        for j in 0..ny {
            z[j * nux + 1..j * nux + nx].copy_from_slice(&a_out[j * (nx - 1)..(j + 1) * (nx - 1)]);
        }
        let b_out = self.fv.apply_symbol(&r[nu + nx..nu + ny * nx], sym);
        z[nu + nx..nu + ny * nx].copy_from_slice(&b_out);
    }
}

/// Anderson-mixed iterate from the histories of iterates `xs` and
/// residuals `fs = G(x) − x` (oldest first); plain relaxed Picard with a
/// single entry.
fn anderson_update(xs: &[Vec<f64>], fs: &[Vec<f64>], beta: f64) -> Vec<f64> {
    let last = xs.len() - 1;
    let (xk, fk) = (&xs[last], &fs[last]);
    let picard = || xk.iter().zip(fk).map(|(x, f)| x + beta * f).collect::<Vec<f64>>();
    if last == 0 {
        return picard();
    }
    let df: Vec<Vec<f64>> = (0..last).map(|i| fs[i + 1].iter().zip(&fs[i]).map(|(a, b)| a - b).collect()).collect();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let m = last;
    let mut a = vec![vec![0.0; m + 1]; m];
    for i in 0..m {
        for j in 0..m {
            a[i][j] = dot(&df[i], &df[j]);
        }
        a[i][m] = dot(&df[i], fk);
    }
    let reg = 1e-12 * (0..m).map(|i| a[i][i]).fold(0.0, f64::max);
    (0..m).for_each(|i| a[i][i] += reg);
    let Some(gamma) = solve_dense(a) else { return picard() };
    let mut out = picard();
    for (i, gi) in gamma.iter().enumerate() {
        for k in 0..out.len() {
            let dx = xs[i + 1][k] - xs[i][k];
            out[k] -= gi * (dx + beta * df[i][k]);
        }
    }
    if out.iter().all(|v| v.is_finite()) {
        out
    } else {
        picard()
    }
}

/// Gaussian elimination with partial pivoting on an augmented `m × (m+1)`
/// system.
fn solve_dense(mut a: Vec<Vec<f64>>) -> Option<Vec<f64>> {
    let m = a.len();
    for c in 0..m {
        let piv = (c..m).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[piv][c].abs() < 1e-300 {
            return None;
        }
        a.swap(c, piv);
        for r in c + 1..m {
            let f = a[r][c] / a[c][c];
            for k in c..=m {
                a[r][k] -= f * a[c][k];
            }
        }
    }
    let mut x = vec![0.0; m];
    for r in (0..m).rev() {
        let s: f64 = (r + 1..m).map(|k| a[r][k] * x[k]).sum();
        x[r] = (a[r][m] - s) / a[r][r];
    }
    Some(x)
}

/// One momentum step with default elliptic settings.
pub fn momentum_step(
    state: &State,
    phi_next: &ScalarField,
    mu_next: &ScalarField,
    params: &FluidParams,
    cfg: &MomentumStepConfig,
) -> Result<(VectorField, ScalarField)> {
    let solver = MomentumSolver::new(state.grid(), params, *cfg, EllipticSolverConfig::default())?;
    let out = solver.step(state, phi_next, mu_next, None, None)?;
    Ok((out.v, out.pi))
}
