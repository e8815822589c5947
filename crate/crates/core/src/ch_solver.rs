//! Convected Cahn–Hilliard substep
//!
//! ```text
//! φ_t + w·∇φ = m Δμ,   μ = ε₀⁻¹ f′(φ) − ε₀ Δφ
//! ```
//!
//! with Neumann (or periodic) conditions, split as `f = f₀ − α s²/2`: the
//! convex part and `−ε₀Δφ` are implicit, `−αφ` and the convection explicit.
//! Each Newton correction solves the zero-mean SPD system
//!
//! ```text
//! [ (−Δ)⁻¹ + dt m (ε₀⁻¹ P₀ f₀″(φ) P₀ + ε₀(−Δ)) ] δ = −(−Δ)⁻¹ Res(φ)
//! ```
//!
//! by conjugate gradients in the cosine/Fourier eigenbasis of `Δ_h`, where
//! everything but the `f₀″` term is diagonal.

use crate::constitutive::FluidParams;
use crate::error::{Error, Result};
use crate::grid::{divergence, laplacian, CgOptions, FastDiag, Grid, ScalarField, VectorField};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Splitting {
    ConvexSplit,
    FullyImplicit,
}

/// Face reconstruction of φ in the convective flux.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvectionScheme {
    Central,
    /// Second-order (linear) upwinding, unlimited.
    LinearUpwind,
}

impl ConvectionScheme {
    pub fn tag(self) -> &'static str {
        match self {
            ConvectionScheme::Central => "central",
            ConvectionScheme::LinearUpwind => "upwind2",
        }
    }

    pub fn from_tag(s: &str) -> Option<Self> {
        match s {
            "central" => Some(ConvectionScheme::Central),
            "upwind2" => Some(ConvectionScheme::LinearUpwind),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChStepConfig {
    pub dt: f64,
    pub splitting: Splitting,
    pub convection: ConvectionScheme,
    /// Newton stops once `max|δ| ≤ newton_tol · max(1, max|φ|)`.
    pub newton_tol: f64,
    pub max_newton_iter: usize,
    pub linear_tol: f64,
    pub max_linear_iter: usize,
}

impl ChStepConfig {
    pub fn new(dt: f64) -> Self {
        ChStepConfig {
            dt,
            splitting: Splitting::ConvexSplit,
            convection: ConvectionScheme::LinearUpwind,
            newton_tol: 1e-10,
            max_newton_iter: 30,
            linear_tol: 1e-12,
            max_linear_iter: 500,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::invalid("dt", format!("must be positive, got {}", self.dt)));
        }
        if !(self.newton_tol > 0.0 && self.linear_tol > 0.0) {
            return Err(Error::invalid("newton_tol", "tolerances must be positive"));
        }
        if self.max_newton_iter == 0 || self.max_linear_iter == 0 {
            return Err(Error::invalid("max_newton_iter", "iteration limits must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChStepOutput {
    pub phi: ScalarField,
    pub mu: ScalarField,
    pub newton_iterations: usize,
    pub linear_iterations: usize,
    /// Update norms, one per Newton iteration.
    pub history: Vec<f64>,
}

/// Face values of φ used by the convective flux. Wall faces carry the
/// adjacent cell value; they never contribute since `w` vanishes there.
pub fn face_values(phi: &ScalarField, w: &VectorField, scheme: ConvectionScheme) -> VectorField {
    let g = *phi.grid();
    let (nx, ny, nux) = (g.nx, g.ny, g.nux());
    let per = g.periodic();
    // cell index along a line with wrap (periodic) or mirror (Neumann)
    let idx = |k: isize, n: usize| -> usize {
        if per {
            k.rem_euclid(n as isize) as usize
        } else if k < 0 {
            (-k - 1) as usize
        } else if k >= n as isize {
            2 * n - 1 - k as usize
        } else {
            k as usize
        }
    };
    let recon = |a: f64, b: f64, aa: f64, bb: f64, wf: f64| -> f64 {
        // a, b: cells left/right of the face; aa, bb: next ones outward
        match scheme {
            ConvectionScheme::Central => 0.5 * (a + b),
            ConvectionScheme::LinearUpwind => {
                // written as a correction so constant data reconstructs exactly
                if wf > 0.0 {
                    a + 0.5 * (a - aa)
                } else if wf < 0.0 {
                    b + 0.5 * (b - bb)
                } else {
                    0.5 * (a + b)
                }
            }
        }
    };
    let mut out = VectorField::zeros(&g);
    let (wu, wv) = (w.u(), w.v());
    let (fu, fv) = out.parts_mut();
    for j in 0..ny {
        for i in 0..nux {
            let ii = i as isize;
            let a = phi.get(idx(ii - 1, nx), j);
            let b = phi.get(idx(ii, nx), j);
            let aa = phi.get(idx(ii - 2, nx), j);
            let bb = phi.get(idx(ii + 1, nx), j);
            fu[j * nux + i] = recon(a, b, aa, bb, wu[j * nux + i]);
        }
    }
    for j in 0..g.nvy() {
        let jj = j as isize;
        let (ja, jb, jaa, jbb) = (idx(jj - 1, ny), idx(jj, ny), idx(jj - 2, ny), idx(jj + 1, ny));
        for i in 0..nx {
            fv[j * nx + i] = recon(phi.get(i, ja), phi.get(i, jb), phi.get(i, jaa), phi.get(i, jbb), wv[j * nx + i]);
        }
    }
    out
}

/// `div(w φ_f)`.
pub fn convective_term(phi: &ScalarField, w: &VectorField, scheme: ConvectionScheme) -> ScalarField {
    let mut flux = face_values(phi, w, scheme);
    flux.data_mut().iter_mut().zip(w.data()).for_each(|(f, v)| *f *= v);
    divergence(&flux)
}

/// `ε₀⁻¹ f′(φ) − ε₀ Δ_h φ`.
pub fn chemical_potential(phi: &ScalarField, params: &FluidParams) -> ScalarField {
    let lap = laplacian(phi);
    let (e, pot) = (params.eps0, &params.potential);
    let data = phi.data().iter().zip(lap.data()).map(|(&s, &l)| pot.df(s) / e - e * l).collect();
    ScalarField::from_vec(phi.grid(), data)
}

/// Interfacial plus bulk free energy `Σ_faces ε₀/2 |∇_hφ|² + Σ f(φ)/ε₀`,
/// times cell area. Returns `(interfacial, bulk)`.
pub fn ch_energy_parts(phi: &ScalarField, params: &FluidParams) -> (f64, f64) {
    let g = phi.grid();
    let grad = crate::grid::gradient(phi);
    let a = g.cell_area();
    let int = 0.5 * params.eps0 * grad.data().iter().map(|x| x * x).sum::<f64>() * a;
    let bulk = phi.data().iter().map(|&s| params.potential.f(s)).sum::<f64>() * a / params.eps0;
    (int, bulk)
}

pub fn ch_energy(phi: &ScalarField, params: &FluidParams) -> f64 {
    let (a, b) = ch_energy_parts(phi, params);
    a + b
}

/// Reusable stepper for one grid and parameter set.
#[derive(Debug, Clone)]
pub struct ChSolver {
    grid: Grid,
    params: FluidParams,
    cfg: ChStepConfig,
    fd: FastDiag,
    /// Eigenvalues of `−Δ_h` in coefficient order.
    lam: Vec<f64>,
}

impl ChSolver {
    pub fn new(grid: &Grid, params: &FluidParams, cfg: ChStepConfig) -> Result<Self> {
        params.validate()?;
        cfg.validate()?;
        let fd = FastDiag::for_scalar(grid);
        let mut lam = Vec::with_capacity(fd.len());
        for ly in &fd.by.lambda {
            for lx in &fd.bx.lambda {
                lam.push(lx + ly);
            }
        }
        Ok(ChSolver { grid: *grid, params: params.clone(), cfg, fd, lam })
    }

    pub fn config(&self) -> &ChStepConfig {
        &self.cfg
    }

    pub fn params(&self) -> &FluidParams {
        &self.params
    }

    /// One step from `phi_n` convected by `w` (already mollified and
    /// divergence free), with an optional volumetric source.
    pub fn step(&self, phi_n: &ScalarField, w: Option<&VectorField>, source: Option<&ScalarField>) -> Result<ChStepOutput> {
        let g = self.grid;
        g.check_same(phi_n.grid())?;
        let dt = self.cfg.dt;
        let (eps, m) = (self.params.eps0, self.params.mobility);
        let alpha = self.params.alpha;
        let pot = &self.params.potential;
        let n = g.n_cells();

        // explicit part e = φⁿ − dt div(wφ_f) + dt g
        let mut e = phi_n.clone();
        if let Some(w) = w {
            g.check_same(w.grid())?;
            let cfl = w.max_abs() * dt / g.dx.min(g.dy);
            if cfl > 1.0 {
                log::warn!("Cahn-Hilliard convection CFL number {cfl:.3} exceeds 1");
            }
            e.axpy(-dt, &convective_term(phi_n, w, self.cfg.convection));
        }
        if let Some(src) = source {
            g.check_same(src.grid())?;
            e.axpy(dt, src);
        }
        let implicit_split = self.cfg.splitting == Splitting::ConvexSplit;
        let mut phi = phi_n.clone();
        let shift = e.mean() - phi_n.mean();
        phi.data_mut().iter_mut().for_each(|x| *x += shift);

        let mut history = Vec::new();
        let mut linear_iterations = 0;
        for it in 1..=self.cfg.max_newton_iter {
            // scheme potential and its derivative
            let lap = laplacian(&phi);
            let mut mu_s = vec![0.0; n];
            let mut c = vec![0.0; n];
            for k in 0..n {
                let s = phi.data()[k];
                let (nl, dnl) = if implicit_split {
                    (pot.df0(s) - alpha * phi_n.data()[k], pot.d2f0(s))
                } else {
                    (pot.df(s), pot.derivs(s).1)
                };
                mu_s[k] = nl / eps - eps * lap.data()[k];
                c[k] = dnl;
            }
            let lmu = laplacian(&ScalarField::from_vec(&g, mu_s));
            let res: Vec<f64> = (0..n)
                .map(|k| phi.data()[k] - e.data()[k] - dt * m * lmu.data()[k])
                .collect();
            let mut b = self.fd.forward(&res);
            b[0] = 0.0;
            for k in 1..n {
                b[k] = -b[k] / self.lam[k];
            }
            let cbar = (c.iter().sum::<f64>() / n as f64).max(0.0);
            let fd = &self.fd;
            let lam = &self.lam;
            let apply = |x: &[f64], y: &mut [f64]| {
                let mut xs = x.to_vec();
                xs[0] = 0.0;
                let mut phys = fd.inverse(&xs);
                phys.iter_mut().zip(&c).for_each(|(p, ck)| *p *= ck);
                let cc = fd.forward(&phys);
                y[0] = x[0];
                for k in 1..n {
                    y[k] = x[k] / lam[k] + dt * m * (eps * lam[k] * x[k] + cc[k] / eps);
                }
            };
            let precond = |r: &[f64], z: &mut [f64]| {
                z[0] = r[0];
                for k in 1..n {
                    z[k] = r[k] / (1.0 / lam[k] + dt * m * (cbar / eps + eps * lam[k]));
                }
            };
            let mut x = vec![0.0; n];
            let st = crate::grid::pcg(
                apply,
                precond,
                &b,
                &mut x,
                CgOptions { rel_tol: self.cfg.linear_tol, max_iter: self.cfg.max_linear_iter, zero_mean: false },
            );
            linear_iterations += st.iterations;
            if !st.converged && st.residual > 1e-6 {
                return Err(Error::NotConverged {
                    solver: "cahn-hilliard-linear",
                    iterations: st.iterations,
                    residual: st.residual,
                    history: st.history,
                });
            }
            x[0] = 0.0;
            let delta = self.fd.inverse(&x);
            let mut dmax: f64 = 0.0;
            for (p, d) in phi.data_mut().iter_mut().zip(&delta) {
                *p += d;
                dmax = dmax.max(d.abs());
            }
            let scale = phi.max_abs().max(1.0);
            history.push(dmax / scale);
            if !phi.data().iter().all(|v| v.is_finite()) {
                break;
            }
            if dmax <= self.cfg.newton_tol * scale {
                let mu = chemical_potential(&phi, &self.params);
                return Ok(ChStepOutput { phi, mu, newton_iterations: it, linear_iterations, history });
            }
        }
        Err(Error::NotConverged {
            solver: "cahn-hilliard-newton",
            iterations: history.len(),
            residual: history.last().copied().unwrap_or(f64::NAN),
            history,
        })
    }
}

/// One convex-split step; `v` is the convecting (mollified) velocity.
pub fn ch_step(
    phi_n: &ScalarField,
    v: &VectorField,
    params: &FluidParams,
    cfg: &ChStepConfig,
) -> Result<(ScalarField, ScalarField)> {
    let out = ChSolver::new(phi_n.grid(), params, *cfg)?.step(phi_n, Some(v), None)?;
    Ok((out.phi, out.mu))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChTrajectory {
    pub times: Vec<f64>,
    pub phi: Vec<ScalarField>,
    pub mu: Vec<ScalarField>,
}

/// Number of steps of size `dt` covering `[0, t_end]`.
pub fn step_count(t_end: f64, dt: f64) -> usize {
    (t_end / dt - 1e-9).ceil().max(0.0) as usize
}

/// Iterates the substep over `[0, t_end]`; `v_at(n, t)` supplies the
/// convecting velocity for step `n` starting at time `t`.
pub fn ch_solution_operator(
    mut v_at: impl FnMut(usize, f64) -> VectorField,
    phi0: &ScalarField,
    t_end: f64,
    params: &FluidParams,
    cfg: &ChStepConfig,
) -> Result<ChTrajectory> {
    let solver = ChSolver::new(phi0.grid(), params, *cfg)?;
    let steps = step_count(t_end, cfg.dt);
    let mut traj = ChTrajectory {
        times: vec![0.0],
        phi: vec![phi0.clone()],
        mu: vec![chemical_potential(phi0, params)],
    };
    let mut phi = phi0.clone();
    for n in 0..steps {
        let t = n as f64 * cfg.dt;
        let w = v_at(n, t);
        let out = solver.step(&phi, Some(&w), None).map_err(|e| e.at_step(n, t))?;
        phi = out.phi;
        traj.times.push((n + 1) as f64 * cfg.dt);
        traj.phi.push(phi.clone());
        traj.mu.push(out.mu);
    }
    Ok(traj)
}

/// `sup_t ‖𝒮[v₁] − 𝒮[v₂]‖₂ / (√T · sup_t ‖v₁ − v₂‖₂)` along the discrete
/// trajectories; zero when the velocities coincide.
pub fn lipschitz_probe(
    mut v1: impl FnMut(usize, f64) -> VectorField,
    mut v2: impl FnMut(usize, f64) -> VectorField,
    phi0: &ScalarField,
    t_end: f64,
    params: &FluidParams,
    cfg: &ChStepConfig,
) -> Result<f64> {
    let steps = step_count(t_end, cfg.dt);
    let mut dv: f64 = 0.0;
    let mut u1 = Vec::with_capacity(steps);
    let mut u2 = Vec::with_capacity(steps);
    for n in 0..steps {
        let t = n as f64 * cfg.dt;
        let (a, b) = (v1(n, t), v2(n, t));
        dv = dv.max(a.sub(&b).norm_l2());
        u1.push(a);
        u2.push(b);
    }
    if dv == 0.0 {
        return Ok(0.0);
    }
    let s1 = ch_solution_operator(|n, _| u1[n].clone(), phi0, t_end, params, cfg)?;
    let s2 = ch_solution_operator(|n, _| u2[n].clone(), phi0, t_end, params, cfg)?;
    let dphi = s1
        .phi
        .iter()
        .zip(&s2.phi)
        .map(|(a, b)| a.sub(b).norm_l2())
        .fold(0.0, f64::max);
    Ok(dphi / (t_end.sqrt() * dv))
}
