//! Neumann/periodic Poisson solves, the discrete Leray projection, the
//! variable-coefficient pressure projection and the Stokes mollifier.

use super::cg::{pcg, CgOptions, CgStats};
use super::ops::{divergence, gradient, laplacian};
use super::spectral::FastDiag;
use super::{Grid, ScalarField, VectorField};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EllipticMethod {
    /// Fast diagonalisation (exact up to rounding).
    Direct,
    /// Unpreconditioned conjugate gradients.
    ConjugateGradient,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticSolverConfig {
    pub method: EllipticMethod,
    pub rel_tol: f64,
    pub max_iter: usize,
}

impl Default for EllipticSolverConfig {
    fn default() -> Self {
        EllipticSolverConfig { method: EllipticMethod::Direct, rel_tol: 1e-10, max_iter: 5000 }
    }
}

impl EllipticSolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol <= 1e-4) {
            return Err(Error::invalid("rel_tol", format!("must lie in (0, 1e-4], got {}", self.rel_tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::invalid("max_iter", "must be positive"));
        }
        Ok(())
    }
}

/// Cached eigenbases for one grid.
#[derive(Debug, Clone)]
pub struct Projector {
    grid: Grid,
    cfg: EllipticSolverConfig,
    scalar: FastDiag,
    fu: FastDiag,
    fv: FastDiag,
}

impl Projector {
    pub fn new(grid: &Grid) -> Self {
        Projector::with_config(grid, EllipticSolverConfig::default()).expect("default config is valid")
    }

    pub fn with_config(grid: &Grid, cfg: EllipticSolverConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Projector {
            grid: *grid,
            cfg,
            scalar: FastDiag::for_scalar(grid),
            fu: FastDiag::for_u(grid),
            fv: FastDiag::for_v(grid),
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn config(&self) -> &EllipticSolverConfig {
        &self.cfg
    }

    pub fn scalar_basis(&self) -> &FastDiag {
        &self.scalar
    }

    /// Zero-mean `u` with `Δ_h u = rhs`.
    pub fn poisson(&self, rhs: &ScalarField) -> Result<ScalarField> {
        self.grid.check_same(rhs.grid())?;
        let n = rhs.data().len() as f64;
        let rms = (rhs.data().iter().map(|x| x * x).sum::<f64>() / n).sqrt();
        let mean = rhs.mean();
        if mean.abs() > 1e-10 * rms.max(f64::MIN_POSITIVE) {
            return Err(Error::Incompatible(format!(
                "Poisson right-hand side has mean {mean:e} (rms {rms:e})"
            )));
        }
        let mut u = match self.cfg.method {
            EllipticMethod::Direct => {
                let x = self.scalar.solve_neg_laplacian(rhs.data());
                ScalarField::from_vec(&self.grid, x.into_iter().map(|v| -v).collect())
            }
            EllipticMethod::ConjugateGradient => {
                let g = self.grid;
                let b: Vec<f64> = rhs.data().iter().map(|v| -v).collect();
                let mut x = vec![0.0; b.len()];
                pcg(
                    |p, y| {
                        let l = laplacian(&ScalarField::from_vec(&g, p.to_vec()));
                        y.iter_mut().zip(l.data()).for_each(|(a, b)| *a = -b);
                    },
                    |r, z| z.copy_from_slice(r),
                    &b,
                    &mut x,
                    CgOptions { rel_tol: self.cfg.rel_tol, max_iter: self.cfg.max_iter, zero_mean: true },
                )
                .check("poisson-cg")?;
                ScalarField::from_vec(&g, x)
            }
        };
        u.subtract_mean();
        Ok(u)
    }

    /// Leray projection `u − ∇π`, `Δπ = div u`; returns the field and `π`.
    pub fn project_with_potential(&self, u: &VectorField) -> Result<(VectorField, ScalarField)> {
        self.grid.check_same(u.grid())?;
        let mut d = divergence(u);
        d.subtract_mean();
        let pi = self.poisson(&d)?;
        let mut out = u.sub(&gradient(&pi));
        out.enforce_walls();
        Ok((out, pi))
    }

    pub fn project(&self, u: &VectorField) -> Result<VectorField> {
        Ok(self.project_with_potential(u)?.0)
    }

    /// `P (I − εΔ_h)⁻¹ P u`; plain projection when `eps == 0`.
    pub fn mollify(&self, u: &VectorField, eps: f64) -> Result<VectorField> {
        if !(eps >= 0.0) || !eps.is_finite() {
            return Err(Error::invalid("eps_mollifier", format!("must be finite and >= 0, got {eps}")));
        }
        let p = self.project(u)?;
        if eps == 0.0 {
            return Ok(p);
        }
        let smoothed = self.helmholtz_smooth(&p, eps);
        self.project(&smoothed)
    }

    /// Componentwise `(I − εΔ_h)⁻¹` with no-slip reflection on walls.
    pub fn helmholtz_smooth(&self, u: &VectorField, eps: f64) -> VectorField {
        let g = self.grid;
        let sym = |a: f64, b: f64| 1.0 / (1.0 + eps * (a + b));
        let mut out = VectorField::zeros(&g);
        if g.periodic() {
            let su = self.fu.apply_symbol(u.u(), sym);
            let sv = self.fv.apply_symbol(u.v(), sym);
            out.u_mut().copy_from_slice(&su);
            out.v_mut().copy_from_slice(&sv);
            return out;
        }
        let (nx, ny, nux) = (g.nx, g.ny, g.nux());
        let mut a = Vec::with_capacity((nx - 1) * ny);
        for j in 0..ny {
            a.extend_from_slice(&u.u()[j * nux + 1..j * nux + nx]);
        }
        let a = self.fu.apply_symbol(&a, sym);
        {
            let du = out.u_mut();
            for j in 0..ny {
                du[j * nux + 1..j * nux + nx].copy_from_slice(&a[j * (nx - 1)..(j + 1) * (nx - 1)]);
            }
        }
        let b = self.fv.apply_symbol(&u.v()[nx..ny * nx], sym);
        out.v_mut()[nx..ny * nx].copy_from_slice(&b);
        out
    }

    /// Variable-coefficient projection: finds zero-mean `π` with
    /// `div(β∇π) = div v*/dt` and returns `v* − dt β∇π`, which is discretely
    /// divergence free. `beta` holds face values of `1/ρ`.
    pub fn weighted_project(
        &self,
        vstar: &VectorField,
        beta: &VectorField,
        dt: f64,
        guess: Option<&ScalarField>,
    ) -> Result<(VectorField, ScalarField, CgStats)> {
        let g = self.grid;
        g.check_same(vstar.grid())?;
        g.check_same(beta.grid())?;
        let mut rhs = divergence(vstar);
        rhs.subtract_mean();
        let b: Vec<f64> = rhs.data().iter().map(|v| -v / dt).collect();
        let apply_a = |p: &[f64], y: &mut [f64]| {
            let mut gp = gradient(&ScalarField::from_vec(&g, p.to_vec()));
            gp.data_mut().iter_mut().zip(beta.data()).for_each(|(a, b)| *a *= b);
            let d = divergence(&gp);
            y.iter_mut().zip(d.data()).for_each(|(a, b)| *a = -b);
        };
        let mut count = 0.0;
        let mut total = 0.0;
        for (i, &bv) in beta.u().iter().enumerate() {
            if g.xface_active(i % g.nux()) {
                total += bv;
                count += 1.0;
            }
        }
        for (k, &bv) in beta.v().iter().enumerate() {
            if g.yface_active(k / g.nx) {
                total += bv;
                count += 1.0;
            }
        }
        let bbar = total / count;
        let mut x = guess.map(|p| p.data().to_vec()).unwrap_or_else(|| vec![0.0; b.len()]);
        let stats = pcg(
            apply_a,
            |r, z| {
                z.copy_from_slice(&self.scalar.apply_symbol(r, |a, c| {
                    let l = a + c;
                    if l == 0.0 {
                        0.0
                    } else {
                        1.0 / (bbar * l)
                    }
                }))
            },
            &b,
            &mut x,
            CgOptions { rel_tol: self.cfg.rel_tol, max_iter: self.cfg.max_iter, zero_mean: true },
        )
        .check("pressure-projection")?;
        let pi = ScalarField::from_vec(&g, x);
        let mut gp = gradient(&pi);
        gp.data_mut().iter_mut().zip(beta.data()).for_each(|(a, b)| *a *= b);
        let mut v = vstar.clone();
        v.axpy(-dt, &gp);
        v.enforce_walls();
        Ok((v, pi, stats))
    }
}

/// Zero-mean solution of `Δ_h u = rhs` (Neumann on physical grids).
pub fn poisson_solve_neumann(rhs: &ScalarField) -> Result<ScalarField> {
    Projector::new(rhs.grid()).poisson(rhs)
}

pub fn helmholtz_project(u: &VectorField) -> Result<VectorField> {
    Projector::new(u.grid()).project(u)
}

pub fn stokes_mollify(u: &VectorField, eps: f64) -> Result<VectorField> {
    Projector::new(u.grid()).mollify(u, eps)
}

pub fn weighted_project(
    vstar: &VectorField,
    beta: &VectorField,
    dt: f64,
) -> Result<(VectorField, ScalarField, CgStats)> {
    Projector::new(vstar.grid()).weighted_project(vstar, beta, dt, None)
}
