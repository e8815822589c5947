//! Shared test oracles.
#![allow(dead_code)]

use std::f64::consts::PI;

use nsch_core::analysis::StaggeredTensor;
use nsch_core::constitutive::FluidParams;
use nsch_core::grid::{curl_of_nodes, gradient, Grid, NodeField, ScalarField, VectorField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq)]
struct C(f64, f64);

impl C {
    fn add(self, o: C) -> C {
        C(self.0 + o.0, self.1 + o.1)
    }
    fn sub(self, o: C) -> C {
        C(self.0 - o.0, self.1 - o.1)
    }
    fn mul(self, o: C) -> C {
        C(self.0 * o.0 - self.1 * o.1, self.0 * o.1 + self.1 * o.0)
    }
    fn conj(self) -> C {
        C(self.0, -self.1)
    }
    fn scale(self, s: f64) -> C {
        C(self.0 * s, self.1 * s)
    }
    fn cis(t: f64) -> C {
        C(t.cos(), t.sin())
    }
}

/// Naive separable DFT of an nx × ny row-major array (sign −1 forward).
fn dft2(data: &[C], nx: usize, ny: usize, inverse: bool) -> Vec<C> {
    let sign = if inverse { 1.0 } else { -1.0 };
    let mut rows = vec![C(0.0, 0.0); nx * ny];
    for j in 0..ny {
        for k in 0..nx {
            let mut acc = C(0.0, 0.0);
            for i in 0..nx {
                acc = acc.add(data[j * nx + i].mul(C::cis(sign * 2.0 * PI * (k * i) as f64 / nx as f64)));
            }
            rows[j * nx + k] = acc;
        }
    }
    let mut out = vec![C(0.0, 0.0); nx * ny];
    for k in 0..nx {
        for l in 0..ny {
            let mut acc = C(0.0, 0.0);
            for j in 0..ny {
                acc = acc.add(rows[j * nx + k].mul(C::cis(sign * 2.0 * PI * (l * j) as f64 / ny as f64)));
            }
            out[l * nx + k] = if inverse { acc.scale(1.0 / (nx * ny) as f64) } else { acc };
        }
    }
    out
}

/// Fourier multipliers of the periodic MAC divergence: (a, b, |a|² + |b|²).
fn symbols(g: &Grid, k: usize, l: usize) -> (C, C, f64) {
    let th = 2.0 * PI * k as f64 / g.nx as f64;
    let ph = 2.0 * PI * l as f64 / g.ny as f64;
    let a = C::cis(th).sub(C(1.0, 0.0)).scale(1.0 / g.dx);
    let b = C::cis(ph).sub(C(1.0, 0.0)).scale(1.0 / g.dy);
    let s = a.mul(a.conj()).0 + b.mul(b.conj()).0;
    (a, b, s)
}

/// `(P r) / (1/dt + ν s)` mode by mode on a periodic grid.
pub fn fourier_project_resolve(r: &VectorField, inv_dt: f64, nu: f64) -> VectorField {
    let g = *r.grid();
    assert!(g.periodic());
    let (nx, ny) = (g.nx, g.ny);
    let uh = dft2(&r.u().iter().map(|&x| C(x, 0.0)).collect::<Vec<_>>(), nx, ny, false);
    let vh = dft2(&r.v().iter().map(|&x| C(x, 0.0)).collect::<Vec<_>>(), nx, ny, false);
    let mut uo = uh.clone();
    let mut vo = vh.clone();
    for l in 0..ny {
        for k in 0..nx {
            let idx = l * nx + k;
            let (a, b, s) = symbols(&g, k, l);
            if s > 0.0 {
                let d = a.mul(uh[idx]).add(b.mul(vh[idx])).scale(1.0 / s);
                uo[idx] = uh[idx].sub(a.conj().mul(d));
                vo[idx] = vh[idx].sub(b.conj().mul(d));
            }
            let f = 1.0 / (inv_dt + nu * s);
            uo[idx] = uo[idx].scale(f);
            vo[idx] = vo[idx].scale(f);
        }
    }
    let u = dft2(&uo, nx, ny, true).iter().map(|c| c.0).collect();
    let v = dft2(&vo, nx, ny, true).iter().map(|c| c.0).collect();
    VectorField::from_parts(&g, u, v)
}

/// Discrete Leray projection on a periodic grid.
pub fn fourier_project(r: &VectorField) -> VectorField {
    // 1/(1 + 0·s) leaves the amplitude untouched.
    fourier_project_resolve(r, 1.0, 0.0)
}

fn w(k: isize, n: usize) -> usize {
    k.rem_euclid(n as isize) as usize
}

/// Central advective stencil `(F·∇)v` on a periodic MAC grid.
pub fn periodic_advective(v: &VectorField, f: &VectorField) -> VectorField {
    let g = *v.grid();
    let (nx, ny) = (g.nx, g.ny);
    let at = |a: &[f64], i: isize, j: isize| a[w(j, ny) * nx + w(i, nx)];
    let (u, vv, fu, fv) = (v.u(), v.v(), f.u(), f.v());
    let mut ou = vec![0.0; nx * ny];
    let mut ov = vec![0.0; nx * ny];
    for j in 0..ny as isize {
        for i in 0..nx as isize {
            // x-face (i, j) sits between cells i−1 and i
            let fyu = 0.25 * (at(fv, i - 1, j) + at(fv, i, j) + at(fv, i - 1, j + 1) + at(fv, i, j + 1));
            ou[j as usize * nx + i as usize] = at(fu, i, j) * (at(u, i + 1, j) - at(u, i - 1, j)) / (2.0 * g.dx)
                + fyu * (at(u, i, j + 1) - at(u, i, j - 1)) / (2.0 * g.dy);
            let fxv = 0.25 * (at(fu, i, j - 1) + at(fu, i + 1, j - 1) + at(fu, i, j) + at(fu, i + 1, j));
            ov[j as usize * nx + i as usize] = fxv * (at(vv, i + 1, j) - at(vv, i - 1, j)) / (2.0 * g.dx)
                + at(fv, i, j) * (at(vv, i, j + 1) - at(vv, i, j - 1)) / (2.0 * g.dy);
        }
    }
    VectorField::from_parts(&g, ou, ov)
}

/// `μ̄_f (φ(i) − φ(i−1))/h` on periodic faces.
pub fn periodic_mu_grad_phi(phi: &ScalarField, mu: &ScalarField) -> VectorField {
    let g = *phi.grid();
    let (nx, ny) = (g.nx, g.ny);
    let at = |a: &ScalarField, i: isize, j: isize| a.data()[w(j, ny) * nx + w(i, nx)];
    let mut fu = vec![0.0; nx * ny];
    let mut fv = vec![0.0; nx * ny];
    for j in 0..ny as isize {
        for i in 0..nx as isize {
            let k = j as usize * nx + i as usize;
            fu[k] = 0.5 * (at(mu, i, j) + at(mu, i - 1, j)) * (at(phi, i, j) - at(phi, i - 1, j)) / g.dx;
            fv[k] = 0.5 * (at(mu, i, j) + at(mu, i, j - 1)) * (at(phi, i, j) - at(phi, i, j - 1)) / g.dy;
        }
    }
    VectorField::from_parts(&g, fu, fv)
}

/// Newtonian, matched-density momentum step computed independently:
/// `v = (P r)/(1/dt + ν s)` with `r = vⁿ/dt − (Pvⁿ·∇)vⁿ + μ̄∇φ`.
pub fn newtonian_step(vn: &VectorField, phi_next: &ScalarField, mu_next: &ScalarField, nu: f64, dt: f64) -> VectorField {
    let wv = fourier_project(vn);
    let mut r = vn.scaled(1.0 / dt);
    r.axpy(-1.0, &periodic_advective(vn, &wv));
    r.axpy(1.0, &periodic_mu_grad_phi(phi_next, mu_next));
    fourier_project_resolve(&r, 1.0 / dt, nu)
}

/// Smooth periodic field with amplitude spread over many dyadic levels.
pub fn random_smooth_field(g: &Grid, seed: u64) -> VectorField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let amp = 2f64.powf(rng.gen_range(1.0..9.0));
    let modes: Vec<(f64, f64, f64, f64, f64)> = (0..6)
        .map(|_| {
            (
                rng.gen_range(1..4) as f64,
                rng.gen_range(1..4) as f64,
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(0.0..2.0 * PI),
            )
        })
        .collect();
    let comp = |x: f64, y: f64, which: usize| -> f64 {
        modes
            .iter()
            .map(|&(k, l, a, b, ph)| {
                let c = if which == 0 { a } else { b };
                c * (2.0 * PI * (k * x + l * y) + ph).sin()
            })
            .sum::<f64>()
            * amp
    };
    VectorField::from_fn(g, |x, y| comp(x, y, 0), |x, y| comp(x, y, 1))
}

pub struct Pair {
    pub times: Vec<f64>,
    pub u: Vec<VectorField>,
    pub h: Vec<StaggeredTensor>,
    pub h1: Vec<StaggeredTensor>,
    pub h2: Vec<StaggeredTensor>,
}

fn smooth_tensor(g: &Grid, t: f64, a: f64) -> StaggeredTensor {
    StaggeredTensor::from_fn(g, |x, y| {
        let s = (PI * x).sin() * (PI * y).sin();
        [
            [a * (1.0 + t) * (2.0 * PI * x).cos() * y, a * s * (1.0 + 0.5 * t)],
            [a * (x * y + t).sin(), -a * (PI * y).cos() * x * (1.0 - t)],
        ]
    })
}

/// `uⁿ = uⁿ⁻¹ + Δt(div H̄ⁿ + ∇χⁿ)` satisfies the weak relation exactly,
/// while `u` carries a gradient part so `π_h` is non-trivial.
pub fn manufactured(g: &Grid, levels: usize, dt: f64) -> Pair {
    let times: Vec<f64> = (0..levels).map(|n| n as f64 * dt).collect();
    let h1: Vec<StaggeredTensor> = times.iter().map(|&t| smooth_tensor(g, t, 1.0)).collect();
    let h2: Vec<StaggeredTensor> = times
        .iter()
        .map(|&t| {
            StaggeredTensor::from_fn(g, |x, y| {
                let c = (2.0 * PI * (x + t)).cos() * (PI * y).sin();
                [[c, 0.3 * c], [-0.7 * c, x * x - t]]
            })
        })
        .collect();
    let h: Vec<StaggeredTensor> = h1.iter().zip(&h2).map(|(a, b)| a.add(b)).collect();
    let psi = NodeField::from_fn(g, |x, y| ((PI * x).sin() * (PI * y).sin()).powi(2));
    let chi0 = ScalarField::from_fn(g, |x, y| (PI * x).cos() * (2.0 * PI * y).cos());
    let mut u = vec![curl_of_nodes(&psi).unwrap().add(&gradient(&chi0))];
    for n in 1..levels {
        let hbar = h[n - 1].lincomb(0.5, &h[n], 0.5);
        let chi = ScalarField::from_fn(g, |x, y| (x - 0.5) * (y * y) * (1.0 + times[n]));
        let mut inc = hbar.divergence().add(&gradient(&chi));
        inc.scale(dt);
        let next = u[n - 1].add(&inc);
        u.push(next);
    }
    Pair { times, u, h, h1, h2 }
}


/// φ = a cos(κx) cos(κy) and the source making it an exact solution.
pub fn ch_mms_fields(g: &Grid, kappa: f64, a: f64, da: f64, p: &FluidParams) -> (ScalarField, ScalarField) {
    let (eps, m) = (p.eps0, p.mobility);
    let k2 = kappa * kappa;
    let exact = ScalarField::from_fn(g, |x, y| a * (kappa * x).cos() * (kappa * y).cos());
    let source = ScalarField::from_fn(g, |x, y| {
        let (cx, sx, cy, sy) = ((kappa * x).cos(), (kappa * x).sin(), (kappa * y).cos(), (kappa * y).sin());
        let c = cx * cy;
        let lap_c = -2.0 * k2 * c;
        let grad2 = k2 * (sx * sx * cy * cy + cx * cx * sy * sy);
        let lap_c3 = 3.0 * c * c * lap_c + 6.0 * c * grad2;
        let lap_mu = (a.powi(3) * lap_c3 - a * lap_c) / eps + 2.0 * eps * k2 * a * lap_c;
        da * c - m * lap_mu
    });
    (exact, source)
}

