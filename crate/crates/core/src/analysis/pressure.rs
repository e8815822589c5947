//! Pressure decomposition `π = ∂_t π_h + π₀` of a velocity trajectory `u`
//! driven by a stress-like tensor `H`:
//!
//! ```text
//! u_t = div H − ∇(∂_t π_h + π₀),   Δπ_h = −div(u − u₀),
//! π̃₀(t) = Δℒ div div ∫₀ᵗ H,        π₀ = ∂_t π̃₀,
//! ```
//!
//! with `ℒ` the clamped bi-Laplace solution operator. Time integrals use
//! the trapezoid rule and `∂_t` the backward difference, so on the interval
//! `(t_{n−1}, t_n]` everything is driven by `H̄ⁿ = (Hⁿ⁻¹ + Hⁿ)/2`.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{
    cells_to_nodes, divergence, laplacian, Basis1d, BasisKind, BiharmonicSolver, FastDiag, Grid,
    NodeField, Projector, ScalarField, VectorField,
};

/// Second-rank tensor on the MAC grid: diagonal entries at cell centres,
/// off-diagonal entries at nodes, so that [`StaggeredTensor::divergence`]
/// lands on faces.
#[derive(Debug, Clone, PartialEq)]
pub struct StaggeredTensor {
    pub xx: ScalarField,
    pub yy: ScalarField,
    pub xy: NodeField,
    pub yx: NodeField,
}

impl StaggeredTensor {
    pub fn zeros(g: &Grid) -> Self {
        StaggeredTensor {
            xx: ScalarField::zeros(g),
            yy: ScalarField::zeros(g),
            xy: NodeField::zeros(g),
            yx: NodeField::zeros(g),
        }
    }

    /// Samples `f(x, y) = [[xx, xy], [yx, yy]]` at the native locations.
    pub fn from_fn(g: &Grid, f: impl Fn(f64, f64) -> [[f64; 2]; 2]) -> Self {
        StaggeredTensor {
            xx: ScalarField::from_fn(g, |x, y| f(x, y)[0][0]),
            yy: ScalarField::from_fn(g, |x, y| f(x, y)[1][1]),
            xy: NodeField::from_fn(g, |x, y| f(x, y)[0][1]),
            yx: NodeField::from_fn(g, |x, y| f(x, y)[1][0]),
        }
    }

    pub fn grid(&self) -> &Grid {
        self.xx.grid()
    }

    fn zip(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        let node = |a: &NodeField, b: &NodeField| {
            NodeField::from_vec(a.grid(), a.data().iter().zip(b.data()).map(|(x, y)| f(*x, *y)).collect())
        };
        StaggeredTensor {
            xx: self.xx.zip_map(&other.xx, &f).expect("same grid"),
            yy: self.yy.zip_map(&other.yy, &f).expect("same grid"),
            xy: node(&self.xy, &other.xy),
            yx: node(&self.yx, &other.yx),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a - b)
    }

    pub fn scaled(&self, a: f64) -> Self {
        self.zip(self, |x, _| a * x)
    }

    /// `a·self + b·other`.
    pub fn lincomb(&self, a: f64, other: &Self, b: f64) -> Self {
        self.zip(other, |x, y| a * x + b * y)
    }

    /// Row-wise divergence on the active faces.
    pub fn divergence(&self) -> VectorField {
        let g = *self.grid();
        let (nx, ny, nux) = (g.nx, g.ny, g.nux());
        let p = g.periodic();
        let mut out = VectorField::zeros(&g);
        let (u, v) = out.parts_mut();
        for j in 0..ny {
            let jt = if p { (j + 1) % ny } else { j + 1 };
            for i in 0..nux {
                if !g.xface_active(i) {
                    continue;
                }
                let il = if p { (i + nx - 1) % nx } else { i - 1 };
                u[j * nux + i] = (self.xx.get(i % nx, j) - self.xx.get(il, j)) / g.dx
                    + (self.xy.get(i, jt) - self.xy.get(i, j)) / g.dy;
            }
        }
        for j in 0..g.nvy() {
            if !g.yface_active(j) {
                continue;
            }
            let jb = if p { (j + ny - 1) % ny } else { j - 1 };
            for i in 0..nx {
                let it = if p { (i + 1) % nx } else { i + 1 };
                v[j * nx + i] = (self.yx.get(it, j) - self.yx.get(i, j)) / g.dx
                    + (self.yy.get(i, j % ny) - self.yy.get(i, jb)) / g.dy;
            }
        }
        out
    }

    /// `∇w` on the tensor locations; the negative adjoint of
    /// [`divergence`](Self::divergence) under [`pair`](Self::pair).
    pub fn gradient_of(w: &VectorField) -> Self {
        let g = *w.grid();
        let (nx, ny, nux) = (g.nx, g.ny, g.nux());
        let p = g.periodic();
        let (u, v) = (w.u(), w.v());
        let mut h = StaggeredTensor::zeros(&g);
        for j in 0..ny {
            let jt = if p { (j + 1) % ny } else { j + 1 };
            for i in 0..nx {
                let ir = if p { (i + 1) % nx } else { i + 1 };
                h.xx.set(i, j, (u[j * nux + ir] - u[j * nux + i]) / g.dx);
                h.yy.set(i, j, (v[jt * nx + i] - v[j * nx + i]) / g.dy);
            }
        }
        let (na, nb) = g.node_dims();
        let uat = |i: usize, j: isize| -> f64 {
            if p {
                u[(j.rem_euclid(ny as isize) as usize) * nux + i]
            } else if j < 0 || j >= ny as isize {
                0.0
            } else {
                u[j as usize * nux + i]
            }
        };
        let vat = |i: isize, j: usize| -> f64 {
            if p {
                v[j * nx + i.rem_euclid(nx as isize) as usize]
            } else if i < 0 || i >= nx as isize {
                0.0
            } else {
                v[j * nx + i as usize]
            }
        };
        for j in 0..nb {
            for i in 0..na {
                h.xy.set(i, j, (uat(i, j as isize) - uat(i, j as isize - 1)) / g.dy);
                h.yx.set(i, j, (vat(i as isize, j) - vat(i as isize - 1, j)) / g.dx);
            }
        }
        h
    }

    /// `Σ H:K` times the cell area.
    pub fn pair(&self, other: &Self) -> f64 {
        let s = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        (s(self.xx.data(), other.xx.data())
            + s(self.yy.data(), other.yy.data())
            + s(self.xy.data(), other.xy.data())
            + s(self.yx.data(), other.yx.data()))
            * self.grid().cell_area()
    }

    /// Frobenius norm at cell centres, off-diagonal entries averaged from
    /// the four corners.
    pub fn magnitude(&self) -> ScalarField {
        let (xy, yx) = (self.xy.to_cells(), self.yx.to_cells());
        let mut out = ScalarField::zeros(self.grid());
        for (k, m) in out.data_mut().iter_mut().enumerate() {
            let c = [self.xx.data()[k], xy.data()[k], yx.data()[k], self.yy.data()[k]];
            *m = c.iter().map(|x| x * x).sum::<f64>().sqrt();
        }
        out
    }

    pub fn norm_lq(&self, q: f64) -> f64 {
        self.magnitude().norm_lq(q)
    }

    pub fn max_abs(&self) -> f64 {
        self.xx.max_abs().max(self.yy.max_abs()).max(self.xy.max_abs()).max(self.yx.max_abs())
    }
}

/// Finds `H = ∇w` with `div H = f` exactly, `w` vanishing outside the
/// active faces. On periodic grids the mean of each component of `f` is
/// not representable and is dropped.
pub fn tensor_potential(f: &VectorField) -> StaggeredTensor {
    let g = *f.grid();
    let (nx, ny, nux) = (g.nx, g.ny, g.nux());
    let mut w = VectorField::zeros(&g);
    if g.periodic() {
        let fd = FastDiag::for_scalar(&g);
        let su: Vec<f64> = fd.solve_neg_laplacian(f.u()).into_iter().map(|x| -x).collect();
        let sv: Vec<f64> = fd.solve_neg_laplacian(f.v()).into_iter().map(|x| -x).collect();
        w.u_mut().copy_from_slice(&su);
        w.v_mut().copy_from_slice(&sv);
        return StaggeredTensor::gradient_of(&w);
    }
    let node = |n: usize, h: f64| Basis1d::new(BasisKind::DirichletNode, n, h);
    let fu = FastDiag::new(node(nx, g.dx), node(ny + 1, g.dy));
    let fv = FastDiag::new(node(nx + 1, g.dx), node(ny, g.dy));
    let mut a = Vec::with_capacity((nx - 1) * ny);
    for j in 0..ny {
        a.extend_from_slice(&f.u()[j * nux + 1..j * nux + nx]);
    }
    let a = fu.solve_neg_laplacian(&a);
    let b = fv.solve_neg_laplacian(&f.v()[nx..ny * nx]);
    {
        let du = w.u_mut();
        for j in 0..ny {
            for (k, x) in a[j * (nx - 1)..(j + 1) * (nx - 1)].iter().enumerate() {
                du[j * nux + 1 + k] = -x;
            }
        }
    }
    for (d, x) in w.v_mut()[nx..ny * nx].iter_mut().zip(&b) {
        *d = -x;
    }
    StaggeredTensor::gradient_of(&w)
}

/// Tensors `H⁰..Hᴺ` whose trapezoid averages reproduce the velocity
/// increments exactly: `div H̄ⁿ = (uⁿ − uⁿ⁻¹)/Δtⁿ`.
pub fn trajectory_tensors(times: &[f64], u: &[VectorField]) -> Result<Vec<StaggeredTensor>> {
    check_lengths(times, u.len())?;
    let g = *u[0].grid();
    if u.len() == 1 {
        return Ok(vec![StaggeredTensor::zeros(&g)]);
    }
    let bars: Vec<StaggeredTensor> = (1..u.len())
        .into_par_iter()
        .map(|n| tensor_potential(&u[n].sub(&u[n - 1]).scaled(1.0 / (times[n] - times[n - 1]))))
        .collect();
    let mut out = Vec::with_capacity(u.len());
    out.push(bars[0].clone());
    for b in &bars {
        let prev = out.last().expect("non-empty");
        let next = b.lincomb(2.0, prev, -1.0);
        out.push(next);
    }
    Ok(out)
}

/// How `π̃₀` is obtained from `F = div div ∫H`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PiZeroMethod {
    /// `Δ_h ℒ F` with `ℒ` the clamped bi-Laplace solve.
    #[default]
    BiLaplace,
    /// `Δ_N⁻¹ F` (Neumann), which makes the reconstructed weak form exact
    /// for every probe.
    Neumann,
}

#[derive(Debug, Clone)]
pub struct PressureOptions {
    /// Relative tolerance for the divergence-free weak relation.
    pub weak_tol: f64,
    pub pi0_method: PiZeroMethod,
    /// Exponents `r` for the `π_h` bound.
    pub r_exponents: Vec<f64>,
    /// Exponent `q` for the `π₀` bound.
    pub q_exponent: f64,
    /// Half-widths of the nested boxes `Ω′ ⋐ Ω″` as fractions of the
    /// domain, centred in the domain.
    pub interior: (f64, f64),
    /// Random probes for the reconstructed weak form.
    pub probes: usize,
}

impl Default for PressureOptions {
    fn default() -> Self {
        PressureOptions {
            weak_tol: 1e-8,
            pi0_method: PiZeroMethod::BiLaplace,
            r_exponents: vec![2.0, 1.5],
            q_exponent: 2.0,
            interior: (0.25, 0.4),
            probes: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PressureReport {
    /// `max_n ‖P((uⁿ − uⁿ⁻¹)/Δt − div H̄ⁿ)‖ / scale`.
    pub weak_relation_residual: f64,
    /// `max_n max |Δπ_hⁿ + div(uⁿ − u⁰)|`.
    pub poisson_residual: f64,
    pub max_abs_mean_pi_h: f64,
    /// `(r, ‖π_h‖_{L∞(Lʳ)} / (‖H‖_{Lʳ(Q)} + ‖u‖_{L∞(L²)}))`.
    pub ratio_pi_h: Vec<(f64, f64)>,
    /// `(q, ‖π₀‖_{L^q(Q)} / ‖H‖_{L^q(Q)})`.
    pub ratio_pi_0: (f64, f64),
    /// `max_n ‖D²π_h‖_{L²(Ω′)} / (‖π_h‖_{L²(Ω″)} + ‖div(u − u₀)‖_{L²(Ω″)})`.
    pub interior_ratio: f64,
    /// Relative residual of `⟨u_t, η⟩ + ⟨H̄, ∇η⟩ − ⟨π₀ + ∂_tπ_h, div η⟩`
    /// over random probes.
    pub reconstructed_residual: f64,
    /// `max |π₀ − π₁ − π₂|` when a split was given.
    pub split_defect: Option<f64>,
}

impl PressureReport {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "weak_relation_residual = {:e}", self.weak_relation_residual);
        let _ = writeln!(s, "poisson_residual = {:e}", self.poisson_residual);
        let _ = writeln!(s, "max_abs_mean_pi_h = {:e}", self.max_abs_mean_pi_h);
        for (r, v) in &self.ratio_pi_h {
            let _ = writeln!(s, "ratio_pi_h_r{r} = {v:e}");
        }
        let _ = writeln!(s, "ratio_pi_0_q{} = {:e}", self.ratio_pi_0.0, self.ratio_pi_0.1);
        let _ = writeln!(s, "interior_ratio = {:e}", self.interior_ratio);
        let _ = writeln!(s, "reconstructed_residual = {:e}", self.reconstructed_residual);
        if let Some(d) = self.split_defect {
            let _ = writeln!(s, "split_defect = {d:e}");
        }
        s
    }
}

#[derive(Debug, Clone)]
pub struct PressureDecomposition {
    pub times: Vec<f64>,
    pub pi_h: Vec<ScalarField>,
    pub pi_0: Vec<ScalarField>,
    pub pi_1: Option<Vec<ScalarField>>,
    pub pi_2: Option<Vec<ScalarField>>,
    pub report: PressureReport,
}

fn check_lengths(times: &[f64], n: usize) -> Result<()> {
    if n == 0 || times.len() != n {
        return Err(Error::Incompatible(format!("{} time levels for {} fields", times.len(), n)));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Incompatible("time levels must increase strictly".into()));
    }
    Ok(())
}

/// Solves `Δ_h u = f` for a discrete divergence `f`; its mean is round-off
/// only, so it is removed rather than tested.
fn poisson_of_divergence(projector: &Projector, mut f: ScalarField) -> Result<ScalarField> {
    f.subtract_mean();
    projector.poisson(&f)
}

struct PiZero<'a> {
    method: PiZeroMethod,
    projector: &'a Projector,
    bilap: Option<BiharmonicSolver>,
}

impl PiZero<'_> {
    /// `π̃₀` for an accumulated tensor `G`.
    fn tilde(&self, gacc: &StaggeredTensor) -> Result<ScalarField> {
        let f = divergence(&gacc.divergence());
        match (self.method, &self.bilap) {
            (PiZeroMethod::BiLaplace, Some(s)) => Ok(laplacian(&s.solve(&cells_to_nodes(&f))?.to_cells())),
            _ => poisson_of_divergence(self.projector, f),
        }
    }

    /// `π₀ⁿ` by backward differences of `π̃₀` at the trapezoid accumulations.
    fn series(&self, times: &[f64], h: &[StaggeredTensor]) -> Result<Vec<ScalarField>> {
        let mut acc = Vec::with_capacity(h.len());
        acc.push(StaggeredTensor::zeros(h[0].grid()));
        for n in 1..h.len() {
            let dt = times[n] - times[n - 1];
            let bar = h[n - 1].lincomb(0.5 * dt, &h[n], 0.5 * dt);
            let next = acc[n - 1].add(&bar);
            acc.push(next);
        }
        let tilde: Vec<ScalarField> = acc.par_iter().map(|g| self.tilde(g)).collect::<Result<_>>()?;
        let mut out = Vec::with_capacity(h.len());
        // No backward difference exists at t₀; use the pointwise value.
        out.push(self.tilde(&h[0])?);
        for n in 1..h.len() {
            out.push(tilde[n].sub(&tilde[n - 1]).scaled(1.0 / (times[n] - times[n - 1])));
        }
        Ok(out)
    }
}

/// Space-time `(Σ_{n≥1} Δtⁿ ‖fⁿ‖_q^q)^{1/q}`.
fn spacetime_norm(times: &[f64], norms: impl Iterator<Item = f64>, q: f64) -> f64 {
    let s: f64 = norms.skip(1).zip(times.windows(2)).map(|(v, w)| (w[1] - w[0]) * v.powf(q)).sum();
    s.powf(1.0 / q)
}

/// Decomposes the pressure of a trajectory. `split`, when given, must sum
/// to `h` level by level.
pub fn pressure_decompose(
    times: &[f64],
    u: &[VectorField],
    h: &[StaggeredTensor],
    split: Option<(&[StaggeredTensor], &[StaggeredTensor])>,
    opts: &PressureOptions,
) -> Result<PressureDecomposition> {
    check_lengths(times, u.len())?;
    check_lengths(times, h.len())?;
    let g = *u[0].grid();
    for f in u {
        g.check_same(f.grid())?;
    }
    for t in h {
        g.check_same(t.grid())?;
    }
    if let Some((a, b)) = split {
        check_lengths(times, a.len())?;
        check_lengths(times, b.len())?;
    }
    let projector = Projector::new(&g);
    let levels = u.len();

    // Weak relation on divergence-free probes.
    let increments: Vec<(VectorField, VectorField)> = (1..levels)
        .map(|n| {
            let dt = times[n] - times[n - 1];
            let du = u[n].sub(&u[n - 1]).scaled(1.0 / dt);
            let hbar = h[n - 1].lincomb(0.5, &h[n], 0.5);
            (du, hbar.divergence())
        })
        .collect();
    let weak: Vec<f64> = increments
        .par_iter()
        .map(|(du, dh)| {
            let r = projector.project(&du.sub(dh))?;
            let scale = du.norm_l2() + dh.norm_l2();
            Ok(if scale > 0.0 { r.norm_l2() / scale } else { 0.0 })
        })
        .collect::<Result<_>>()?;
    let weak_relation_residual = weak.iter().copied().fold(0.0, f64::max);
    if weak_relation_residual > opts.weak_tol {
        return Err(Error::Incompatible(format!(
            "weak relation violated: relative residual {weak_relation_residual:e} > {:e}",
            opts.weak_tol
        )));
    }

    // π_h.
    let pi_h: Vec<ScalarField> = u
        .par_iter()
        .map(|un| poisson_of_divergence(&projector, divergence(&un.sub(&u[0])).scaled(-1.0)))
        .collect::<Result<_>>()?;
    let mut poisson_residual: f64 = 0.0;
    let mut max_abs_mean_pi_h: f64 = 0.0;
    for (p, un) in pi_h.iter().zip(u) {
        let r = laplacian(p).add(&divergence(&un.sub(&u[0])));
        poisson_residual = poisson_residual.max(r.max_abs());
        max_abs_mean_pi_h = max_abs_mean_pi_h.max(p.mean().abs());
    }

    // π₀ and the split.
    let pz = PiZero {
        method: opts.pi0_method,
        projector: &projector,
        bilap: match opts.pi0_method {
            PiZeroMethod::BiLaplace => Some(BiharmonicSolver::new(&g)?),
            PiZeroMethod::Neumann => None,
        },
    };
    let pi_0 = pz.series(times, h)?;
    let (pi_1, pi_2, split_defect) = match split {
        Some((h1, h2)) => {
            let p1 = pz.series(times, h1)?;
            let p2 = pz.series(times, h2)?;
            let d = pi_0
                .iter()
                .zip(p1.iter().zip(&p2))
                .map(|(a, (b, c))| a.sub(b).sub(c).max_abs())
                .fold(0.0, f64::max);
            (Some(p1), Some(p2), Some(d))
        }
        None => (None, None, None),
    };

    // Norm ratios.
    let u_inf_l2 = u.iter().map(VectorField::norm_l2).fold(0.0, f64::max);
    let ratio_pi_h = opts
        .r_exponents
        .iter()
        .map(|&r| {
            let num = pi_h.iter().map(|p| p.norm_lq(r)).fold(0.0, f64::max);
            let den = spacetime_norm(times, h.iter().map(|t| t.norm_lq(r)), r) + u_inf_l2;
            (r, if den > 0.0 { num / den } else { 0.0 })
        })
        .collect();
    let q = opts.q_exponent;
    let num = spacetime_norm(times, pi_0.iter().map(|p| p.norm_lq(q)), q);
    let den = spacetime_norm(times, h.iter().map(|t| t.norm_lq(q)), q);
    let ratio_pi_0 = (q, if den > 0.0 { num / den } else { 0.0 });

    let interior_ratio = pi_h
        .iter()
        .zip(u)
        .map(|(p, un)| interior_ratio(p, &divergence(&un.sub(&u[0])), opts.interior))
        .fold(0.0, f64::max);

    let reconstructed_residual =
        reconstructed_residual(&g, times, &increments, &pi_h, &pi_0, opts.probes);

    Ok(PressureDecomposition {
        times: times.to_vec(),
        pi_h,
        pi_0,
        pi_1,
        pi_2,
        report: PressureReport {
            weak_relation_residual,
            poisson_residual,
            max_abs_mean_pi_h,
            ratio_pi_h,
            ratio_pi_0,
            interior_ratio,
            reconstructed_residual,
            split_defect,
        },
    })
}

fn reconstructed_residual(
    g: &Grid,
    times: &[f64],
    increments: &[(VectorField, VectorField)],
    pi_h: &[ScalarField],
    pi_0: &[ScalarField],
    probes: usize,
) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let etas: Vec<VectorField> = (0..probes)
        .map(|_| {
            let mut e = VectorField::zeros(g);
            e.data_mut().iter_mut().for_each(|x| *x = rng.gen_range(-1.0..1.0));
            e.enforce_walls();
            e
        })
        .collect();
    let mut worst: f64 = 0.0;
    for (k, (du, dh)) in increments.iter().enumerate() {
        let n = k + 1;
        let dt = times[n] - times[n - 1];
        let dpih = pi_h[n].sub(&pi_h[n - 1]).scaled(1.0 / dt);
        for eta in &etas {
            let div_eta = divergence(eta);
            let a = du.dot(eta);
            let b = -dh.dot(eta);
            let c = pi_0[n].dot(&div_eta);
            let d = dpih.dot(&div_eta);
            let scale = a.abs() + b.abs() + c.abs() + d.abs();
            if scale > 0.0 {
                worst = worst.max((a + b - c - d).abs() / scale);
            }
        }
    }
    worst
}

/// Interior second-derivative bound of `π` on nested centred boxes.
fn interior_ratio(p: &ScalarField, src: &ScalarField, (inner, outer): (f64, f64)) -> f64 {
    let g = *p.grid();
    let (cx, cy) = (0.5 * g.lx(), 0.5 * g.ly());
    let inside = |i: usize, j: usize, frac: f64| {
        let (x, y) = g.cell_center(i, j);
        (x - cx).abs() <= frac * g.lx() && (y - cy).abs() <= frac * g.ly()
    };
    let (nx, ny) = (g.nx, g.ny);
    let mut d2 = 0.0;
    let mut l2 = 0.0;
    let mut s2 = 0.0;
    for j in 0..ny {
        for i in 0..nx {
            if inside(i, j, outer) {
                l2 += p.get(i, j).powi(2);
                s2 += src.get(i, j).powi(2);
            }
            if inside(i, j, inner) && i > 0 && j > 0 && i + 1 < nx && j + 1 < ny {
                let c = p.get(i, j);
                let dxx = (p.get(i + 1, j) - 2.0 * c + p.get(i - 1, j)) / (g.dx * g.dx);
                let dyy = (p.get(i, j + 1) - 2.0 * c + p.get(i, j - 1)) / (g.dy * g.dy);
                let dxy = (p.get(i + 1, j + 1) - p.get(i - 1, j + 1) - p.get(i + 1, j - 1) + p.get(i - 1, j - 1))
                    / (4.0 * g.dx * g.dy);
                d2 += dxx * dxx + dyy * dyy + 2.0 * dxy * dxy;
            }
        }
    }
    let a = g.cell_area();
    let den = (l2 * a).sqrt() + (s2 * a).sqrt();
    if den > 0.0 {
        (d2 * a).sqrt() / den
    } else {
        0.0
    }
}
