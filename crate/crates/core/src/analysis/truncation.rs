//! The L∞-truncation family: cutoff `ψ`, `ψ_δ(s) = ψ(δs)`,
//! `Υ_L = Σ_{ℓ=1}^{L} ψ_{2^{−ℓ}}`, `h_L(s) = ∫₀ˢ Υ_L(θ)θ dθ`,
//! `H_L(ξ) = h_L(|ξ|)`.

use std::fmt::Write as _;

use crate::grid::{cell_to_faces, faces_to_cells, Bc, CellVector, ScalarField, VectorField};

/// Quintic smoothstep on `[0, 1]`.
fn sigma(t: f64) -> f64 {
    t * t * t * (10.0 + t * (-15.0 + 6.0 * t))
}

fn dsigma(t: f64) -> f64 {
    30.0 * t * t * (1.0 - t) * (1.0 - t)
}

/// `ψ(s) = 1` on `[0, 1]`, `1 − σ(s − 1)` on `[1, 2]`, `0` beyond.
pub fn psi(s: f64) -> f64 {
    if s <= 1.0 {
        1.0
    } else if s >= 2.0 {
        0.0
    } else {
        1.0 - sigma(s - 1.0)
    }
}

pub fn psi_prime(s: f64) -> f64 {
    if s <= 1.0 || s >= 2.0 {
        0.0
    } else {
        -dsigma(s - 1.0)
    }
}

pub fn psi_delta(delta: f64, s: f64) -> f64 {
    psi(delta * s)
}

/// `∫₀ˣ ψ(τ)τ dτ` in closed form.
fn psi_moment(x: f64) -> f64 {
    if x <= 1.0 {
        0.5 * x * x
    } else {
        let u = x.min(2.0) - 1.0;
        // ∫₀ᵘ (1 − σ(t))(1 + t) dt
        let p = u + u * u / 2.0 - 2.5 * u.powi(4) + u.powi(5) + 1.5 * u.powi(6) - 6.0 / 7.0 * u.powi(7);
        0.5 + p
    }
}

pub fn upsilon(s: f64, levels: usize) -> f64 {
    (1..=levels).map(|l| psi(s / (1u64 << l) as f64)).sum()
}

pub fn upsilon_prime(s: f64, levels: usize) -> f64 {
    (1..=levels)
        .map(|l| {
            let a = 1.0 / (1u64 << l) as f64;
            a * psi_prime(a * s)
        })
        .sum()
}

/// Exact `h_L(s)`: `Σ_ℓ 4^ℓ ∫₀^{2^{−ℓ}s} ψ(τ)τ dτ`.
pub fn h_l(s: f64, levels: usize) -> f64 {
    (1..=levels)
        .map(|l| {
            let a = (1u64 << l) as f64;
            a * a * psi_moment(s / a)
        })
        .sum()
}

/// `h_L(s)` by adaptive Simpson quadrature, split at the breakpoints
/// `2^ℓ` where `Υ_L` changes formula.
pub fn h_l_adaptive(s: f64, levels: usize, tol: f64) -> f64 {
    let f = |t: f64| upsilon(t, levels) * t;
    let mut cuts = vec![0.0];
    for k in 1..=levels + 1 {
        let b = (1u64 << k) as f64;
        if b < s {
            cuts.push(b);
        }
    }
    cuts.push(s);
    cuts.windows(2).map(|w| adaptive_simpson(&f, w[0], w[1], tol, 40)).sum()
}

fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: usize) -> f64 {
    let simpson = |a: f64, b: f64| (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b));
    fn rec(
        f: &impl Fn(f64) -> f64,
        simpson: &impl Fn(f64, f64) -> f64,
        a: f64,
        b: f64,
        whole: f64,
        tol: f64,
        depth: usize,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (l, r) = (simpson(a, m), simpson(m, b));
        if depth == 0 || (l + r - whole).abs() <= 15.0 * tol {
            return l + r + (l + r - whole) / 15.0;
        }
        rec(f, simpson, a, m, l, 0.5 * tol, depth - 1) + rec(f, simpson, m, b, r, 0.5 * tol, depth - 1)
    }
    if b <= a {
        return 0.0;
    }
    rec(f, &simpson, a, b, simpson(a, b), tol, depth)
}

pub fn big_h_l(xi: [f64; 2], levels: usize) -> f64 {
    h_l(xi[0].hypot(xi[1]), levels)
}

/// Evaluator bundle for a fixed level count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TruncationFamily {
    pub levels: usize,
}

impl TruncationFamily {
    pub fn new(levels: usize) -> Self {
        assert!(levels >= 1, "need at least one level");
        TruncationFamily { levels }
    }

    pub fn psi(&self, s: f64) -> f64 {
        psi(s)
    }

    pub fn upsilon(&self, s: f64) -> f64 {
        upsilon(s, self.levels)
    }

    pub fn h(&self, s: f64) -> f64 {
        h_l(s, self.levels)
    }

    pub fn big_h(&self, xi: [f64; 2]) -> f64 {
        big_h_l(xi, self.levels)
    }
}

/// `Υ_L(|q|) q` on faces, with `|q|` taken at cell centres and the factor
/// averaged back to faces.
pub fn truncated_field(q: &VectorField, levels: usize) -> VectorField {
    let mag = faces_to_cells(q).magnitude();
    let factor = cell_to_faces(&mag.map(|s| upsilon(s, levels)));
    q.mul(&factor)
}

/// Cell-centred version of [`truncated_field`].
pub fn truncated_cell_field(q: &CellVector, levels: usize) -> CellVector {
    let f = q.magnitude().map(|s| upsilon(s, levels));
    CellVector {
        x: q.x.zip_map(&f, |a, b| a * b).expect("same grid"),
        y: q.y.zip_map(&f, |a, b| a * b).expect("same grid"),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruncationReport {
    pub levels: usize,
    /// `max |∇Υ_L(|q|)| |q| / |∇q|` over cells.
    pub measured_c: f64,
    /// `max |∇(Υ_L(|q|) q)| / |∇q|`, which grows like `L` where `|q|` is small.
    pub full_ratio: f64,
    /// Cells with `|q| ≤ 1`.
    pub below: usize,
    /// Cell counts of `A_ℓ = {2^ℓ < |q| ≤ 2^{ℓ+1}}`, `ℓ = 0..=L`.
    pub occupancy: Vec<usize>,
    /// Cells with `|q| > 2^{L+1}`.
    pub above: usize,
}

impl TruncationReport {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "levels = {}", self.levels);
        let _ = writeln!(s, "measured_c = {:e}", self.measured_c);
        let _ = writeln!(s, "full_ratio = {:e}", self.full_ratio);
        let _ = writeln!(s, "occupancy_below = {}", self.below);
        for (l, n) in self.occupancy.iter().enumerate() {
            let _ = writeln!(s, "occupancy_A{l} = {n}");
        }
        let _ = writeln!(s, "occupancy_above = {}", self.above);
        s
    }
}

/// Centred differences of a cell field; one-sided next to walls.
fn cell_gradient(f: &ScalarField) -> (Vec<f64>, Vec<f64>) {
    let g = *f.grid();
    let (nx, ny) = (g.nx, g.ny);
    let d = f.data();
    let mut gx = vec![0.0; nx * ny];
    let mut gy = vec![0.0; nx * ny];
    let periodic = g.bc == Bc::Periodic;
    let diff = |n: usize, k: usize, h: f64, at: &dyn Fn(usize) -> f64| -> f64 {
        if periodic {
            (at((k + 1) % n) - at((k + n - 1) % n)) / (2.0 * h)
        } else if k == 0 {
            (at(1) - at(0)) / h
        } else if k == n - 1 {
            (at(n - 1) - at(n - 2)) / h
        } else {
            (at(k + 1) - at(k - 1)) / (2.0 * h)
        }
    };
    for j in 0..ny {
        for i in 0..nx {
            gx[j * nx + i] = diff(nx, i, g.dx, &|ii| d[j * nx + ii]);
            gy[j * nx + i] = diff(ny, j, g.dy, &|jj| d[jj * nx + i]);
        }
    }
    (gx, gy)
}

/// Measures the constant in `|∇Υ_L(|q|)| |q| ≤ c |∇q|` on a cell field,
/// the bound that is uniform in `L`. The full product-rule ratio is kept in
/// the report.
pub fn truncation_gradient_bound(q: &VectorField, levels: usize) -> (f64, TruncationReport) {
    truncation_gradient_bound_cells(&faces_to_cells(q), levels)
}

pub fn truncation_gradient_bound_cells(q: &CellVector, levels: usize) -> (f64, TruncationReport) {
    let mag = q.magnitude();
    let ups = mag.map(|s| upsilon(s, levels));
    let (ux, uy) = cell_gradient(&ups);
    let (qxx, qxy) = cell_gradient(&q.x);
    let (qyx, qyy) = cell_gradient(&q.y);
    let t = truncated_cell_field(q, levels);
    let (txx, txy) = cell_gradient(&t.x);
    let (tyx, tyy) = cell_gradient(&t.y);
    let mut c: f64 = 0.0;
    let mut full: f64 = 0.0;
    for k in 0..mag.data().len() {
        let gq = (qxx[k].powi(2) + qxy[k].powi(2) + qyx[k].powi(2) + qyy[k].powi(2)).sqrt() + 1e-30;
        let gu = ux[k].hypot(uy[k]);
        c = c.max(gu * mag.data()[k] / gq);
        let gt = (txx[k].powi(2) + txy[k].powi(2) + tyx[k].powi(2) + tyy[k].powi(2)).sqrt();
        full = full.max(gt / gq);
    }
    let mut occupancy = vec![0usize; levels + 1];
    let (mut below, mut above) = (0, 0);
    let top = (1u64 << (levels + 1)) as f64;
    for &s in mag.data() {
        if s <= 1.0 {
            below += 1;
        } else if s > top {
            above += 1;
        } else {
            // 2^ℓ < s ≤ 2^{ℓ+1}
            let l = (s.log2().ceil() as usize).saturating_sub(1).min(levels);
            occupancy[l] += 1;
        }
    }
    let report = TruncationReport { levels, measured_c: c, full_ratio: full, below, occupancy, above };
    (c, report)
}
