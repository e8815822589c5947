//! Divergence equation on a disk with zero boundary values: the
//! minimiser of `½‖∇w‖²` subject to `div w = f` in the disk, `w = 0`
//! outside it. Solved by conjugate gradients on the pressure Schur
//! complement `B A⁻¹ Bᵀ`, with `A` the masked vector Laplacian.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::grid::{pcg, CgOptions, Grid, ScalarField, VectorField};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ball {
    pub cx: f64,
    pub cy: f64,
    pub r: f64,
}

impl Ball {
    /// Centred disk of radius `frac · min(Lx, Ly)/2`.
    pub fn centred(g: &Grid, frac: f64) -> Self {
        Ball { cx: 0.5 * g.lx(), cy: 0.5 * g.ly(), r: 0.5 * frac * g.lx().min(g.ly()) }
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        (x - self.cx).hypot(y - self.cy) < self.r
    }
}

#[derive(Debug, Clone, Copy)]
pub struct BogovskiiOptions {
    /// Relative tolerance of the outer (Schur) iteration.
    pub tol: f64,
    pub max_iter: usize,
    pub inner_tol: f64,
    pub inner_max_iter: usize,
}

impl Default for BogovskiiOptions {
    fn default() -> Self {
        BogovskiiOptions { tol: 1e-12, max_iter: 500, inner_tol: 1e-14, inner_max_iter: 20_000 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BogovskiiReport {
    /// `max |div w − f|` over all cells.
    pub div_residual: f64,
    /// `‖w‖_{H¹} / ‖f‖_{L²}`.
    pub h1_ratio: f64,
    pub outer_iterations: usize,
    pub inner_iterations: usize,
    pub ball_cells: usize,
    pub active_faces: usize,
}

impl BogovskiiReport {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "div_residual = {:e}", self.div_residual);
        let _ = writeln!(s, "h1_ratio = {:e}", self.h1_ratio);
        let _ = writeln!(s, "outer_iterations = {}", self.outer_iterations);
        let _ = writeln!(s, "inner_iterations = {}", self.inner_iterations);
        s
    }
}

/// Cells of the disk and the faces between two of them.
struct Mask {
    g: Grid,
    cells: Vec<usize>,
    cell_pos: Vec<Option<usize>>,
    /// Index into `VectorField::data`.
    faces: Vec<usize>,
    /// Neighbouring active faces of the same component and the inverse
    /// squared spacing towards each, `(E, W, N, S)`.
    nbrs: Vec<[(Option<usize>, f64); 4]>,
    diag: Vec<f64>,
}

impl Mask {
    fn new(g: &Grid, ball: &Ball) -> Self {
        let (nx, ny, nux, nvy) = (g.nx, g.ny, g.nux(), g.nvy());
        let p = g.periodic();
        let mut cell_pos = vec![None; nx * ny];
        let mut cells = Vec::new();
        for j in 0..ny {
            for i in 0..nx {
                let (x, y) = g.cell_center(i, j);
                if ball.contains(x, y) {
                    cell_pos[j * nx + i] = Some(cells.len());
                    cells.push(j * nx + i);
                }
            }
        }
        let inside = |i: usize, j: usize| cell_pos[j * nx + i].is_some();
        let nu = nux * ny;
        let mut face_pos = vec![None; nu + nx * nvy];
        let mut faces = Vec::new();
        for j in 0..ny {
            for i in 0..nux {
                if !g.xface_active(i) {
                    continue;
                }
                let l = if p { (i + nx - 1) % nx } else { i - 1 };
                if inside(l, j) && inside(i % nx, j) {
                    face_pos[j * nux + i] = Some(faces.len());
                    faces.push(j * nux + i);
                }
            }
        }
        for j in 0..nvy {
            if !g.yface_active(j) {
                continue;
            }
            let b = if p { (j + ny - 1) % ny } else { j - 1 };
            for i in 0..nx {
                if inside(i, b) && inside(i, j % ny) {
                    face_pos[nu + j * nx + i] = Some(faces.len());
                    faces.push(nu + j * nx + i);
                }
            }
        }
        let (hx, hy) = (1.0 / (g.dx * g.dx), 1.0 / (g.dy * g.dy));
        let step = |k: usize, len: usize, d: isize| -> Option<usize> {
            let m = k as isize + d;
            if p {
                Some(m.rem_euclid(len as isize) as usize)
            } else if m < 0 || m >= len as isize {
                None
            } else {
                Some(m as usize)
            }
        };
        let mut nbrs = Vec::with_capacity(faces.len());
        for &f in &faces {
            let (off, w, h, i, j) = if f < nu {
                (0, nux, ny, f % nux, f / nux)
            } else {
                (nu, nx, nvy, (f - nu) % nx, (f - nu) / nx)
            };
            let at = |ii: Option<usize>, jj: Option<usize>| match (ii, jj) {
                (Some(a), Some(b)) => face_pos[off + b * w + a],
                _ => None,
            };
            nbrs.push([
                (at(step(i, w, 1), Some(j)), hx),
                (at(step(i, w, -1), Some(j)), hx),
                (at(Some(i), step(j, h, 1)), hy),
                (at(Some(i), step(j, h, -1)), hy),
            ]);
        }
        let diag = vec![2.0 * (hx + hy); faces.len()];
        Mask { g: *g, cells, cell_pos, faces, nbrs, diag }
    }

    fn expand_faces(&self, w: &[f64]) -> VectorField {
        let mut out = VectorField::zeros(&self.g);
        let d = out.data_mut();
        for (k, &f) in self.faces.iter().enumerate() {
            d[f] = w[k];
        }
        out
    }

    /// `A w = −Δ_h w` with zero values off the mask.
    fn apply_a(&self, w: &[f64], y: &mut [f64]) {
        for (k, nb) in self.nbrs.iter().enumerate() {
            let mut s = self.diag[k] * w[k];
            for &(n, c) in nb {
                if let Some(n) = n {
                    s -= c * w[n];
                }
            }
            y[k] = s;
        }
    }

    /// `B w = div w` on the disk cells.
    fn apply_b(&self, w: &[f64]) -> Vec<f64> {
        let d = crate::grid::divergence(&self.expand_faces(w));
        self.cells.iter().map(|&c| d.data()[c]).collect()
    }

    /// `Bᵀ p = −∇p` on the active faces.
    fn apply_bt(&self, p: &[f64]) -> Vec<f64> {
        let mut f = ScalarField::zeros(&self.g);
        for (k, &c) in self.cells.iter().enumerate() {
            f.data_mut()[c] = p[k];
        }
        let gp = crate::grid::gradient(&f);
        self.faces.iter().map(|&i| -gp.data()[i]).collect()
    }
}

/// Solves `div w = f` in the disk with `w = 0` outside. `f` must vanish
/// outside the disk and have zero mean over it.
pub fn bogovskii_solve(f: &ScalarField, ball: &Ball) -> Result<(VectorField, BogovskiiReport)> {
    bogovskii_solve_with(f, ball, &BogovskiiOptions::default())
}

pub fn bogovskii_solve_with(
    f: &ScalarField,
    ball: &Ball,
    opts: &BogovskiiOptions,
) -> Result<(VectorField, BogovskiiReport)> {
    let g = *f.grid();
    if !(ball.r > 0.0) {
        return Err(Error::invalid("ball.r", format!("radius must be positive, got {}", ball.r)));
    }
    if !g.periodic()
        && (ball.cx - ball.r < 0.0 || ball.cy - ball.r < 0.0 || ball.cx + ball.r > g.lx() || ball.cy + ball.r > g.ly())
    {
        return Err(Error::invalid("ball", "disk must lie inside the domain"));
    }
    let mask = Mask::new(&g, ball);
    if mask.cells.len() < 4 || mask.faces.is_empty() {
        return Err(Error::invalid("ball", format!("disk covers only {} cells", mask.cells.len())));
    }
    let fmax = f.max_abs();
    let outside = f
        .data()
        .iter()
        .enumerate()
        .filter(|(k, _)| mask.cell_pos[*k].is_none())
        .map(|(_, v)| v.abs())
        .fold(0.0, f64::max);
    if outside > 1e-14 * fmax {
        return Err(Error::Incompatible(format!("right-hand side is {outside:e} outside the disk")));
    }
    let fb: Vec<f64> = mask.cells.iter().map(|&c| f.data()[c]).collect();
    let nb = fb.len() as f64;
    let mean = fb.iter().sum::<f64>() / nb;
    let rms = (fb.iter().map(|v| v * v).sum::<f64>() / nb).sqrt();
    if mean.abs() > 1e-10 * rms {
        return Err(Error::Incompatible(format!("right-hand side has mean {mean:e} over the disk (rms {rms:e})")));
    }
    let nf = mask.faces.len();
    let inner = CgOptions { rel_tol: opts.inner_tol, max_iter: opts.inner_max_iter, zero_mean: false };
    let jacobi = |r: &[f64], z: &mut [f64]| {
        for k in 0..r.len() {
            z[k] = r[k] / mask.diag[k];
        }
    };
    let solve_a = |rhs: &[f64], inner_its: &mut usize| -> Result<Vec<f64>> {
        let mut x = vec![0.0; nf];
        let st = pcg(|a, y| mask.apply_a(a, y), jacobi, rhs, &mut x, inner);
        *inner_its += st.iterations;
        // Tolerances near machine precision may stall just short; accept
        // anything within a few ulps of the target.
        if !st.converged && st.residual > 1e3 * opts.inner_tol {
            st.check("bogovskii-inner")?;
        }
        Ok(x)
    };

    let mut inner_its = 0usize;
    let mut failure: Option<Error> = None;
    let neg_f: Vec<f64> = fb.iter().map(|v| -(v - mean)).collect();
    let mut lambda = vec![0.0; fb.len()];
    let outer = pcg(
        |p, y| {
            if failure.is_some() {
                y.iter_mut().for_each(|v| *v = 0.0);
                return;
            }
            match solve_a(&mask.apply_bt(p), &mut inner_its) {
                Ok(x) => y.copy_from_slice(&mask.apply_b(&x)),
                Err(e) => {
                    failure = Some(e);
                    y.iter_mut().for_each(|v| *v = 0.0);
                }
            }
        },
        |r, z| z.copy_from_slice(r),
        &neg_f,
        &mut lambda,
        CgOptions { rel_tol: opts.tol, max_iter: opts.max_iter, zero_mean: true },
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let outer = outer.check("bogovskii-schur")?;
    let mut w = solve_a(&mask.apply_bt(&lambda), &mut inner_its)?;
    w.iter_mut().for_each(|v| *v = -*v);

    let field = mask.expand_faces(&w);
    let div = crate::grid::divergence(&field);
    let div_residual = div.data().iter().zip(f.data()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let mut aw = vec![0.0; nf];
    mask.apply_a(&w, &mut aw);
    let area = g.cell_area();
    let semi: f64 = w.iter().zip(&aw).map(|(a, b)| a * b).sum::<f64>() * area;
    let l2: f64 = w.iter().map(|a| a * a).sum::<f64>() * area;
    let fl2 = f.norm_l2();
    let h1_ratio = if fl2 > 0.0 { (semi + l2).sqrt() / fl2 } else { 0.0 };
    Ok((
        field,
        BogovskiiReport {
            div_residual,
            h1_ratio,
            outer_iterations: outer.iterations,
            inner_iterations: inner_its,
            ball_cells: mask.cells.len(),
            active_faces: nf,
        },
    ))
}
