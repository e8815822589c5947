//! Second-order MAC stencils. `laplacian` is literally `divergence ∘
//! gradient`, so the discrete Green identities hold exactly.

use super::field::node_weight;
use super::{CellVector, Grid, NodeField, ScalarField, TensorField, VectorField};
use crate::error::Result;

#[inline]
fn prev(i: usize, n: usize) -> usize {
    if i == 0 {
        n - 1
    } else {
        i - 1
    }
}

#[inline]
fn next(i: usize, n: usize) -> usize {
    if i + 1 == n {
        0
    } else {
        i + 1
    }
}

/// Face-normal differences of a cell field. Wall faces get zero, which is
/// the homogeneous Neumann condition.
pub fn gradient(f: &ScalarField) -> VectorField {
    let g = *f.grid();
    let (nx, ny, nux) = (g.nx, g.ny, g.nux());
    let mut out = VectorField::zeros(&g);
    let (u, v) = out.parts_mut();
    for j in 0..ny {
        for i in 0..nux {
            if !g.xface_active(i) {
                continue;
            }
            let left = if g.periodic() { prev(i, nx) } else { i - 1 };
            u[j * nux + i] = (f.get(i, j) - f.get(left, j)) / g.dx;
        }
    }
    for j in 0..g.nvy() {
        if !g.yface_active(j) {
            continue;
        }
        let below = if g.periodic() { prev(j, ny) } else { j - 1 };
        for i in 0..nx {
            v[j * nx + i] = (f.get(i, j) - f.get(i, below)) / g.dy;
        }
    }
    out
}

pub fn divergence(w: &VectorField) -> ScalarField {
    let g = *w.grid();
    let (nx, ny, nux) = (g.nx, g.ny, g.nux());
    let (u, v) = (w.u(), w.v());
    let mut out = ScalarField::zeros(&g);
    let d = out.data_mut();
    for j in 0..ny {
        let jt = if g.periodic() { next(j, ny) } else { j + 1 };
        for i in 0..nx {
            let ir = if g.periodic() { next(i, nx) } else { i + 1 };
            d[j * nx + i] = (u[j * nux + ir] - u[j * nux + i]) / g.dx
                + (v[jt * nx + i] - v[j * nx + i]) / g.dy;
        }
    }
    out
}

pub fn laplacian(f: &ScalarField) -> ScalarField {
    divergence(&gradient(f))
}

/// Strain rate on its natural staggered locations: normal components at
/// cell centres, shear component at cell corners.
#[derive(Debug, Clone)]
pub struct StrainRate {
    pub grid: Grid,
    pub dxx: Vec<f64>,
    pub dyy: Vec<f64>,
    /// Node-centred `(∂u/∂y + ∂v/∂x) / 2`.
    pub dxy: Vec<f64>,
}

/// Neighbour lookups with the no-slip ghost reflection across walls.
/// Returns (index, sign); a sign of 0 means the value is pinned to zero.
#[inline]
fn u_above(g: &Grid, i: usize, j: usize) -> (usize, f64) {
    let nux = g.nux();
    if g.periodic() {
        ((j % g.ny) * nux + i, 1.0)
    } else if j < g.ny {
        (j * nux + i, 1.0)
    } else {
        ((g.ny - 1) * nux + i, -1.0)
    }
}

#[inline]
fn u_below(g: &Grid, i: usize, j: usize) -> (usize, f64) {
    let nux = g.nux();
    if g.periodic() {
        (prev(j, g.ny) * nux + i, 1.0)
    } else if j > 0 {
        ((j - 1) * nux + i, 1.0)
    } else {
        (i, -1.0)
    }
}

#[inline]
fn v_right(g: &Grid, i: usize, j: usize) -> (usize, f64) {
    if g.periodic() {
        (j * g.nx + (i % g.nx), 1.0)
    } else if i < g.nx {
        (j * g.nx + i, 1.0)
    } else {
        (j * g.nx + g.nx - 1, -1.0)
    }
}

#[inline]
fn v_left(g: &Grid, i: usize, j: usize) -> (usize, f64) {
    if g.periodic() {
        (j * g.nx + prev(i, g.nx), 1.0)
    } else if i > 0 {
        (j * g.nx + i - 1, 1.0)
    } else {
        (j * g.nx, -1.0)
    }
}

impl StrainRate {
    pub fn of(w: &VectorField) -> Self {
        let g = *w.grid();
        let (nx, ny, nux) = (g.nx, g.ny, g.nux());
        let (u, v) = (w.u(), w.v());
        let mut dxx = vec![0.0; nx * ny];
        let mut dyy = vec![0.0; nx * ny];
        for j in 0..ny {
            let jt = if g.periodic() { next(j, ny) } else { j + 1 };
            for i in 0..nx {
                let ir = if g.periodic() { next(i, nx) } else { i + 1 };
                dxx[j * nx + i] = (u[j * nux + ir] - u[j * nux + i]) / g.dx;
                dyy[j * nx + i] = (v[jt * nx + i] - v[j * nx + i]) / g.dy;
            }
        }
        let (na, nb) = g.node_dims();
        let mut dxy = vec![0.0; na * nb];
        for j in 0..nb {
            for i in 0..na {
                let (ka, sa) = u_above(&g, i, j);
                let (kb, sb) = u_below(&g, i, j);
                let (kr, sr) = v_right(&g, i, j);
                let (kl, sl) = v_left(&g, i, j);
                let uy = (sa * u[ka] - sb * u[kb]) / g.dy;
                let vx = (sr * v[kr] - sl * v[kl]) / g.dx;
                dxy[j * na + i] = 0.5 * (uy + vx);
            }
        }
        StrainRate { grid: g, dxx, dyy, dxy }
    }

    /// Shear component averaged to cell centres.
    pub fn dxy_at_cells(&self) -> Vec<f64> {
        let g = &self.grid;
        let (na, nb) = g.node_dims();
        let mut out = vec![0.0; g.n_cells()];
        for j in 0..g.ny {
            let j1 = (j + 1) % nb;
            for i in 0..g.nx {
                let i1 = (i + 1) % na;
                out[j * g.nx + i] = 0.25
                    * (self.dxy[j * na + i]
                        + self.dxy[j * na + i1]
                        + self.dxy[j1 * na + i]
                        + self.dxy[j1 * na + i1]);
            }
        }
        out
    }

    /// Normal part `dxx² + dyy²` averaged from the adjacent cells to nodes.
    pub fn normal_sq_at_nodes(&self) -> Vec<f64> {
        let g = &self.grid;
        let (na, nb) = g.node_dims();
        let mut out = vec![0.0; na * nb];
        for j in 0..nb {
            for i in 0..na {
                let mut s = 0.0;
                let mut c = 0.0;
                for (ci, cj) in adjacent_cells(g, i, j) {
                    let k = cj * g.nx + ci;
                    s += self.dxx[k].powi(2) + self.dyy[k].powi(2);
                    c += 1.0;
                }
                out[j * na + i] = s / c;
            }
        }
        out
    }

    /// `∑ w (Sxx Dxx + Syy Dyy) + ∑ ω 2 Sxy Dxy` with cell area weighting and
    /// trapezoid node weights ω: the quadrature of `S : D` that the viscous
    /// operator is the gradient of.
    pub fn pair(&self, sxx: &[f64], syy: &[f64], sxy: &[f64]) -> f64 {
        let g = &self.grid;
        let mut s = 0.0;
        for k in 0..g.n_cells() {
            s += sxx[k] * self.dxx[k] + syy[k] * self.dyy[k];
        }
        let (na, nb) = g.node_dims();
        for j in 0..nb {
            for i in 0..na {
                let k = j * na + i;
                s += 2.0 * node_weight(g, i, j) * sxy[k] * self.dxy[k];
            }
        }
        s * g.cell_area()
    }
}

/// Cells touching node (i, j).
pub(crate) fn adjacent_cells(g: &Grid, i: usize, j: usize) -> impl Iterator<Item = (usize, usize)> {
    let (nx, ny) = (g.nx, g.ny);
    let periodic = g.periodic();
    let xs: [Option<usize>; 2] = if periodic {
        [Some(prev(i, nx)), Some(i % nx)]
    } else {
        [i.checked_sub(1), if i < nx { Some(i) } else { None }]
    };
    let ys: [Option<usize>; 2] = if periodic {
        [Some(prev(j, ny)), Some(j % ny)]
    } else {
        [j.checked_sub(1), if j < ny { Some(j) } else { None }]
    };
    ys.into_iter()
        .flatten()
        .flat_map(move |cj| xs.into_iter().flatten().map(move |ci| (ci, cj)))
}

/// Discrete `div S` for a stress given on the strain-rate locations. It is
/// the negative adjoint of [`StrainRate::of`] under the quadrature of
/// [`StrainRate::pair`], so `⟨div S, w⟩ = −⟨S, D w⟩` holds to rounding.
/// Wall faces are left at zero.
pub fn stress_divergence(g: &Grid, sxx: &[f64], syy: &[f64], sxy: &[f64]) -> VectorField {
    let (nx, ny, nux) = (g.nx, g.ny, g.nux());
    let mut out = VectorField::zeros(g);
    let (ru, rv) = out.parts_mut();
    for j in 0..ny {
        let jt = if g.periodic() { next(j, ny) } else { j + 1 };
        for i in 0..nx {
            let ir = if g.periodic() { next(i, nx) } else { i + 1 };
            let k = j * nx + i;
            let sx = sxx[k] / g.dx;
            ru[j * nux + ir] -= sx;
            ru[j * nux + i] += sx;
            let sy = syy[k] / g.dy;
            rv[jt * nx + i] -= sy;
            rv[j * nx + i] += sy;
        }
    }
    let (na, nb) = g.node_dims();
    for j in 0..nb {
        for i in 0..na {
            let s = node_weight(g, i, j) * sxy[j * na + i];
            if s == 0.0 {
                continue;
            }
            let (ka, sa) = u_above(g, i, j);
            let (kb, sb) = u_below(g, i, j);
            let (kr, sr) = v_right(g, i, j);
            let (kl, sl) = v_left(g, i, j);
            ru[ka] -= sa * s / g.dy;
            ru[kb] += sb * s / g.dy;
            rv[kr] -= sr * s / g.dx;
            rv[kl] += sl * s / g.dx;
        }
    }
    out.enforce_walls();
    out
}

/// Cell-centred symmetric gradient `(∇u + ∇uᵀ)/2`.
pub fn sym_gradient(w: &VectorField) -> TensorField {
    let d = StrainRate::of(w);
    let mut out = TensorField::zeros(w.grid());
    let xy = d.dxy_at_cells();
    out.xx = d.dxx;
    out.yy = d.dyy;
    out.yx = xy.clone();
    out.xy = xy;
    out
}

/// Arithmetic average of the two adjacent cells on every face (one-sided on
/// walls).
pub fn cell_to_faces(f: &ScalarField) -> VectorField {
    let g = *f.grid();
    let (nx, ny, nux) = (g.nx, g.ny, g.nux());
    let mut out = VectorField::zeros(&g);
    let (u, v) = out.parts_mut();
    for j in 0..ny {
        for i in 0..nux {
            let a = if g.periodic() { prev(i, nx) } else { i.saturating_sub(1) };
            let b = if g.periodic() { i } else { i.min(nx - 1) };
            u[j * nux + i] = 0.5 * (f.get(a, j) + f.get(b, j));
        }
    }
    for j in 0..g.nvy() {
        let a = if g.periodic() { prev(j, ny) } else { j.saturating_sub(1) };
        let b = if g.periodic() { j } else { j.min(ny - 1) };
        for i in 0..nx {
            v[j * nx + i] = 0.5 * (f.get(i, a) + f.get(i, b));
        }
    }
    out
}

pub fn faces_to_cells(w: &VectorField) -> CellVector {
    let g = *w.grid();
    let (nx, ny, nux) = (g.nx, g.ny, g.nux());
    let (u, v) = (w.u(), w.v());
    let mut out = CellVector::zeros(&g);
    for j in 0..ny {
        let jt = if g.periodic() { next(j, ny) } else { j + 1 };
        for i in 0..nx {
            let ir = if g.periodic() { next(i, nx) } else { i + 1 };
            out.x.set(i, j, 0.5 * (u[j * nux + i] + u[j * nux + ir]));
            out.y.set(i, j, 0.5 * (v[j * nx + i] + v[jt * nx + i]));
        }
    }
    out
}

/// Discrete curl of a node streamfunction: `(∂ψ/∂y, −∂ψ/∂x)` on faces.
/// The result is divergence free to rounding; on physical grids `ψ` should
/// be constant along the boundary for the wall faces to vanish.
pub fn curl_of_nodes(psi: &NodeField) -> Result<VectorField> {
    let g = *psi.grid();
    let (nx, ny, nux) = (g.nx, g.ny, g.nux());
    let nb = g.nvy();
    let mut out = VectorField::zeros(&g);
    let (u, v) = out.parts_mut();
    for j in 0..ny {
        let j1 = (j + 1) % nb;
        for i in 0..nux {
            if g.xface_active(i) {
                u[j * nux + i] = (psi.get(i, j1) - psi.get(i, j)) / g.dy;
            }
        }
    }
    for j in 0..nb {
        if !g.yface_active(j) {
            continue;
        }
        for i in 0..nx {
            let i1 = (i + 1) % nux;
            v[j * nx + i] = -(psi.get(i1, j) - psi.get(i, j)) / g.dx;
        }
    }
    Ok(out)
}

/// Five-point Laplacian at interior nodes of a physical grid, boundary nodes
/// left at zero. Periodic grids wrap.
pub fn node_laplacian(f: &NodeField) -> NodeField {
    let g = *f.grid();
    let (na, nb) = g.node_dims();
    let mut out = NodeField::zeros(&g);
    for j in 0..nb {
        for i in 0..na {
            let (il, ir, jb, jt) = if g.periodic() {
                (prev(i, na), next(i, na), prev(j, nb), next(j, nb))
            } else {
                if i == 0 || j == 0 || i + 1 == na || j + 1 == nb {
                    continue;
                }
                (i - 1, i + 1, j - 1, j + 1)
            };
            let c = f.get(i, j);
            let val = (f.get(ir, j) - 2.0 * c + f.get(il, j)) / (g.dx * g.dx)
                + (f.get(i, jt) - 2.0 * c + f.get(i, jb)) / (g.dy * g.dy);
            out.set(i, j, val);
        }
    }
    out
}

/// Cell-centred full velocity gradient, `t.xy = ∂u/∂y`, `t.yx = ∂v/∂x`.
/// Cross derivatives are formed at nodes (with the no-slip reflection) and
/// averaged to cells.
pub fn velocity_gradient(w: &VectorField) -> TensorField {
    let g = *w.grid();
    let (u, v) = (w.u(), w.v());
    let (na, nb) = g.node_dims();
    let mut uy = vec![0.0; na * nb];
    let mut vx = vec![0.0; na * nb];
    for j in 0..nb {
        for i in 0..na {
            let (ka, sa) = u_above(&g, i, j);
            let (kb, sb) = u_below(&g, i, j);
            let (kr, sr) = v_right(&g, i, j);
            let (kl, sl) = v_left(&g, i, j);
            uy[j * na + i] = (sa * u[ka] - sb * u[kb]) / g.dy;
            vx[j * na + i] = (sr * v[kr] - sl * v[kl]) / g.dx;
        }
    }
    let d = StrainRate::of(w);
    let avg = |f: &[f64], i: usize, j: usize| {
        let (i1, j1) = ((i + 1) % na, (j + 1) % nb);
        0.25 * (f[j * na + i] + f[j * na + i1] + f[j1 * na + i] + f[j1 * na + i1])
    };
    let mut out = TensorField::zeros(&g);
    for j in 0..g.ny {
        for i in 0..g.nx {
            let k = j * g.nx + i;
            out.xx[k] = d.dxx[k];
            out.yy[k] = d.dyy[k];
            out.xy[k] = avg(&uy, i, j);
            out.yx[k] = avg(&vx, i, j);
        }
    }
    out
}
