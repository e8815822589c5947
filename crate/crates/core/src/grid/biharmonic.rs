//! Clamped bi-Laplacian on the node grid: `Δ²u = f` with `u = ∂_N u = 0` on
//! the boundary. Unknowns are the interior nodes; the normal derivative is
//! imposed with the even ghost reflection `u₋₁ = u₁`, which gives the
//! composed operator `Δ_h (Δ_h u)` with boundary values `w = 2u₁/h²`.
//! On periodic grids the operator is the plain iterated node Laplacian.

use super::cg::{pcg, CgOptions, CgStats};
use super::spectral::{Basis1d, BasisKind, FastDiag};
use super::{Grid, NodeField, ScalarField};
use crate::error::{Error, Result};

/// `Δ_h u` at node (i, j), treating boundary nodes with the clamped ghost.
#[inline]
fn node_lap(u: &[f64], g: &Grid, i: usize, j: usize) -> f64 {
    let (na, nb) = g.node_dims();
    let at = |a: usize, b: usize| u[b * na + a];
    let (idx2, idy2) = (1.0 / (g.dx * g.dx), 1.0 / (g.dy * g.dy));
    if g.periodic() {
        let il = (i + na - 1) % na;
        let ir = (i + 1) % na;
        let jb = (j + nb - 1) % nb;
        let jt = (j + 1) % nb;
        let c = at(i, j);
        return (at(ir, j) - 2.0 * c + at(il, j)) * idx2 + (at(i, jt) - 2.0 * c + at(i, jb)) * idy2;
    }
    let on_x = i == 0 || i + 1 == na;
    let on_y = j == 0 || j + 1 == nb;
    match (on_x, on_y) {
        (true, true) => 0.0,
        (true, false) => {
            let inward = if i == 0 { 1 } else { na - 2 };
            2.0 * at(inward, j) * idx2
        }
        (false, true) => {
            let inward = if j == 0 { 1 } else { nb - 2 };
            2.0 * at(i, inward) * idy2
        }
        (false, false) => {
            let c = at(i, j);
            (at(i + 1, j) - 2.0 * c + at(i - 1, j)) * idx2
                + (at(i, j + 1) - 2.0 * c + at(i, j - 1)) * idy2
        }
    }
}

/// `Δ_h²u` at an interior node.
#[inline]
fn bilap_at(u: &[f64], g: &Grid, i: usize, j: usize) -> f64 {
    let (na, nb) = g.node_dims();
    let (idx2, idy2) = (1.0 / (g.dx * g.dx), 1.0 / (g.dy * g.dy));
    let (il, ir, jb, jt) = if g.periodic() {
        ((i + na - 1) % na, (i + 1) % na, (j + nb - 1) % nb, (j + 1) % nb)
    } else {
        (i - 1, i + 1, j - 1, j + 1)
    };
    let c = node_lap(u, g, i, j);
    (node_lap(u, g, ir, j) - 2.0 * c + node_lap(u, g, il, j)) * idx2
        + (node_lap(u, g, i, jt) - 2.0 * c + node_lap(u, g, i, jb)) * idy2
}

fn is_unknown(g: &Grid, i: usize, j: usize) -> bool {
    let (na, nb) = g.node_dims();
    g.periodic() || (i > 0 && j > 0 && i + 1 < na && j + 1 < nb)
}

/// Applies the clamped bi-Laplacian. Boundary values of `u` are ignored
/// (taken as zero) and boundary values of the result are zero.
pub fn biharmonic_apply(u: &NodeField) -> NodeField {
    let g = *u.grid();
    let (na, nb) = g.node_dims();
    let mut src = u.data().to_vec();
    for j in 0..nb {
        for i in 0..na {
            if !is_unknown(&g, i, j) {
                src[j * na + i] = 0.0;
            }
        }
    }
    let mut out = NodeField::zeros(&g);
    for j in 0..nb {
        for i in 0..na {
            if is_unknown(&g, i, j) {
                out.set(i, j, bilap_at(&src, &g, i, j));
            }
        }
    }
    out
}

/// Factorised clamped bi-Laplacian (banded Cholesky on physical grids,
/// spectral on periodic ones).
#[derive(Debug, Clone)]
pub struct BiharmonicSolver {
    grid: Grid,
    inner: Inner,
}

#[derive(Debug, Clone)]
enum Inner {
    Banded { mi: usize, n: usize, bw: usize, l: Vec<f64> },
    Spectral(FastDiag),
}

impl BiharmonicSolver {
    pub fn new(grid: &Grid) -> Result<Self> {
        let g = *grid;
        if g.periodic() {
            let fd = FastDiag::new(
                Basis1d::new(BasisKind::Periodic, g.nx, g.dx),
                Basis1d::new(BasisKind::Periodic, g.ny, g.dy),
            );
            return Ok(BiharmonicSolver { grid: g, inner: Inner::Spectral(fd) });
        }
        let (na, nb) = g.node_dims();
        let (mi, mj) = (na - 2, nb - 2);
        let n = mi * mj;
        let bw = 2 * mi;
        let w = bw + 1;
        // band of A, entry (p, p - d) at a[p * w + d]
        let mut a = vec![0.0; n * w];
        let mut u = vec![0.0; na * nb];
        for qj in 0..mj {
            for qi in 0..mi {
                let q = qj * mi + qi;
                let (ci, cj) = (qi + 1, qj + 1);
                u[cj * na + ci] = 1.0;
                for dj in -2isize..=2 {
                    for di in -2isize..=2 {
                        if di.abs() + dj.abs() > 2 {
                            continue;
                        }
                        let (i, j) = (ci as isize + di, cj as isize + dj);
                        if i < 1 || j < 1 || i > mi as isize || j > mj as isize {
                            continue;
                        }
                        let p = (j as usize - 1) * mi + (i as usize - 1);
                        if p < q {
                            continue;
                        }
                        a[p * w + (p - q)] = bilap_at(&u, &g, i as usize, j as usize);
                    }
                }
                u[cj * na + ci] = 0.0;
            }
        }
        // in-place banded Cholesky
        let mut l = a;
        for jc in 0..n {
            let lo = jc.saturating_sub(bw);
            let mut s = l[jc * w];
            for k in lo..jc {
                let v = l[jc * w + (jc - k)];
                s -= v * v;
            }
            if !(s > 0.0) {
                return Err(Error::invalid("biharmonic", "operator not positive definite"));
            }
            let d = s.sqrt();
            l[jc * w] = d;
            for i in jc + 1..(jc + bw + 1).min(n) {
                let lo_i = i.saturating_sub(bw).max(lo);
                let mut s = l[i * w + (i - jc)];
                for k in lo_i..jc {
                    s -= l[i * w + (i - k)] * l[jc * w + (jc - k)];
                }
                l[i * w + (i - jc)] = s / d;
            }
        }
        Ok(BiharmonicSolver { grid: g, inner: Inner::Banded { mi, n, bw, l } })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Direct solve. On periodic grids the mean of `rhs` is dropped and the
    /// solution has zero mean.
    pub fn solve(&self, rhs: &NodeField) -> Result<NodeField> {
        self.grid.check_same(rhs.grid())?;
        let g = self.grid;
        let (na, nb) = g.node_dims();
        match &self.inner {
            Inner::Spectral(fd) => {
                let x = fd.apply_symbol(rhs.data(), |a, b| {
                    let l = a + b;
                    if l == 0.0 {
                        0.0
                    } else {
                        1.0 / (l * l)
                    }
                });
                Ok(NodeField::from_vec(&g, x))
            }
            Inner::Banded { mi, n, bw, l } => {
                let (mi, n, bw) = (*mi, *n, *bw);
                let w = bw + 1;
                let mut y = vec![0.0; n];
                for p in 0..n {
                    let (i, j) = (p % mi + 1, p / mi + 1);
                    y[p] = rhs.get(i, j);
                }
                for p in 0..n {
                    let mut s = y[p];
                    for k in p.saturating_sub(bw)..p {
                        s -= l[p * w + (p - k)] * y[k];
                    }
                    y[p] = s / l[p * w];
                }
                for p in (0..n).rev() {
                    let mut s = y[p];
                    for k in p + 1..(p + bw + 1).min(n) {
                        s -= l[k * w + (k - p)] * y[k];
                    }
                    y[p] = s / l[p * w];
                }
                let mut out = vec![0.0; na * nb];
                for p in 0..n {
                    let (i, j) = (p % mi + 1, p / mi + 1);
                    out[j * na + i] = y[p];
                }
                Ok(NodeField::from_vec(&g, out))
            }
        }
    }

    /// Iterative solve preconditioned by the simply supported plate
    /// (`(−Δ_h)²` with zero Dirichlet data, diagonalised by sines). An
    /// independent route to the same discrete solution.
    pub fn solve_cg(&self, rhs: &NodeField, rel_tol: f64, max_iter: usize) -> Result<(NodeField, CgStats)> {
        self.grid.check_same(rhs.grid())?;
        let g = self.grid;
        if g.periodic() {
            return Ok((self.solve(rhs)?, CgStats { iterations: 0, residual: 0.0, converged: true, history: vec![] }));
        }
        let (na, nb) = g.node_dims();
        let (mi, mj) = (na - 2, nb - 2);
        let fd = FastDiag::for_interior_nodes(&g);
        let gather = |full: &[f64]| -> Vec<f64> {
            let mut v = Vec::with_capacity(mi * mj);
            for j in 1..=mj {
                v.extend_from_slice(&full[j * na + 1..j * na + 1 + mi]);
            }
            v
        };
        let scatter = |v: &[f64]| -> Vec<f64> {
            let mut full = vec![0.0; na * nb];
            for j in 1..=mj {
                full[j * na + 1..j * na + 1 + mi].copy_from_slice(&v[(j - 1) * mi..j * mi]);
            }
            full
        };
        let b = gather(rhs.data());
        let mut x = vec![0.0; b.len()];
        let stats = pcg(
            |p, y| {
                let full = scatter(p);
                let nf = NodeField::from_vec(&g, full);
                y.copy_from_slice(&gather(biharmonic_apply(&nf).data()));
            },
            |r, z| {
                z.copy_from_slice(&fd.apply_symbol(r, |a, b| 1.0 / ((a + b) * (a + b))));
            },
            &b,
            &mut x,
            CgOptions { rel_tol, max_iter, zero_mean: false },
        )
        .check("biharmonic-cg")?;
        Ok((NodeField::from_vec(&g, scatter(&x)), stats))
    }
}

/// Cell-centred convenience wrapper: the right-hand side is averaged to the
/// interior nodes, the node solution averaged back to cells.
pub fn biharmonic_solve_clamped(rhs: &ScalarField) -> Result<ScalarField> {
    let g = *rhs.grid();
    let solver = BiharmonicSolver::new(&g)?;
    let nodes = cells_to_nodes(rhs);
    Ok(solver.solve(&nodes)?.to_cells())
}

/// Average of the cells touching each node.
pub fn cells_to_nodes(f: &ScalarField) -> NodeField {
    let g = *f.grid();
    let (na, nb) = g.node_dims();
    let mut out = NodeField::zeros(&g);
    for j in 0..nb {
        for i in 0..na {
            let mut s = 0.0;
            let mut c = 0.0;
            for (ci, cj) in super::ops::adjacent_cells(&g, i, j) {
                s += f.get(ci, cj);
                c += 1.0;
            }
            out.set(i, j, s / c);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Bc;

    #[test]
    fn one_dimensional_row_is_seven_minus_four_one() {
        let g = Grid::new(8, 8, 8.0, 8.0, Bc::Physical).unwrap();
        let mut u = NodeField::zeros(&g);
        u.set(1, 4, 1.0);
        let r = biharmonic_apply(&u);
        // x-part contributes the wall row 7, y-part the interior 6, mixed
        // term 8; neighbours keep the interior 13-point weights.
        assert!((r.get(1, 4) - (7.0 + 6.0 + 8.0)).abs() < 1e-12);
        assert!((r.get(2, 4) + 8.0).abs() < 1e-12);
        assert!((r.get(1, 5) + 8.0).abs() < 1e-12);
        assert!((r.get(2, 5) - 2.0).abs() < 1e-12);
        assert!((r.get(3, 4) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn banded_and_cg_agree() {
        let g = Grid::new(12, 10, 1.0, 0.8, Bc::Physical).unwrap();
        let s = BiharmonicSolver::new(&g).unwrap();
        let rhs = NodeField::from_fn(&g, |x, y| (3.0 * x).sin() + x * y);
        let a = s.solve(&rhs).unwrap();
        let (b, st) = s.solve_cg(&rhs, 1e-13, 200).unwrap();
        assert!(st.converged);
        let diff = a.data().iter().zip(b.data()).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        assert!(diff < 1e-10 * a.max_abs(), "{diff}");
        let back = biharmonic_apply(&a);
        let (na, nb) = g.node_dims();
        for j in 1..nb - 1 {
            for i in 1..na - 1 {
                assert!((back.get(i, j) - rhs.get(i, j)).abs() < 1e-8 * rhs.max_abs());
            }
        }
    }
}
