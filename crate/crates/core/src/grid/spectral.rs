//! Fast diagonalisation of separable second-difference operators with dense
//! orthonormal 1D eigenbases. Transforms are two matrix products, so cost is
//! O(n³) per 2D solve but with a tiny constant at the grid sizes used here.

use super::Grid;

/// Which 1D second-difference operator a basis diagonalises.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisKind {
    /// n points on a circle.
    Periodic,
    /// n cell centres, zero flux through both ends.
    NeumannCell,
    /// n cell centres, value zero on the walls half a cell away
    /// (odd ghost reflection).
    DirichletCell,
    /// n − 1 interior nodes of n cells, value zero on the end nodes.
    DirichletNode,
}

/// Orthonormal eigenbasis of `−d²/dx²` discretised on `len` points.
#[derive(Debug, Clone)]
pub struct Basis1d {
    pub kind: BasisKind,
    pub len: usize,
    /// Row-major `len × len`, entry `(point, mode)`.
    pub q: Vec<f64>,
    /// Eigenvalues of `−δ²`, one per mode.
    pub lambda: Vec<f64>,
}

impl Basis1d {
    /// Basis for `n` cells of width `h`.
    pub fn new(kind: BasisKind, n: usize, h: f64) -> Self {
        use std::f64::consts::PI;
        let nf = n as f64;
        let h2 = h * h;
        let sym = |theta: f64| (2.0 - 2.0 * theta.cos()) / h2;
        match kind {
            BasisKind::Periodic => {
                let mut q = vec![0.0; n * n];
                let mut lambda = vec![0.0; n];
                let mut col = 0;
                let s = (2.0 / nf).sqrt();
                // constant mode
                for i in 0..n {
                    q[i * n] = 1.0 / nf.sqrt();
                }
                col += 1;
                for k in 1..n.div_ceil(2) {
                    let th = 2.0 * PI * k as f64 / nf;
                    for i in 0..n {
                        q[i * n + col] = s * (th * i as f64).cos();
                        q[i * n + col + 1] = s * (th * i as f64).sin();
                    }
                    lambda[col] = sym(th);
                    lambda[col + 1] = sym(th);
                    col += 2;
                }
                if n % 2 == 0 {
                    for i in 0..n {
                        q[i * n + col] = if i % 2 == 0 { 1.0 } else { -1.0 } / nf.sqrt();
                    }
                    lambda[col] = 4.0 / h2;
                    col += 1;
                }
                debug_assert_eq!(col, n);
                Basis1d { kind, len: n, q, lambda }
            }
            BasisKind::NeumannCell => {
                let mut q = vec![0.0; n * n];
                let mut lambda = vec![0.0; n];
                for k in 0..n {
                    let th = PI * k as f64 / nf;
                    let s = if k == 0 { (1.0 / nf).sqrt() } else { (2.0 / nf).sqrt() };
                    for i in 0..n {
                        q[i * n + k] = s * (th * (i as f64 + 0.5)).cos();
                    }
                    lambda[k] = sym(th);
                }
                Basis1d { kind, len: n, q, lambda }
            }
            BasisKind::DirichletCell => {
                let mut q = vec![0.0; n * n];
                let mut lambda = vec![0.0; n];
                for m in 0..n {
                    let k = m + 1;
                    let th = PI * k as f64 / nf;
                    let s = if k == n { (1.0 / nf).sqrt() } else { (2.0 / nf).sqrt() };
                    for i in 0..n {
                        q[i * n + m] = s * (th * (i as f64 + 0.5)).sin();
                    }
                    lambda[m] = sym(th);
                }
                Basis1d { kind, len: n, q, lambda }
            }
            BasisKind::DirichletNode => {
                let len = n - 1;
                let mut q = vec![0.0; len * len];
                let mut lambda = vec![0.0; len];
                let s = (2.0 / nf).sqrt();
                for m in 0..len {
                    let th = PI * (m + 1) as f64 / nf;
                    for p in 0..len {
                        q[p * len + m] = s * (th * (p + 1) as f64).sin();
                    }
                    lambda[m] = sym(th);
                }
                Basis1d { kind, len, q, lambda }
            }
        }
    }
}

/// Tensor-product eigenbasis for a `len_y × len_x` row-major array.
#[derive(Debug, Clone)]
pub struct FastDiag {
    pub bx: Basis1d,
    pub by: Basis1d,
}

/// `c = a · b` for row-major `a: m×k`, `b: k×n`; `ta`/`tb` read the
/// transposes of square stored matrices instead.
fn gemm(m: usize, k: usize, n: usize, a: &[f64], ta: bool, b: &[f64], tb: bool, c: &mut [f64]) {
    let (rsa, csa) = if ta { (1, m as isize) } else { (k as isize, 1) };
    let (rsb, csb) = if tb { (1, k as isize) } else { (n as isize, 1) };
    assert!(a.len() >= m * k && b.len() >= k * n && c.len() >= m * n);
    // SAFETY: bounds asserted above; strides describe dense row-major storage.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            rsa,
            csa,
            b.as_ptr(),
            rsb,
            csb,
            0.0,
            c.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}

impl FastDiag {
    pub fn new(bx: Basis1d, by: Basis1d) -> Self {
        FastDiag { bx, by }
    }

    /// Cell-centred scalars: Neumann on physical grids, periodic otherwise.
    pub fn for_scalar(g: &Grid) -> Self {
        let kind = if g.periodic() { BasisKind::Periodic } else { BasisKind::NeumannCell };
        FastDiag::new(Basis1d::new(kind, g.nx, g.dx), Basis1d::new(kind, g.ny, g.dy))
    }

    /// Active x-face unknowns under the no-slip reflection.
    pub fn for_u(g: &Grid) -> Self {
        if g.periodic() {
            return FastDiag::for_scalar(g);
        }
        FastDiag::new(
            Basis1d::new(BasisKind::DirichletNode, g.nx, g.dx),
            Basis1d::new(BasisKind::DirichletCell, g.ny, g.dy),
        )
    }

    pub fn for_v(g: &Grid) -> Self {
        if g.periodic() {
            return FastDiag::for_scalar(g);
        }
        FastDiag::new(
            Basis1d::new(BasisKind::DirichletCell, g.nx, g.dx),
            Basis1d::new(BasisKind::DirichletNode, g.ny, g.dy),
        )
    }

    /// Interior nodes of a physical grid with zero boundary values.
    pub fn for_interior_nodes(g: &Grid) -> Self {
        FastDiag::new(
            Basis1d::new(BasisKind::DirichletNode, g.nx, g.dx),
            Basis1d::new(BasisKind::DirichletNode, g.ny, g.dy),
        )
    }

    pub fn len(&self) -> usize {
        self.bx.len * self.by.len
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Coefficients `Qyᵀ F Qx`, row-major `(mode_y, mode_x)`.
    pub fn forward(&self, f: &[f64]) -> Vec<f64> {
        let (mx, my) = (self.bx.len, self.by.len);
        assert_eq!(f.len(), mx * my);
        let mut t = vec![0.0; mx * my];
        gemm(my, mx, mx, f, false, &self.bx.q, false, &mut t);
        let mut out = vec![0.0; mx * my];
        gemm(my, my, mx, &self.by.q, true, &t, false, &mut out);
        out
    }

    /// `Qy C Qxᵀ`.
    pub fn inverse(&self, c: &[f64]) -> Vec<f64> {
        let (mx, my) = (self.bx.len, self.by.len);
        assert_eq!(c.len(), mx * my);
        let mut t = vec![0.0; mx * my];
        gemm(my, mx, mx, c, false, &self.bx.q, true, &mut t);
        let mut out = vec![0.0; mx * my];
        gemm(my, my, mx, &self.by.q, false, &t, false, &mut out);
        out
    }

    /// `Q diag(symbol(λx, λy)) Qᵀ f` where λ are the eigenvalues of `−δ²`.
    pub fn apply_symbol(&self, f: &[f64], symbol: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        let mut c = self.forward(f);
        let mx = self.bx.len;
        for (ky, &ly) in self.by.lambda.iter().enumerate() {
            for (kx, &lx) in self.bx.lambda.iter().enumerate() {
                c[ky * mx + kx] *= symbol(lx, ly);
            }
        }
        self.inverse(&c)
    }

    /// Solves `−Δ_h u = f`, dropping any null mode (λ = 0).
    pub fn solve_neg_laplacian(&self, f: &[f64]) -> Vec<f64> {
        self.apply_symbol(f, |a, b| {
            let l = a + b;
            if l == 0.0 {
                0.0
            } else {
                1.0 / l
            }
        })
    }
}
