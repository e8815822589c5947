use super::Grid;
use crate::error::Result;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// Cell-centred scalar, row-major (`j * nx + i`).
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    data: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: &Grid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: &Grid, value: f64) -> Self {
        ScalarField {
            grid: *grid,
            data: vec![value; grid.n_cells()],
        }
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut data = Vec::with_capacity(grid.n_cells());
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                let (x, y) = grid.cell_center(i, j);
                data.push(f(x, y));
            }
        }
        ScalarField { grid: *grid, data }
    }

    pub fn from_vec(grid: &Grid, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), grid.n_cells(), "scalar field size");
        ScalarField { grid: *grid, data }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.grid.nx + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        let nx = self.grid.nx;
        self.data[j * nx + i] = value;
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        ScalarField {
            grid: self.grid,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn zip_map(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        Ok(ScalarField {
            grid: self.grid,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn integral(&self) -> f64 {
        self.sum() * self.grid.cell_area()
    }

    pub fn mean(&self) -> f64 {
        self.sum() / self.data.len() as f64
    }

    pub fn subtract_mean(&mut self) {
        let m = self.mean();
        self.data.iter_mut().for_each(|x| *x -= m);
    }

    pub fn dot(&self, other: &ScalarField) -> f64 {
        dot(&self.data, &other.data) * self.grid.cell_area()
    }

    /// Discrete L² norm (cell-area weighted).
    pub fn norm_l2(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn norm_lq(&self, q: f64) -> f64 {
        (self.data.iter().map(|x| x.abs().powf(q)).sum::<f64>() * self.grid.cell_area()).powf(1.0 / q)
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.data)
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn scale(&mut self, a: f64) {
        self.data.iter_mut().for_each(|x| *x *= a);
    }

    pub fn scaled(&self, a: f64) -> Self {
        self.map(|x| a * x)
    }

    /// `self += a * other`
    pub fn axpy(&mut self, a: f64, other: &ScalarField) {
        debug_assert_eq!(self.grid, other.grid);
        self.data.iter_mut().zip(&other.data).for_each(|(x, y)| *x += a * y);
    }

    pub fn sub(&self, other: &ScalarField) -> Self {
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }

    pub fn add(&self, other: &ScalarField) -> Self {
        let mut out = self.clone();
        out.axpy(1.0, other);
        out
    }
}

/// Face-centred (MAC) vector field. x-components first, then y-components,
/// in one contiguous buffer so solvers can treat it as a flat vector.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    grid: Grid,
    data: Vec<f64>,
}

impl VectorField {
    pub fn zeros(grid: &Grid) -> Self {
        VectorField {
            grid: *grid,
            data: vec![0.0; grid.n_xfaces() + grid.n_yfaces()],
        }
    }

    /// Samples `fx` on x-faces and `fy` on y-faces; wall faces stay zero.
    pub fn from_fn(
        grid: &Grid,
        fx: impl Fn(f64, f64) -> f64,
        fy: impl Fn(f64, f64) -> f64,
    ) -> Self {
        let mut out = Self::zeros(grid);
        let nux = grid.nux();
        for j in 0..grid.ny {
            for i in 0..nux {
                if grid.xface_active(i) {
                    let (x, y) = grid.xface_pos(i, j);
                    out.data[j * nux + i] = fx(x, y);
                }
            }
        }
        let off = grid.n_xfaces();
        for j in 0..grid.nvy() {
            if !grid.yface_active(j) {
                continue;
            }
            for i in 0..grid.nx {
                let (x, y) = grid.yface_pos(i, j);
                out.data[off + j * grid.nx + i] = fy(x, y);
            }
        }
        out
    }

    pub fn from_parts(grid: &Grid, u: Vec<f64>, v: Vec<f64>) -> Self {
        assert_eq!(u.len(), grid.n_xfaces(), "x-face count");
        assert_eq!(v.len(), grid.n_yfaces(), "y-face count");
        let mut data = u;
        data.extend(v);
        let mut out = VectorField { grid: *grid, data };
        out.enforce_walls();
        out
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn u(&self) -> &[f64] {
        &self.data[..self.grid.n_xfaces()]
    }

    pub fn v(&self) -> &[f64] {
        &self.data[self.grid.n_xfaces()..]
    }

    pub fn u_mut(&mut self) -> &mut [f64] {
        let n = self.grid.n_xfaces();
        &mut self.data[..n]
    }

    pub fn v_mut(&mut self) -> &mut [f64] {
        let n = self.grid.n_xfaces();
        &mut self.data[n..]
    }

    pub fn parts_mut(&mut self) -> (&mut [f64], &mut [f64]) {
        let n = self.grid.n_xfaces();
        self.data.split_at_mut(n)
    }

    /// Zero the wall-normal faces (no-op for periodic grids).
    /// Applies `f` to every face value.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        VectorField { grid: self.grid, data: self.data.iter().map(|&x| f(x)).collect() }
    }

    /// Facewise product.
    pub fn mul(&self, other: &VectorField) -> Self {
        VectorField { grid: self.grid, data: self.data.iter().zip(&other.data).map(|(a, b)| a * b).collect() }
    }

    pub fn enforce_walls(&mut self) {
        if self.grid.periodic() {
            return;
        }
        let g = self.grid;
        let nux = g.nux();
        for j in 0..g.ny {
            self.data[j * nux] = 0.0;
            self.data[j * nux + g.nx] = 0.0;
        }
        let off = g.n_xfaces();
        for i in 0..g.nx {
            self.data[off + i] = 0.0;
            self.data[off + g.ny * g.nx + i] = 0.0;
        }
    }

    pub fn dot(&self, other: &VectorField) -> f64 {
        dot(&self.data, &other.data) * self.grid.cell_area()
    }

    pub fn norm_l2(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.data)
    }

    pub fn scale(&mut self, a: f64) {
        self.data.iter_mut().for_each(|x| *x *= a);
    }

    pub fn scaled(&self, a: f64) -> Self {
        let mut out = self.clone();
        out.scale(a);
        out
    }

    pub fn axpy(&mut self, a: f64, other: &VectorField) {
        debug_assert_eq!(self.grid, other.grid);
        self.data.iter_mut().zip(&other.data).for_each(|(x, y)| *x += a * y);
    }

    pub fn sub(&self, other: &VectorField) -> Self {
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }

    pub fn add(&self, other: &VectorField) -> Self {
        let mut out = self.clone();
        out.axpy(1.0, other);
        out
    }
}

/// Cell-centred 2×2 tensor, stored by component. Row index first: `xy` is
/// the (x, y) entry.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorField {
    grid: Grid,
    pub xx: Vec<f64>,
    pub xy: Vec<f64>,
    pub yx: Vec<f64>,
    pub yy: Vec<f64>,
}

impl TensorField {
    pub fn zeros(grid: &Grid) -> Self {
        let n = grid.n_cells();
        TensorField {
            grid: *grid,
            xx: vec![0.0; n],
            xy: vec![0.0; n],
            yx: vec![0.0; n],
            yy: vec![0.0; n],
        }
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(f64, f64) -> [[f64; 2]; 2]) -> Self {
        let mut out = Self::zeros(grid);
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                let (x, y) = grid.cell_center(i, j);
                let m = f(x, y);
                let k = j * grid.nx + i;
                out.xx[k] = m[0][0];
                out.xy[k] = m[0][1];
                out.yx[k] = m[1][0];
                out.yy[k] = m[1][1];
            }
        }
        out
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn at(&self, k: usize) -> [[f64; 2]; 2] {
        [[self.xx[k], self.xy[k]], [self.yx[k], self.yy[k]]]
    }

    fn components(&self) -> [&Vec<f64>; 4] {
        [&self.xx, &self.xy, &self.yx, &self.yy]
    }

    fn components_mut(&mut self) -> [&mut Vec<f64>; 4] {
        [&mut self.xx, &mut self.xy, &mut self.yx, &mut self.yy]
    }

    pub fn scale(&mut self, a: f64) {
        for c in self.components_mut() {
            c.iter_mut().for_each(|x| *x *= a);
        }
    }

    pub fn scaled(&self, a: f64) -> Self {
        let mut out = self.clone();
        out.scale(a);
        out
    }

    pub fn axpy(&mut self, a: f64, other: &TensorField) {
        let src = other.components();
        for (dst, s) in self.components_mut().into_iter().zip(src) {
            dst.iter_mut().zip(s).for_each(|(x, y)| *x += a * y);
        }
    }

    pub fn add(&self, other: &TensorField) -> Self {
        let mut out = self.clone();
        out.axpy(1.0, other);
        out
    }

    /// Pointwise Frobenius magnitude.
    pub fn magnitude(&self) -> ScalarField {
        let data = (0..self.grid.n_cells())
            .map(|k| {
                (self.xx[k].powi(2) + self.xy[k].powi(2) + self.yx[k].powi(2) + self.yy[k].powi(2))
                    .sqrt()
            })
            .collect();
        ScalarField::from_vec(&self.grid, data)
    }

    /// Space Lq norm of the pointwise Frobenius magnitude.
    pub fn norm_lq(&self, q: f64) -> f64 {
        self.magnitude().norm_lq(q)
    }
}

/// Values on cell corners. For physical grids this includes the boundary
/// nodes, `(nx+1) x (ny+1)`; periodic grids store `nx x ny`.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeField {
    grid: Grid,
    data: Vec<f64>,
}

impl NodeField {
    pub fn zeros(grid: &Grid) -> Self {
        let (a, b) = grid.node_dims();
        NodeField {
            grid: *grid,
            data: vec![0.0; a * b],
        }
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(f64, f64) -> f64) -> Self {
        let (a, b) = grid.node_dims();
        let mut data = Vec::with_capacity(a * b);
        for j in 0..b {
            for i in 0..a {
                let (x, y) = grid.node_pos(i, j);
                data.push(f(x, y));
            }
        }
        NodeField { grid: *grid, data }
    }

    pub fn from_vec(grid: &Grid, data: Vec<f64>) -> Self {
        let (a, b) = grid.node_dims();
        assert_eq!(data.len(), a * b, "node field size");
        NodeField { grid: *grid, data }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dims(&self) -> (usize, usize) {
        self.grid.node_dims()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.grid.nux() + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        let a = self.grid.nux();
        self.data[j * a + i] = value;
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.data)
    }

    /// Trapezoid-weighted L² norm over the closed rectangle.
    pub fn norm_l2(&self) -> f64 {
        let (a, b) = self.dims();
        let g = &self.grid;
        let mut s = 0.0;
        for j in 0..b {
            for i in 0..a {
                let w = node_weight(g, i, j);
                s += w * self.get(i, j).powi(2);
            }
        }
        (s * g.cell_area()).sqrt()
    }

    /// Average of the four surrounding nodes at each cell centre.
    pub fn to_cells(&self) -> ScalarField {
        let g = self.grid;
        let a = g.nux();
        let b = g.nvy();
        let mut out = ScalarField::zeros(&g);
        for j in 0..g.ny {
            let j1 = (j + 1) % b;
            for i in 0..g.nx {
                let i1 = (i + 1) % a;
                let s = self.get(i, j) + self.get(i1, j) + self.get(i, j1) + self.get(i1, j1);
                out.set(i, j, 0.25 * s);
            }
        }
        out
    }
}

/// Trapezoid weight of node (i, j): 1 in the interior, 1/2 on edges, 1/4 at
/// corners of a physical grid; always 1 on periodic grids.
#[inline]
pub(crate) fn node_weight(g: &Grid, i: usize, j: usize) -> f64 {
    if g.periodic() {
        return 1.0;
    }
    let wx = if i == 0 || i == g.nx { 0.5 } else { 1.0 };
    let wy = if j == 0 || j == g.ny { 0.5 } else { 1.0 };
    wx * wy
}

/// Collocated vector field (two cell-centred components).
#[derive(Debug, Clone, PartialEq)]
pub struct CellVector {
    pub x: ScalarField,
    pub y: ScalarField,
}

impl CellVector {
    pub fn zeros(grid: &Grid) -> Self {
        CellVector {
            x: ScalarField::zeros(grid),
            y: ScalarField::zeros(grid),
        }
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(f64, f64) -> [f64; 2]) -> Self {
        CellVector {
            x: ScalarField::from_fn(grid, |x, y| f(x, y)[0]),
            y: ScalarField::from_fn(grid, |x, y| f(x, y)[1]),
        }
    }

    pub fn grid(&self) -> &Grid {
        self.x.grid()
    }

    pub fn magnitude(&self) -> ScalarField {
        self.x.zip_map(&self.y, |a, b| a.hypot(b)).expect("components share a grid")
    }

    pub fn dot(&self, other: &CellVector) -> f64 {
        self.x.dot(&other.x) + self.y.dot(&other.y)
    }

    pub fn norm_l2(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn sub(&self, other: &CellVector) -> Self {
        CellVector {
            x: self.x.sub(&other.x),
            y: self.y.sub(&other.y),
        }
    }

    pub fn scaled(&self, a: f64) -> Self {
        CellVector {
            x: self.x.scaled(a),
            y: self.y.scaled(a),
        }
    }
}
