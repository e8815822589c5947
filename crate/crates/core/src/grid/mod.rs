//! Rectangular staggered (MAC) discretisation: fields, stencils, elliptic
//! solvers and the Leray projection / Stokes mollifier.
//!
//! Scalars live at cell centres, velocity components on the faces normal to
//! them. With [`Bc::Physical`] the velocity satisfies no-slip and scalars
//! carry homogeneous Neumann conditions; with [`Bc::Periodic`] everything
//! wraps.

mod biharmonic;
mod cg;
mod field;
mod ops;
mod projection;
pub mod snapshot;
mod spectral;

pub use biharmonic::{biharmonic_apply, biharmonic_solve_clamped, cells_to_nodes, BiharmonicSolver};
pub use cg::{pcg, CgOptions, CgStats};
pub use field::{CellVector, NodeField, ScalarField, TensorField, VectorField};
pub use ops::{
    cell_to_faces, curl_of_nodes, divergence, faces_to_cells, gradient, laplacian, node_laplacian,
    stress_divergence, sym_gradient, velocity_gradient, StrainRate,
};
pub use projection::{
    helmholtz_project, poisson_solve_neumann, stokes_mollify, weighted_project, EllipticMethod,
    EllipticSolverConfig, Projector,
};
pub use spectral::{Basis1d, BasisKind, FastDiag};

use crate::error::{Error, Result};

/// Boundary condition family, uniform over a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Bc {
    Periodic,
    /// No-slip velocity, homogeneous Neumann for cell-centred scalars.
    Physical,
}

impl Bc {
    pub fn tag(self) -> &'static str {
        match self {
            Bc::Periodic => "periodic",
            Bc::Physical => "physical",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        match tag {
            "periodic" => Some(Bc::Periodic),
            "physical" => Some(Bc::Physical),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
    pub bc: Bc,
}

impl Grid {
    pub fn new(nx: usize, ny: usize, lx: f64, ly: f64, bc: Bc) -> Result<Self> {
        if nx < 8 || ny < 8 {
            return Err(Error::invalid("grid", format!("need nx, ny >= 8, got {nx}x{ny}")));
        }
        if !(lx > 0.0 && ly > 0.0 && lx.is_finite() && ly.is_finite()) {
            return Err(Error::invalid("grid", format!("extent must be positive, got {lx}x{ly}")));
        }
        Ok(Grid {
            nx,
            ny,
            dx: lx / nx as f64,
            dy: ly / ny as f64,
            bc,
        })
    }

    pub fn lx(&self) -> f64 {
        self.nx as f64 * self.dx
    }

    pub fn ly(&self) -> f64 {
        self.ny as f64 * self.dy
    }

    pub fn cell_area(&self) -> f64 {
        self.dx * self.dy
    }

    pub fn area(&self) -> f64 {
        self.lx() * self.ly()
    }

    pub fn periodic(&self) -> bool {
        self.bc == Bc::Periodic
    }

    pub fn n_cells(&self) -> usize {
        self.nx * self.ny
    }

    /// Number of x-faces per row.
    pub fn nux(&self) -> usize {
        if self.periodic() {
            self.nx
        } else {
            self.nx + 1
        }
    }

    /// Number of rows of y-faces.
    pub fn nvy(&self) -> usize {
        if self.periodic() {
            self.ny
        } else {
            self.ny + 1
        }
    }

    pub fn n_xfaces(&self) -> usize {
        self.nux() * self.ny
    }

    pub fn n_yfaces(&self) -> usize {
        self.nx * self.nvy()
    }

    /// Node counts per direction (corners of cells).
    pub fn node_dims(&self) -> (usize, usize) {
        (self.nux(), self.nvy())
    }

    pub fn cell_center(&self, i: usize, j: usize) -> (f64, f64) {
        ((i as f64 + 0.5) * self.dx, (j as f64 + 0.5) * self.dy)
    }

    pub fn xface_pos(&self, i: usize, j: usize) -> (f64, f64) {
        (i as f64 * self.dx, (j as f64 + 0.5) * self.dy)
    }

    pub fn yface_pos(&self, i: usize, j: usize) -> (f64, f64) {
        ((i as f64 + 0.5) * self.dx, j as f64 * self.dy)
    }

    pub fn node_pos(&self, i: usize, j: usize) -> (f64, f64) {
        (i as f64 * self.dx, j as f64 * self.dy)
    }

    /// True for x-faces carrying an unknown (walls are pinned to zero).
    #[inline]
    pub fn xface_active(&self, i: usize) -> bool {
        self.periodic() || (i > 0 && i < self.nx)
    }

    #[inline]
    pub fn yface_active(&self, j: usize) -> bool {
        self.periodic() || (j > 0 && j < self.ny)
    }

    pub fn check_same(&self, other: &Grid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "{}x{} ({}) vs {}x{} ({})",
                self.nx,
                self.ny,
                self.bc.tag(),
                other.nx,
                other.ny,
                other.bc.tag()
            )))
        }
    }

    /// Same extents with doubled resolution.
    pub fn refined(&self) -> Grid {
        Grid {
            nx: 2 * self.nx,
            ny: 2 * self.ny,
            dx: self.dx / 2.0,
            dy: self.dy / 2.0,
            bc: self.bc,
        }
    }
}
