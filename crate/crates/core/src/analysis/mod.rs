//! Quantitative constructions from the existence theory, as numerics on
//! stored trajectories or synthetic fields: the L∞-truncation family, the
//! pressure decomposition and a divergence solver on disks.

mod bogovskii;
mod pressure;
mod truncation;

pub use bogovskii::{bogovskii_solve, bogovskii_solve_with, Ball, BogovskiiOptions, BogovskiiReport};
pub use pressure::{
    pressure_decompose, tensor_potential, trajectory_tensors, PiZeroMethod, PressureDecomposition,
    PressureOptions, PressureReport, StaggeredTensor,
};
pub use truncation::{
    big_h_l, h_l, h_l_adaptive, psi, psi_delta, psi_prime, truncated_cell_field, truncated_field,
    truncation_gradient_bound, truncation_gradient_bound_cells, upsilon, upsilon_prime, TruncationFamily,
    TruncationReport,
};
