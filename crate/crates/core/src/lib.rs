//! Preconditioned AOR iteration for unit-diagonal Z-matrices.
//!
//! The crate covers the preconditioner family `P = I + L(α) + U(α)` with
//! `p_ij = -α_ij a_ij`, `0 <= α_ij <= 1`, the AOR iteration matrices of the
//! original and preconditioned systems, certified spectral radii of
//! nonnegative matrices, restarted GMRES with left preconditioning, and the
//! convection-diffusion model problems used to compare the preconditioners.

pub mod aor;
pub mod error;
pub mod gmres;
pub mod matrix;
pub mod mtx;
pub mod precond;
pub mod problems;
pub mod report;
pub mod zm;

pub use aor::{
    aor_solve, iteration_matrix, spectral_radius, spectral_radius_oracle, AorParams, SpectralEstimate,
};
pub use error::{Error, Result};
pub use gmres::{gmres_restarted, make_operator, DenseOperator, Identity, LinearOperator};
pub use matrix::{kron, lower_triangular_solve, lu_solve, split, tridiag, DenseMatrix, SplittingTriple, Vector};
pub use precond::{
    build_preconditioner, decompose_preconditioned, named_preconditioner, preconditioned_matrix,
    unit_alpha_condition, AlphaMask, NamedPreconditioner, PreconditionedSplitting,
};
pub use problems::{
    example1_matrix, example2_matrix, random_m_matrix, stencil_operator, Example, GridSpec, StencilMatrix,
};
pub use report::SolveReport;
pub use zm::{epsilon_fill, is_m_matrix, is_z_matrix, MMatrixCertificate};
