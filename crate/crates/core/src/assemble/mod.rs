//! Global assembly over primal iteration sets, boundary conditions, linear
//! and nonlinear solvers, error norms and block elimination.

mod assembly;
mod bc;
mod iteration;
mod newton;
mod norms;
mod schur;
mod solve;
mod tensor;

pub use assembly::{argument_spaces, assemble, assemble_matrix, assemble_scalar, assemble_vector, assemble_with_spaces};
pub use bc::{
    apply_bcs_matrix, apply_bcs_symmetric, apply_bcs_vector, constrained_dofs, BoundaryValue, DirichletBC,
    BC_GEOMETRY_TOL,
};
pub use iteration::{iteration_set, IterationEntity};
pub use newton::{newton_solve, NewtonConfig, NewtonReport};
pub use norms::{error_norms, ErrorNorms};
pub use schur::{eliminate_component, ReducedSystem};
pub use solve::{conjugate_gradient, norm2, solve_linear, LinearSolver, SOLVE_RTOL};
pub use tensor::{CsrMatrix, GlobalTensor};

use thiserror::Error;

use crate::compile::CompileError;
use crate::fe::FeError;
use crate::mesh::MeshId;

#[derive(Debug, Error)]
pub enum AssembleError {
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error(transparent)]
    Fe(#[from] FeError),
    #[error("unrelated meshes {0:?} and {1:?}")]
    UnrelatedMeshes(MeshId, MeshId),
    #[error("invalid form: {0}")]
    InvalidForm(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("solver failure: {0}")]
    Solver(String),
    #[error("singular matrix")]
    Singular,
    #[error("no convergence after {iterations} iterations (relative residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("Newton did not converge in {iterations} iterations (residual {residual:e})")]
    NewtonDiverged { iterations: usize, residual: f64 },
}
