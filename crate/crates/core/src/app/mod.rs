//! Benchmark problems and convergence studies.

mod problems;
mod study;

pub use problems::{
    exact_solution, mesh_size, quad_tri_problem, split_interface_problem, split_interior_penalty_problem, Problem,
};
pub use study::{
    emit_report, parse_list, parse_refinements, run_quad_tri_study, run_split_interface_study, run_study,
    solve_problem, symmetry_defect, CellOutcome, ProblemKind, ReportFormat, SolverChoice, StudyConfig, StudyReport, StudyRow,
};

use thiserror::Error;

use crate::assemble::AssembleError;
use crate::fe::FeError;
use crate::forms::FormError;
use crate::mesh::MeshError;

#[derive(Debug, Error)]
pub enum AppError {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Fe(#[from] FeError),
    #[error(transparent)]
    Form(#[from] FormError),
    #[error(transparent)]
    Assemble(#[from] AssembleError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
