//! Lowering of single integrals to element-local kernels. Kernels are
//! interpreted: the integrand becomes a tape of typed operations walked at
//! every quadrature point of the primal integration entity.

mod kernel;
mod tape;

pub use kernel::{
    align_interface_quadrature, compile_integral, execute_kernel, ArgBlock, BasisSource, CoefSlot, EntityBinding,
    LocalKernel, PackedInputs, Participant,
};
pub use tape::{Op, SlotType};

use thiserror::Error;

use crate::fe::FeError;
use crate::mesh::MeshId;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CompileError {
    #[error("unsupported node kind: {0}")]
    Unsupported(String),
    #[error("integrand is not linear in argument {0}")]
    NotLinear(usize),
    #[error("shape error: {0}")]
    Shape(String),
    #[error("{0} does not take part in the measure")]
    ForeignMesh(MeshId),
    #[error("terminal on interior-facet participant {0} needs a restriction")]
    MissingRestriction(MeshId),
    #[error("invalid form: {0}")]
    Invalid(String),
    #[error(transparent)]
    Fe(#[from] FeError),
}
