//! Form language: product spaces over mesh sequences, expressions,
//! intersection measures, restriction rules and Gateaux derivatives.

mod blocks;
mod canonical;
mod derivative;
mod expr;
mod measure;
mod space;
mod validate;

pub use blocks::{restrict_to_components, split_form_into_blocks, BlockKey};
pub use canonical::{canonical_form, canonical_key, forms_equivalent, Monomial, Polynomial};
pub use derivative::{component_derivative, derivative, gateaux};
pub use expr::{
    avg, cell_normal, cos, div, entry, facet_normal, grad, inner, jump, sin, spatial_coordinate, split, test_function,
    trial_function, Expr, MathFunction, Node, Side,
};
pub use measure::{measure, Form, Integral, IntegralType, Measure};
pub use space::{Argument, CellSequence, Coefficient, ComponentLayout, FunctionSpace, MeshSequence, MixedElement};
pub use validate::{validate_form, Diagnostic, DiagnosticKind};

pub(crate) use expr::function_space_of;

use thiserror::Error;

use crate::mesh::{CellType, MeshId};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FormError {
    #[error("empty sequence")]
    EmptySequence,
    #[error("{0} appears more than once")]
    DuplicateMesh(MeshId),
    #[error("{meshes} meshes but {elements} elements")]
    LengthMismatch { meshes: usize, elements: usize },
    #[error("component {component}: element is defined on {expected} but the mesh has a {found} cell")]
    CellMismatch { component: usize, expected: CellType, found: CellType },
    #[error("shape error: {0}")]
    Shape(String),
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
}
