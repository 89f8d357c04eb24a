//! Reference Lagrange elements, quadrature rules and degree-1 cell geometry.

mod element;
mod geometry;
mod quadrature;

pub use element::{Family, NodeEntity, ReferenceElement, Tabulation, ValueShape};
pub use geometry::{CellGeometry, Jacobian, PULLBACK_MAX_ITERS, PULLBACK_TOL};
pub use quadrature::{facet_embedding, gauss_legendre, make_quadrature, QuadratureRule, MAX_QUADRATURE_DEGREE};

use thiserror::Error;

use crate::mesh::CellType;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FeError {
    #[error("degree {0} outside supported range 1..=4")]
    UnsupportedDegree(usize),
    #[error("family {family:?} is not defined on {cell}")]
    IncompatibleFamily { cell: CellType, family: Family },
    #[error("quadrature degree {0} exceeds {MAX_QUADRATURE_DEGREE}")]
    QuadratureDegree(usize),
    #[error("{cell} has no local facet {local_facet}")]
    BadFacet { cell: CellType, local_facet: usize },
    #[error("singular Vandermonde matrix")]
    SingularVandermonde,
    #[error("non-conforming or degenerate geometry")]
    PullbackFailed,
}

pub fn make_element(cell: CellType, family: Family, degree: usize) -> Result<ReferenceElement, FeError> {
    ReferenceElement::new(cell, family, degree)
}

/// Quadrature degree used for assembly: `2p` plus 2 when a bilinear
/// quadrilateral map is involved.
pub fn default_quadrature_degree(degree: usize, any_quadrilateral: bool) -> usize {
    2 * degree + if any_quadrilateral { 2 } else { 0 }
}
