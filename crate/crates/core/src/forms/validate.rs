use std::fmt;

use super::expr::{function_space_of, Expr, Node};
use super::measure::{Form, Integral, IntegralType};
use crate::mesh::MeshId;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DiagnosticKind {
    /// Terminal on an interior-facet participant used without `+`/`-`.
    MissingRestriction(MeshId),
    /// Restricted terminal on an exterior-facet participant.
    RestrictedExteriorFacet(MeshId),
    /// Restricted terminal on a cell participant.
    RestrictedCell(MeshId),
    NestedRestriction,
    /// Terminal lives on a mesh that is not part of the measure.
    ForeignMesh(MeshId),
    /// Facet normal requested on a mesh that takes part through its cells.
    FacetNormalOnCell(MeshId),
    /// Stored cell normal requested on a codim-0 mesh.
    CellNormalOnCodim0(MeshId),
    /// Multi-component function used without splitting.
    Unsplit,
    /// Integrand is not scalar-valued or has inconsistent shapes.
    Shape(String),
}

impl fmt::Display for DiagnosticKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DiagnosticKind::MissingRestriction(m) => write!(f, "missing restriction on interior-facet participant {m}"),
            DiagnosticKind::RestrictedExteriorFacet(m) => write!(f, "restriction on exterior-facet participant {m}"),
            DiagnosticKind::RestrictedCell(m) => write!(f, "restriction on cell participant {m}"),
            DiagnosticKind::NestedRestriction => write!(f, "nested restriction"),
            DiagnosticKind::ForeignMesh(m) => write!(f, "{m} does not take part in the measure"),
            DiagnosticKind::FacetNormalOnCell(m) => write!(f, "facet normal of cell participant {m}"),
            DiagnosticKind::CellNormalOnCodim0(m) => write!(f, "cell normal of codim-0 mesh {m}"),
            DiagnosticKind::Unsplit => write!(f, "multi-component function must be split"),
            DiagnosticKind::Shape(s) => write!(f, "{s}"),
        }
    }
}

/// First rule violation found in a form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    /// Index of the offending integral.
    pub integral: usize,
    /// Node kinds from the integrand root down to the offending node.
    pub path: Vec<String>,
    pub kind: DiagnosticKind,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "integral {}: {} at {}", self.integral, self.kind, self.path.join("/"))
    }
}

impl std::error::Error for Diagnostic {}

/// Checks the restriction rules of every integral: terminals on an
/// interior-facet participant are restricted, terminals on exterior-facet
/// and cell participants are not, and every terminal lives on a
/// participating mesh.
pub fn validate_form(form: &Form) -> Result<(), Diagnostic> {
    for (i, integral) in form.integrals.iter().enumerate() {
        let diag = |path: Vec<String>, kind| Diagnostic { integral: i, path, kind };
        match integral.integrand.rank() {
            Ok(0) => {}
            Ok(r) => return Err(diag(vec![], DiagnosticKind::Shape(format!("integrand has rank {r}")))),
            Err(e) => return Err(diag(vec![], DiagnosticKind::Shape(e.to_string()))),
        }
        let mut path = Vec::new();
        walk(integral, &integral.integrand, false, None, &mut path).map_err(|(path, kind)| diag(path, kind))?;
    }
    Ok(())
}

type Violation = (Vec<String>, DiagnosticKind);

fn walk(
    integral: &Integral,
    e: &Expr,
    restricted: bool,
    component: Option<usize>,
    path: &mut Vec<String>,
) -> Result<(), Violation> {
    path.push(e.kind_name().to_string());
    let fail = |path: &Vec<String>, kind| Err((path.clone(), kind));
    let role = |mesh: &crate::mesh::Mesh| integral.measure.role_of(mesh);
    let check_terminal = |path: &Vec<String>, mesh: &crate::mesh::Mesh, exempt: bool| -> Result<(), Violation> {
        let Some(t) = role(mesh) else {
            return fail(path, DiagnosticKind::ForeignMesh(mesh.id()));
        };
        match t {
            IntegralType::InteriorFacet if !restricted && !exempt => {
                fail(path, DiagnosticKind::MissingRestriction(mesh.id()))
            }
            IntegralType::ExteriorFacet if restricted => fail(path, DiagnosticKind::RestrictedExteriorFacet(mesh.id())),
            IntegralType::Cell if restricted => fail(path, DiagnosticKind::RestrictedCell(mesh.id())),
            _ => Ok(()),
        }
    };
    match e.node() {
        Node::Coefficient(_) | Node::Argument(_) => {
            let space = function_space_of(e).expect("function terminal");
            let k = match component {
                Some(k) => k,
                None if space.num_components() == 1 => 0,
                None => return fail(path, DiagnosticKind::Unsplit),
            };
            check_terminal(path, space.component_mesh(k), false)?;
        }
        Node::SpatialCoordinate(m) => check_terminal(path, m, true)?,
        Node::FacetNormal(m) => {
            if role(m) == Some(IntegralType::Cell) {
                return fail(path, DiagnosticKind::FacetNormalOnCell(m.id()));
            }
            check_terminal(path, m, false)?;
        }
        Node::CellNormal(m) => {
            if !m.is_codim1() {
                return fail(path, DiagnosticKind::CellNormalOnCodim0(m.id()));
            }
            check_terminal(path, m, false)?;
        }
        Node::Constant(_) => {}
        Node::Restricted(inner, _) => {
            if restricted {
                return fail(path, DiagnosticKind::NestedRestriction);
            }
            walk(integral, inner, true, component, path)?;
        }
        Node::Indexed(inner, k) if function_space_of(inner).is_some() => {
            walk(integral, inner, restricted, Some(*k), path)?;
        }
        _ => {
            for c in e.children() {
                walk(integral, c, restricted, None, path)?;
            }
        }
    }
    path.pop();
    Ok(())
}
