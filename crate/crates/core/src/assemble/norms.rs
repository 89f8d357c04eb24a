use super::AssembleError;
use crate::fe::{make_quadrature, CellGeometry, MAX_QUADRATURE_DEGREE};
use crate::forms::Coefficient;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ErrorNorms {
    pub l2: f64,
    /// Full H1 norm, L2 part included.
    pub h1: f64,
}

impl ErrorNorms {
    /// Combines norms over disjoint domains.
    pub fn combine(parts: &[ErrorNorms]) -> ErrorNorms {
        ErrorNorms {
            l2: parts.iter().map(|p| p.l2 * p.l2).sum::<f64>().sqrt(),
            h1: parts.iter().map(|p| p.h1 * p.h1).sum::<f64>().sqrt(),
        }
    }
}

/// Error of scalar component `k` of `u` against `exact`, which returns the
/// value and gradient at a physical point.
pub fn error_norms(
    u: &Coefficient,
    k: usize,
    exact: impl Fn([f64; 2]) -> (f64, [f64; 2]),
) -> Result<ErrorNorms, AssembleError> {
    let space = u.space();
    let mesh = space.component_mesh(k);
    let element = space.component_element(k);
    if element.block_size() != 1 {
        return Err(AssembleError::Shape("error norms need a scalar component".into()));
    }
    if mesh.dim() != 2 {
        return Err(AssembleError::Shape("error norms need a two-dimensional mesh".into()));
    }
    let layout = space.component(k);
    let rule = make_quadrature(element.cell(), (2 * element.degree() + 4).min(MAX_QUADRATURE_DEGREE))?;
    let tab = element.tabulate(&rule.points);
    let values = u.values();
    let (mut l2, mut semi) = (0.0, 0.0);
    for c in 0..mesh.num_cells() {
        let geom = CellGeometry::new(mesh.cell(c).cell_type, mesh.cell_coordinates(c));
        let dofs = &layout.cell_dofs[c];
        for (q, (&xi, &w)) in rule.points.iter().zip(&rule.weights).enumerate() {
            let jac = geom.jacobian(xi);
            let dx = w * geom.scale(&jac);
            let (mut uh, mut gref) = (0.0, [0.0; 2]);
            for (i, &d) in dofs.iter().enumerate() {
                uh += values[d] * tab.values[q][i];
                gref[0] += values[d] * tab.grads[q][i][0];
                gref[1] += values[d] * tab.grads[q][i][1];
            }
            let g = geom.push_gradient(&jac, gref);
            let (ue, ge) = exact(geom.map(xi));
            l2 += dx * (uh - ue).powi(2);
            semi += dx * ((g[0] - ge[0]).powi(2) + (g[1] - ge[1]).powi(2));
        }
    }
    Ok(ErrorNorms { l2: l2.sqrt(), h1: (l2 + semi).sqrt() })
}
