use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use super::tensor::CsrMatrix;
use crate::forms::FunctionSpace;

/// Tolerance for deciding that a node lies on a marked facet.
pub const BC_GEOMETRY_TOL: f64 = 1e-12;

pub type BoundaryValue = Arc<dyn Fn([f64; 2]) -> f64 + Send + Sync>;

/// Dirichlet condition on component `component` of `space`, imposed on the
/// nodes lying on facets marked `marker` of that component's mesh.
#[derive(Clone)]
pub struct DirichletBC {
    pub space: FunctionSpace,
    pub component: usize,
    pub marker: i32,
    pub value: BoundaryValue,
    dofs: Vec<usize>,
}

impl fmt::Debug for DirichletBC {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DirichletBC")
            .field("component", &self.component)
            .field("marker", &self.marker)
            .field("dofs", &self.dofs.len())
            .finish()
    }
}

fn on_segment(x: [f64; 2], a: [f64; 2], b: [f64; 2]) -> bool {
    let t = [b[0] - a[0], b[1] - a[1]];
    let l2 = t[0] * t[0] + t[1] * t[1];
    let s = ((x[0] - a[0]) * t[0] + (x[1] - a[1]) * t[1]) / l2;
    let len = l2.sqrt();
    if s < -BC_GEOMETRY_TOL / len || s > 1.0 + BC_GEOMETRY_TOL / len {
        return false;
    }
    let p = [a[0] + s * t[0], a[1] + s * t[1]];
    (p[0] - x[0]).hypot(p[1] - x[1]) <= BC_GEOMETRY_TOL
}

impl DirichletBC {
    pub fn new(
        space: &FunctionSpace,
        component: usize,
        marker: i32,
        value: impl Fn([f64; 2]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        let mesh = space.component_mesh(component);
        let layout = space.component(component);
        let bs = space.component_element(component).block_size();
        let mut dofs = BTreeSet::new();
        for (&f, &m) in mesh.facet_markers() {
            if m != marker {
                continue;
            }
            let facet = mesh.facet(f);
            let verts: Vec<[f64; 2]> = facet.vertices.iter().map(|&v| mesh.vertices()[v]).collect();
            for &(cell, _) in &facet.incident {
                for &d in &layout.cell_dofs[cell] {
                    let node = (d - layout.offset) / bs;
                    let x = layout.node_coords[node];
                    let hit = match verts.as_slice() {
                        [a, b] => on_segment(x, *a, *b),
                        [a] => (a[0] - x[0]).hypot(a[1] - x[1]) <= BC_GEOMETRY_TOL,
                        _ => false,
                    };
                    if hit {
                        dofs.insert(d);
                    }
                }
            }
        }
        DirichletBC { space: space.clone(), component, marker, value: Arc::new(value), dofs: dofs.into_iter().collect() }
    }

    /// Constrained global dofs, ascending.
    pub fn dofs(&self) -> &[usize] {
        &self.dofs
    }

    /// Boundary value at each constrained dof.
    pub fn values(&self) -> Vec<f64> {
        let layout = self.space.component(self.component);
        let bs = self.space.component_element(self.component).block_size();
        self.dofs.iter().map(|&d| (self.value)(layout.node_coords[(d - layout.offset) / bs])).collect()
    }
}

/// Union of constrained dofs.
pub fn constrained_dofs(bcs: &[DirichletBC]) -> BTreeSet<usize> {
    bcs.iter().flat_map(|b| b.dofs().iter().copied()).collect()
}

/// Replaces constrained rows by identity rows.
pub fn apply_bcs_matrix(a: &mut CsrMatrix, bcs: &[DirichletBC]) {
    let fixed = constrained_dofs(bcs);
    let mut needs_diag = Vec::new();
    for &r in &fixed {
        let (cols, vals) = a.row_values_mut(r);
        let mut has_diag = false;
        for (c, v) in cols.iter().zip(vals.iter_mut()) {
            *v = if *c == r { 1.0 } else { 0.0 };
            has_diag |= *c == r;
        }
        if !has_diag {
            needs_diag.push(r);
        }
    }
    if !needs_diag.is_empty() {
        let mut t = a.triplets();
        t.extend(needs_diag.into_iter().map(|r| (r, r, 1.0)));
        *a = CsrMatrix::from_triplets(a.nrows, a.ncols, t);
    }
}

/// Sets constrained entries to the boundary values, or to zero when
/// `with_values` is false (homogeneous corrections).
pub fn apply_bcs_vector(b: &mut [f64], bcs: &[DirichletBC], with_values: bool) {
    for bc in bcs {
        let values = bc.values();
        for (&d, g) in bc.dofs().iter().zip(values) {
            b[d] = if with_values { g } else { 0.0 };
        }
    }
}

/// Symmetric application: known values are lifted into the right-hand side
/// and constrained rows and columns are replaced by identity.
pub fn apply_bcs_symmetric(a: &mut CsrMatrix, b: &mut [f64], bcs: &[DirichletBC]) {
    let mut g = vec![0.0; a.ncols];
    let mut fixed = vec![false; a.ncols];
    for bc in bcs {
        for (&d, v) in bc.dofs().iter().zip(bc.values()) {
            g[d] = v;
            fixed[d] = true;
        }
    }
    let lift = a.matvec(&g);
    for (r, l) in lift.iter().enumerate() {
        if !fixed[r] {
            b[r] -= l;
        }
    }
    let t: Vec<(usize, usize, f64)> =
        a.triplets().into_iter().filter(|&(r, c, _)| !fixed[r] && !fixed[c]).collect();
    let mut t = t;
    for (d, &f) in fixed.iter().enumerate() {
        if f {
            t.push((d, d, 1.0));
            b[d] = g[d];
        }
    }
    *a = CsrMatrix::from_triplets(a.nrows, a.ncols, t);
}
