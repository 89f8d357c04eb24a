use nalgebra::DMatrix;

use super::FeError;
use crate::mesh::CellType;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    /// Simplex Lagrange (interval, triangle).
    P,
    /// Tensor-product Lagrange (quadrilateral).
    Q,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ValueShape {
    Scalar,
    /// 2-vector, stored as two blocked copies of the scalar basis.
    Vector,
}

impl ValueShape {
    pub fn block_size(self) -> usize {
        match self {
            ValueShape::Scalar => 1,
            ValueShape::Vector => 2,
        }
    }
}

/// Topological entity a node belongs to; drives global dof numbering.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeEntity {
    Vertex(usize),
    /// `index`-th interior node of a local facet, counted from the facet's
    /// first local vertex.
    Edge { local_facet: usize, index: usize },
    Interior(usize),
}

/// Nodal Lagrange element on equispaced nodes.
#[derive(Debug, Clone)]
pub struct ReferenceElement {
    cell: CellType,
    family: Family,
    degree: usize,
    value_shape: ValueShape,
    nodes: Vec<[f64; 2]>,
    node_entities: Vec<NodeEntity>,
    monomials: Vec<(i32, i32)>,
    /// `coeffs[(m, j)]`: coefficient of monomial `m` in basis function `j`.
    coeffs: DMatrix<f64>,
    /// Lattice indices of each node for tensor-product cells, evaluated as
    /// products of 1D Lagrange polynomials. Empty for triangles.
    lattice: Vec<(usize, Option<usize>)>,
}

/// Basis values and reference gradients at a set of points.
#[derive(Debug, Clone)]
pub struct Tabulation {
    pub values: Vec<Vec<f64>>,
    pub grads: Vec<Vec<[f64; 2]>>,
}

fn lerp(a: [f64; 2], b: [f64; 2], t: f64) -> [f64; 2] {
    [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
}

impl ReferenceElement {
    pub fn new(cell: CellType, family: Family, degree: usize) -> Result<Self, FeError> {
        Self::with_shape(cell, family, degree, ValueShape::Scalar)
    }

    pub fn with_shape(cell: CellType, family: Family, degree: usize, value_shape: ValueShape) -> Result<Self, FeError> {
        if !(1..=4).contains(&degree) {
            return Err(FeError::UnsupportedDegree(degree));
        }
        let compatible = matches!(
            (cell, family),
            (CellType::Interval, Family::P) | (CellType::Triangle, Family::P) | (CellType::Quadrilateral, Family::Q)
        );
        if !compatible {
            return Err(FeError::IncompatibleFamily { cell, family });
        }
        let p = degree;
        let pf = p as f64;
        let rv = cell.reference_vertices();
        let mut nodes = Vec::new();
        let mut node_entities = Vec::new();
        for (v, &x) in rv.iter().enumerate() {
            nodes.push(x);
            node_entities.push(NodeEntity::Vertex(v));
        }
        if cell != CellType::Interval {
            for lf in 0..cell.num_facets() {
                let fv = cell.facet_vertices(lf);
                for k in 1..p {
                    nodes.push(lerp(rv[fv[0]], rv[fv[1]], k as f64 / pf));
                    node_entities.push(NodeEntity::Edge { local_facet: lf, index: k - 1 });
                }
            }
        }
        let mut interior = Vec::new();
        match cell {
            CellType::Interval => interior.extend((1..p).map(|i| [i as f64 / pf, 0.0])),
            CellType::Triangle => {
                for j in 1..p {
                    for i in 1..p - j {
                        interior.push([i as f64 / pf, j as f64 / pf]);
                    }
                }
            }
            CellType::Quadrilateral => {
                for j in 1..p {
                    for i in 1..p {
                        interior.push([i as f64 / pf, j as f64 / pf]);
                    }
                }
            }
        }
        for (k, x) in interior.into_iter().enumerate() {
            nodes.push(x);
            node_entities.push(NodeEntity::Interior(k));
        }

        let pi = p as i32;
        let monomials: Vec<(i32, i32)> = match cell {
            CellType::Interval => (0..=pi).map(|a| (a, 0)).collect(),
            CellType::Triangle => (0..=pi).flat_map(|b| (0..=pi - b).map(move |a| (a, b))).collect(),
            CellType::Quadrilateral => (0..=pi).flat_map(|b| (0..=pi).map(move |a| (a, b))).collect(),
        };
        debug_assert_eq!(monomials.len(), nodes.len());
        let n = nodes.len();
        let vandermonde = DMatrix::from_fn(n, n, |i, m| {
            let (a, b) = monomials[m];
            nodes[i][0].powi(a) * nodes[i][1].powi(b)
        });
        let coeffs = vandermonde.try_inverse().ok_or(FeError::SingularVandermonde)?;
        let index = |t: f64| (t * pf).round() as usize;
        let lattice = match cell {
            CellType::Interval => nodes.iter().map(|x| (index(x[0]), None)).collect(),
            CellType::Quadrilateral => nodes.iter().map(|x| (index(x[0]), Some(index(x[1])))).collect(),
            CellType::Triangle => Vec::new(),
        };
        Ok(ReferenceElement { cell, family, degree, value_shape, nodes, node_entities, monomials, coeffs, lattice })
    }

    pub fn cell(&self) -> CellType {
        self.cell
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn value_shape(&self) -> ValueShape {
        self.value_shape
    }

    pub fn block_size(&self) -> usize {
        self.value_shape.block_size()
    }

    /// Number of scalar basis functions.
    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    /// Number of dofs including the value-shape blocking.
    pub fn num_dofs(&self) -> usize {
        self.nodes.len() * self.block_size()
    }

    pub fn nodes(&self) -> &[[f64; 2]] {
        &self.nodes
    }

    pub fn node_entities(&self) -> &[NodeEntity] {
        &self.node_entities
    }

    pub fn tabulate(&self, points: &[[f64; 2]]) -> Tabulation {
        if !self.lattice.is_empty() {
            return self.tabulate_tensor(points);
        }
        let n = self.nodes.len();
        let mut values = Vec::with_capacity(points.len());
        let mut grads = Vec::with_capacity(points.len());
        for x in points {
            let mut mv = vec![0.0; n];
            let mut mdx = vec![0.0; n];
            let mut mdy = vec![0.0; n];
            for (m, &(a, b)) in self.monomials.iter().enumerate() {
                let xa = x[0].powi(a);
                let yb = x[1].powi(b);
                mv[m] = xa * yb;
                if a > 0 {
                    mdx[m] = a as f64 * x[0].powi(a - 1) * yb;
                }
                if b > 0 {
                    mdy[m] = b as f64 * xa * x[1].powi(b - 1);
                }
            }
            let mut val = vec![0.0; n];
            let mut grad = vec![[0.0; 2]; n];
            for j in 0..n {
                let (mut v, mut gx, mut gy) = (0.0, 0.0, 0.0);
                for m in 0..n {
                    let c = self.coeffs[(m, j)];
                    v += c * mv[m];
                    gx += c * mdx[m];
                    gy += c * mdy[m];
                }
                val[j] = v;
                grad[j] = [gx, gy];
            }
            values.push(val);
            grads.push(grad);
        }
        Tabulation { values, grads }
    }

    fn tabulate_tensor(&self, points: &[[f64; 2]]) -> Tabulation {
        let mut values = Vec::with_capacity(points.len());
        let mut grads = Vec::with_capacity(points.len());
        for x in points {
            let (lx, dx) = lagrange_1d(self.degree, x[0]);
            let (ly, dy) = lagrange_1d(self.degree, x[1]);
            let mut val = Vec::with_capacity(self.lattice.len());
            let mut grad = Vec::with_capacity(self.lattice.len());
            for &(i, j) in &self.lattice {
                match j {
                    None => {
                        val.push(lx[i]);
                        grad.push([dx[i], 0.0]);
                    }
                    Some(j) => {
                        val.push(lx[i] * ly[j]);
                        grad.push([dx[i] * ly[j], lx[i] * dy[j]]);
                    }
                }
            }
            values.push(val);
            grads.push(grad);
        }
        Tabulation { values, grads }
    }
}

/// Values and derivatives at `t` of the 1D Lagrange basis on the nodes
/// `k / p`, `k = 0..=p`.
fn lagrange_1d(p: usize, t: f64) -> (Vec<f64>, Vec<f64>) {
    let node = |k: usize| k as f64 / p as f64;
    let mut values = vec![0.0; p + 1];
    let mut derivs = vec![0.0; p + 1];
    for k in 0..=p {
        let mut v = 1.0;
        let mut d = 0.0;
        for m in (0..=p).filter(|&m| m != k) {
            let f = (t - node(m)) / (node(k) - node(m));
            d = d * f + v / (node(k) - node(m));
            v *= f;
        }
        values[k] = v;
        derivs[k] = d;
    }
    (values, derivs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_elements() -> Vec<ReferenceElement> {
        let mut out = Vec::new();
        for p in 1..=4 {
            out.push(ReferenceElement::new(CellType::Interval, Family::P, p).unwrap());
            out.push(ReferenceElement::new(CellType::Triangle, Family::P, p).unwrap());
            out.push(ReferenceElement::new(CellType::Quadrilateral, Family::Q, p).unwrap());
        }
        out
    }

    #[test]
    fn dof_counts() {
        for p in 1..=4usize {
            assert_eq!(ReferenceElement::new(CellType::Triangle, Family::P, p).unwrap().num_dofs(), (p + 1) * (p + 2) / 2);
            assert_eq!(ReferenceElement::new(CellType::Quadrilateral, Family::Q, p).unwrap().num_dofs(), (p + 1) * (p + 1));
            assert_eq!(ReferenceElement::new(CellType::Interval, Family::P, p).unwrap().num_dofs(), p + 1);
        }
        let v = ReferenceElement::with_shape(CellType::Triangle, Family::P, 1, ValueShape::Vector).unwrap();
        assert_eq!(v.num_dofs(), 6);
    }

    #[test]
    fn rejects_bad_requests() {
        assert!(matches!(ReferenceElement::new(CellType::Triangle, Family::Q, 1), Err(FeError::IncompatibleFamily { .. })));
        assert!(matches!(ReferenceElement::new(CellType::Quadrilateral, Family::P, 1), Err(FeError::IncompatibleFamily { .. })));
        assert!(matches!(ReferenceElement::new(CellType::Triangle, Family::P, 0), Err(FeError::UnsupportedDegree(0))));
        assert!(matches!(ReferenceElement::new(CellType::Triangle, Family::P, 5), Err(FeError::UnsupportedDegree(5))));
    }

    #[test]
    fn nodal_basis_is_kronecker_delta() {
        for e in all_elements() {
            let tab = e.tabulate(e.nodes());
            for (i, row) in tab.values.iter().enumerate() {
                for (j, &v) in row.iter().enumerate() {
                    let expected = if i == j { 1.0 } else { 0.0 };
                    assert!((v - expected).abs() < 1e-12, "{:?} p={} node {i} basis {j}: {v}", e.cell(), e.degree());
                }
            }
        }
    }

    #[test]
    fn p1_triangle_centroid_values() {
        let e = ReferenceElement::new(CellType::Triangle, Family::P, 1).unwrap();
        let tab = e.tabulate(&[[1.0 / 3.0, 1.0 / 3.0]]);
        for v in &tab.values[0] {
            assert!((v - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn partition_of_unity_and_zero_gradient_sum() {
        let pts = [[0.1, 0.2], [0.3, 0.05], [0.0, 0.0], [0.25, 0.7]];
        for e in all_elements() {
            let pts: Vec<[f64; 2]> = pts
                .iter()
                .map(|p| if e.cell() == CellType::Interval { [p[0], 0.0] } else { *p })
                .collect();
            let tab = e.tabulate(&pts);
            for q in 0..pts.len() {
                let s: f64 = tab.values[q].iter().sum();
                let gx: f64 = tab.grads[q].iter().map(|g| g[0]).sum();
                let gy: f64 = tab.grads[q].iter().map(|g| g[1]).sum();
                assert!((s - 1.0).abs() < 1e-12);
                assert!(gx.abs() < 1e-10 && gy.abs() < 1e-10);
            }
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let e = ReferenceElement::new(CellType::Quadrilateral, Family::Q, 3).unwrap();
        let x = [0.37, 0.61];
        let h = 1e-6;
        let tab = e.tabulate(&[x, [x[0] + h, x[1]], [x[0] - h, x[1]], [x[0], x[1] + h], [x[0], x[1] - h]]);
        for j in 0..e.num_nodes() {
            let dx = (tab.values[1][j] - tab.values[2][j]) / (2.0 * h);
            let dy = (tab.values[3][j] - tab.values[4][j]) / (2.0 * h);
            assert!((dx - tab.grads[0][j][0]).abs() < 1e-7);
            assert!((dy - tab.grads[0][j][1]).abs() < 1e-7);
        }
    }
}
