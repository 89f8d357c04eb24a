use std::sync::Arc;

use multimesh::assemble::{assemble_matrix, assemble_scalar, assemble_vector, CsrMatrix};
use multimesh::compile::{align_interface_quadrature, compile_integral, CompileError};
use multimesh::fe::{make_quadrature, CellGeometry, Family, ReferenceElement};
use multimesh::forms::{
    facet_normal, grad, inner, split, test_function, trial_function, Coefficient, Expr, FunctionSpace,
    IntegralType, Measure, MeshSequence, MixedElement, Side,
};
use multimesh::mesh::{Cell, CellType, Mesh, INTERFACE_MARKER};

fn single(cell_type: CellType, vertices: Vec<[f64; 2]>) -> Arc<Mesh> {
    let n = vertices.len();
    Arc::new(Mesh::new(2, vertices, vec![Cell { cell_type, vertices: (0..n).collect() }], vec![1], &[]).unwrap())
}

fn p1(mesh: &Arc<Mesh>) -> FunctionSpace {
    FunctionSpace::single(mesh, ReferenceElement::new(CellType::Triangle, Family::P, 1).unwrap()).unwrap()
}

/// Dof of the node at `x`.
fn dof_at(space: &FunctionSpace, k: usize, x: [f64; 2]) -> usize {
    let c = space.component(k);
    let node = c.node_coords.iter().position(|y| (y[0] - x[0]).hypot(y[1] - x[1]) < 1e-12).unwrap();
    c.offset + node
}

fn stiffness(mesh: &Arc<Mesh>) -> (FunctionSpace, CsrMatrix) {
    let v = p1(mesh);
    let form = inner(&grad(&trial_function(&v)), &grad(&test_function(&v))) * &Measure::dx(mesh).unwrap();
    let a = assemble_matrix(&form, &v, &v).unwrap();
    (v, a)
}

#[test]
fn unit_integral_on_a_quad() {
    let mesh = single(CellType::Quadrilateral, vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]);
    let one = assemble_scalar(&(Expr::constant(1.0) * &Measure::dx(&mesh).unwrap())).unwrap();
    assert!((one - 1.0).abs() < 1e-14);
    let perimeter = assemble_scalar(&(Expr::constant(1.0) * &Measure::ds(&mesh).unwrap())).unwrap();
    assert!((perimeter - 4.0).abs() < 1e-14);
}

#[test]
fn reference_p1_stiffness_and_load() {
    let verts = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
    let mesh = single(CellType::Triangle, verts.to_vec());
    let (v, a) = stiffness(&mesh);
    let expected = [[1.0, -0.5, -0.5], [-0.5, 0.5, 0.0], [-0.5, 0.0, 0.5]];
    for i in 0..3 {
        for j in 0..3 {
            let got = a.get(dof_at(&v, 0, verts[i]), dof_at(&v, 0, verts[j]));
            assert!((got - expected[i][j]).abs() < 1e-14, "({i},{j}) {got}");
        }
    }
    let b = assemble_vector(&(test_function(&v) * &Measure::dx(&mesh).unwrap()), &v).unwrap();
    assert!(b.iter().all(|x| (x - 0.5 / 3.0).abs() < 1e-15));
}

#[test]
fn stiffness_is_scale_invariant_and_mass_is_not() {
    let verts = [[0.1, 0.2], [0.9, 0.3], [0.4, 1.1]];
    let (_, a) = stiffness(&single(CellType::Triangle, verts.to_vec()));
    for s in [0.01, 3.0, 250.0] {
        let scaled: Vec<[f64; 2]> = verts.iter().map(|x| [s * x[0], s * x[1]]).collect();
        let mesh = single(CellType::Triangle, scaled);
        let (v, b) = stiffness(&mesh);
        assert!(a.max_abs_diff(&b) < 1e-12 * a.max_abs());
        let mass = (trial_function(&v) * test_function(&v)) * &Measure::dx(&mesh).unwrap();
        let m = assemble_matrix(&mass, &v, &v).unwrap();
        let area = 0.5 * ((0.8 * 0.9) - (0.1 * 0.3)) * s * s;
        assert!((m.get(0, 0) - area / 6.0).abs() < 1e-12 * area);
    }
}

#[test]
fn zero_coefficient_gives_zero_residual() {
    let mesh = single(CellType::Quadrilateral, vec![[0.0, 0.0], [2.0, 0.0], [2.0, 1.0], [0.0, 1.0]]);
    let v = FunctionSpace::single(&mesh, ReferenceElement::new(CellType::Quadrilateral, Family::Q, 2).unwrap()).unwrap();
    let u = Coefficient::new(&v, "u");
    let form = inner(&grad(&Expr::from(&u)), &grad(&test_function(&v))) * &Measure::dx(&mesh).unwrap();
    assert!(assemble_vector(&form, &v).unwrap().iter().all(|x| *x == 0.0));
}

/// A unit quad `[-1,0]×[0,1]` and a triangle sharing the edge `x = 0`.
fn quad_and_triangle() -> (Arc<Mesh>, Arc<Mesh>) {
    let vertices = vec![[-1.0, 0.0], [0.0, 0.0], [0.0, 1.0], [-1.0, 1.0], [0.8, 0.4]];
    let cells = vec![
        Cell { cell_type: CellType::Quadrilateral, vertices: vec![0, 1, 2, 3] },
        Cell { cell_type: CellType::Triangle, vertices: vec![1, 4, 2] },
    ];
    let parent = Arc::new(Mesh::new(2, vertices, cells, vec![1, 2], &[(vec![1, 2], INTERFACE_MARKER)]).unwrap());
    let (a, _) = Mesh::extract_codim0_submesh(&parent, 1).unwrap();
    let (b, _) = Mesh::extract_codim0_submesh(&parent, 2).unwrap();
    (Arc::new(a), Arc::new(b))
}

#[test]
fn interface_penalty_is_the_edge_mass_matrix() {
    let (a, b) = quad_and_triangle();
    let space = FunctionSpace::new(
        MeshSequence::new(vec![a.clone(), b.clone()]).unwrap(),
        MixedElement::new(vec![
            ReferenceElement::new(CellType::Quadrilateral, Family::Q, 1).unwrap(),
            ReferenceElement::new(CellType::Triangle, Family::P, 1).unwrap(),
        ])
        .unwrap(),
    )
    .unwrap();
    let us = split(&trial_function(&space)).unwrap();
    let vs = split(&test_function(&space)).unwrap();
    let ds = Measure::ds(&a).unwrap().intersect(IntegralType::ExteriorFacet, &b).unwrap().subdomain(INTERFACE_MARKER);
    let c_h = 7.5;
    let form = (c_h * inner(&(&us[0] - &us[1]), &(&vs[0] - &vs[1]))) * &ds;
    let m = assemble_matrix(&form, &space, &space).unwrap();
    let ends = [[0.0, 0.0], [0.0, 1.0]];
    let mass = [[1.0 / 3.0, 1.0 / 6.0], [1.0 / 6.0, 1.0 / 3.0]];
    for (ki, kj, sign) in [(0, 0, 1.0), (0, 1, -1.0), (1, 0, -1.0), (1, 1, 1.0)] {
        for i in 0..2 {
            for j in 0..2 {
                let got = m.get(dof_at(&space, ki, ends[i]), dof_at(&space, kj, ends[j]));
                assert!((got - sign * c_h * mass[i][j]).abs() < 1e-13, "{ki}{kj} {i}{j}: {got}");
            }
        }
    }
    let total: f64 = m.triplets().iter().map(|t| t.2.abs()).sum();
    assert!((total - 4.0 * c_h).abs() < 1e-12);
}

#[test]
fn pullback_alignment() {
    let quad = CellGeometry::new(CellType::Quadrilateral, vec![[-1.0, 0.0], [0.0, 0.0], [0.0, 1.0], [-1.0, 1.0]]);
    let tri = CellGeometry::new(CellType::Triangle, vec![[0.0, 0.0], [0.8, 0.4], [0.0, 1.0]]);
    let rule = make_quadrature(CellType::Quadrilateral, 4).unwrap();
    let own: Vec<[f64; 2]> = rule.points.iter().map(|&xi| quad.map(xi)).collect();
    let back = align_interface_quadrature(&own, &quad).unwrap();
    for (xi, b) in rule.points.iter().zip(&back) {
        assert!((xi[0] - b[0]).abs() < 1e-13 && (xi[1] - b[1]).abs() < 1e-13);
    }

    let edge = make_quadrature(CellType::Interval, 5).unwrap();
    for reversed in [false, true] {
        let points: Vec<[f64; 2]> =
            edge.points.iter().map(|t| [0.0, if reversed { 1.0 - t[0] } else { t[0] }]).collect();
        let in_quad = align_interface_quadrature(&points, &quad).unwrap();
        let in_tri = align_interface_quadrature(&points, &tri).unwrap();
        for ((x, q), t) in points.iter().zip(&in_quad).zip(&in_tri) {
            let (xq, xt) = (quad.map(*q), tri.map(*t));
            assert!((xq[0] - x[0]).hypot(xq[1] - x[1]) < 1e-13);
            assert!((xt[0] - x[0]).hypot(xt[1] - x[1]) < 1e-13);
            assert!((q[0] - 1.0).abs() < 1e-13);
            assert!(t[0].abs() < 1e-13);
        }
    }
}

/// Two triangles sharing the diagonal, listed in either order.
fn diamond(swap: bool) -> Arc<Mesh> {
    let vertices = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
    let mut cells = vec![
        Cell { cell_type: CellType::Triangle, vertices: vec![0, 1, 2] },
        Cell { cell_type: CellType::Triangle, vertices: vec![0, 2, 3] },
    ];
    if swap {
        cells.reverse();
    }
    Arc::new(Mesh::new(2, vertices, cells, vec![1, 1], &[]).unwrap())
}

#[test]
fn interior_facet_integrals_ignore_side_labels() {
    let values = |swap: bool| {
        let mesh = diamond(swap);
        let v = p1(&mesh);
        let w = Coefficient::new(&v, "w");
        w.update(|vals| v.interpolate_component(0, vals, |x| x[0] * x[0] + 3.0 * x[0] * x[1]));
        let g = grad(&Expr::from(&w));
        let jump = g.restricted(Side::Plus) - g.restricted(Side::Minus);
        let n = facet_normal(&mesh);
        let ds = Measure::dS(&mesh).unwrap();
        let squared = assemble_scalar(&(inner(&jump, &jump) * &ds)).unwrap();
        let flux = assemble_scalar(&(inner(&jump, &n.restricted(Side::Plus)) * &ds)).unwrap();
        (squared, flux)
    };
    let (a, b) = (values(false), values(true));
    assert!(a.0 > 1e-3);
    assert!((a.0 - b.0).abs() < 1e-13 && (a.1 - b.1).abs() < 1e-13);
}

#[test]
fn unsupported_node_is_reported() {
    let mesh = single(CellType::Quadrilateral, vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]);
    let n = facet_normal(&mesh);
    let form = inner(&grad(&n), &grad(&n)) * &Measure::ds(&mesh).unwrap();
    let err = compile_integral(&form.integrals[0]).unwrap_err();
    assert!(matches!(err, CompileError::Unsupported(_)));
    assert!(err.to_string().starts_with("unsupported node kind"), "{err}");
}
