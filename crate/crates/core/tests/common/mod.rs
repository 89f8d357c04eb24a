#![allow(dead_code)]

use std::collections::BTreeSet;
use std::sync::Arc;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use multimesh::app::Problem;
use multimesh::assemble::{assemble_with_spaces, iteration_set, norm2, CsrMatrix};
use multimesh::fe::{Family, ReferenceElement, ValueShape};
use multimesh::forms::{
    component_derivative, derivative, facet_normal, inner, split, Coefficient, Expr, Form, FunctionSpace,
    IntegralType, Measure, MeshSequence, MixedElement, Side,
};
use multimesh::mesh::{build_split_unit_square, CellType, EntityMap, Mesh, INTERFACE_MARKER};

/// `max |a − b| / max |a|`
pub fn rel_max_diff(a: &CsrMatrix, b: &CsrMatrix) -> f64 {
    a.max_abs_diff(b) / a.max_abs().max(f64::MIN_POSITIVE)
}

pub fn jacobian(problem: &Problem) -> CsrMatrix {
    let spaces = [problem.space.clone(), problem.space.clone()];
    let j = derivative(&problem.residual, &problem.u);
    assemble_with_spaces(&j, &spaces).unwrap().into_matrix().unwrap()
}

pub fn residual(problem: &Problem) -> Vec<f64> {
    assemble_with_spaces(&problem.residual, std::slice::from_ref(&problem.space)).unwrap().into_vector().unwrap()
}

/// Largest relative error of the assembled Jacobian against central
/// differences of the assembled residual over `directions` random
/// directions at a random state.
pub fn finite_difference_error(problem: &Problem, seed: u64, directions: usize, eps: f64) -> f64 {
    let mut rng = StdRng::seed_from_u64(seed);
    let n = problem.space.num_dofs();
    let u0: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    problem.u.set_values(&u0);
    let j = jacobian(problem);
    let mut worst: f64 = 0.0;
    for _ in 0..directions {
        let d: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let shifted = |s: f64| {
            let v: Vec<f64> = u0.iter().zip(&d).map(|(u, d)| u + s * d).collect();
            problem.u.set_values(&v);
            residual(problem)
        };
        let (fp, fm) = (shifted(eps), shifted(-eps));
        let fd: Vec<f64> = fp.iter().zip(&fm).map(|(p, m)| (p - m) / (2.0 * eps)).collect();
        let jd = j.matvec(&d);
        let diff: Vec<f64> = jd.iter().zip(&fd).map(|(a, b)| a - b).collect();
        worst = worst.max(norm2(&diff) / norm2(&jd));
    }
    problem.u.set_values(&u0);
    worst
}

/// Monolithic Jacobian against the sum of per-component derivatives.
pub fn component_sum_error(problem: &Problem) -> f64 {
    let spaces = [problem.space.clone(), problem.space.clone()];
    let mono = jacobian(problem);
    let mut sum = CsrMatrix::from_triplets(mono.nrows, mono.ncols, vec![]);
    for k in 0..problem.space.num_components() {
        let jk = component_derivative(&problem.residual, &problem.u, k);
        if jk.is_empty() {
            continue;
        }
        let a = assemble_with_spaces(&jk, &spaces).unwrap().into_matrix().unwrap();
        sum = sum.add_scaled(1.0, &a);
    }
    rel_max_diff(&mono, &sum)
}

/// Parent facet of every exterior facet of a codim-0 submesh, via its cell map.
fn exterior_parent_facets(sub: &Mesh, map: &EntityMap, parent: &Mesh, marker: Option<i32>) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for f in 0..sub.num_facets() {
        let facet = sub.facet(f);
        if facet.incident.len() != 1 || marker.is_some_and(|m| sub.facet_marker(f) != Some(m)) {
            continue;
        }
        let (c, lf) = facet.incident[0];
        out.push((f, parent.cell_facet(map.table()[c], lf)));
    }
    out
}

/// Brute-force iteration sets of the interface measures of a benchmark
/// problem, as sets of (primal entity, entity of each other participant).
pub fn brute_force_interface_sets(problem: &Problem) -> Vec<BTreeSet<Vec<usize>>> {
    let parent = &problem.parent;
    if problem.space.num_components() == 2 {
        let a = exterior_parent_facets(problem.mesh(0), &problem.maps[0], parent, Some(INTERFACE_MARKER));
        let b = exterior_parent_facets(problem.mesh(1), &problem.maps[1], parent, None);
        let a_all = exterior_parent_facets(problem.mesh(0), &problem.maps[0], parent, None);
        let b_marked = exterior_parent_facets(problem.mesh(1), &problem.maps[1], parent, Some(INTERFACE_MARKER));
        let pairs = |x: &[(usize, usize)], y: &[(usize, usize)]| -> BTreeSet<Vec<usize>> {
            let mut s = BTreeSet::new();
            for &(fx, px) in x {
                for &(fy, py) in y {
                    if px == py {
                        s.insert(vec![fx, fy]);
                    }
                }
            }
            s
        };
        vec![pairs(&a, &b), pairs(&b_marked, &a_all)]
    } else {
        let l = exterior_parent_facets(problem.mesh(0), &problem.maps[0], parent, None);
        let r = exterior_parent_facets(problem.mesh(2), &problem.maps[2], parent, None);
        let mut s = BTreeSet::new();
        for (c, &pf) in problem.maps[1].table().iter().enumerate() {
            let fl = l.iter().find(|x| x.1 == pf);
            let fr = r.iter().find(|x| x.1 == pf);
            if let (Some(fl), Some(fr)) = (fl, fr) {
                s.insert(vec![c, fl.0, fr.0]);
            }
        }
        vec![s]
    }
}

/// Iteration set of a measure as (primal entity, facet or cell of each
/// other participant).
pub fn assembler_set(m: &Measure) -> BTreeSet<Vec<usize>> {
    let parts = m.participants();
    iteration_set(m)
        .unwrap()
        .into_iter()
        .map(|e| {
            let mut key = vec![e.primal];
            for ((_, mesh), b) in parts[1..].iter().zip(&e.binding.parts[1..]) {
                key.push(match b[0] {
                    (c, Some(lf)) => mesh.cell_facet(c, lf),
                    (c, None) => c,
                });
            }
            key
        })
        .collect()
}

/// Meshes for the restriction examples: the split-square parent `p`, a
/// codim-0 copy `w` of the whole parent, the left half `l` and the
/// interface interval mesh `i`.
pub struct ValidityMeshes {
    pub p: Arc<Mesh>,
    pub w: Arc<Mesh>,
    pub l: Arc<Mesh>,
    pub i: Arc<Mesh>,
}

pub fn validity_meshes() -> ValidityMeshes {
    let p = Arc::new(build_split_unit_square(0));
    let whole = Arc::new(p.relabel_cells(|_, _| 7));
    let (w, _) = Mesh::extract_codim0_submesh(&whole, 7).unwrap();
    let (l, _) = Mesh::extract_codim0_submesh(&p, 1).unwrap();
    let (i, _) = Mesh::extract_codim1_submesh(&p, INTERFACE_MARKER).unwrap();
    ValidityMeshes { p, w: Arc::new(w), l: Arc::new(l), i: Arc::new(i) }
}

fn q1(shape: ValueShape) -> ReferenceElement {
    ReferenceElement::with_shape(CellType::Quadrilateral, Family::Q, 1, shape).unwrap()
}

fn components(meshes: &[&Arc<Mesh>], elements: Vec<ReferenceElement>) -> Vec<Expr> {
    let seq = MeshSequence::new(meshes.iter().map(|m| Arc::clone(m)).collect()).unwrap();
    let space = FunctionSpace::new(seq, MixedElement::new(elements).unwrap()).unwrap();
    split(&Expr::from(&Coefficient::new(&space, "u"))).unwrap()
}

fn ds(t: IntegralType, m: &Arc<Mesh>) -> Measure {
    Measure::new(t, m).unwrap()
}

const INT: IntegralType = IntegralType::InteriorFacet;
const EXT: IntegralType = IntegralType::ExteriorFacet;
const CELL: IntegralType = IntegralType::Cell;

/// The five facet integrals and the codim-1 integral that must be accepted,
/// followed by the two that must be rejected.
pub type NamedForms = Vec<(&'static str, Form)>;

pub fn validity_examples() -> (NamedForms, NamedForms) {
    let m = validity_meshes();
    let (p, w, l) = (&m.p, &m.w, &m.l);
    let scalar = || q1(ValueShape::Scalar);
    let vector = || q1(ValueShape::Vector);

    // u0 on p (dS), u1 on w (dS), u2 on l (ds)
    let u = components(&[p, w, l], vec![scalar(), scalar(), vector()]);
    let n2 = facet_normal(l);
    let a_measure = ds(INT, p).intersect(INT, w).unwrap().intersect(EXT, l).unwrap();
    let valid_a = (u[0].plus() * u[1].plus() * inner(&u[2], &n2)) * &a_measure;

    // u0 on p (dS), u1 on l (ds), u2 on w (dS)
    let u = components(&[p, l, w], vec![scalar(), scalar(), vector()]);
    let n2 = facet_normal(w);
    let b_measure = ds(INT, p).intersect(EXT, l).unwrap().intersect(INT, w).unwrap();
    let valid_b = (u[0].plus() * &u[1] * inner(&u[2].plus(), &n2.plus())) * &b_measure;

    let u = components(&[p, l], vec![scalar(), scalar()]);
    let c_measure = ds(INT, p).intersect(EXT, l).unwrap();
    let valid_c = (u[0].plus() * &u[1]) * &c_measure;

    // u0 on p (dS), u1 on l (ds), u2 on a second exterior participant
    let (r, _) = Mesh::extract_codim0_submesh(&m.p.clone(), 2).unwrap();
    let r = Arc::new(r);
    let u = components(&[p, l, &r], vec![scalar(), scalar(), vector()]);
    let nr = facet_normal(&r);
    let i_measure = ds(INT, p).intersect(EXT, l).unwrap().intersect(EXT, &r).unwrap();
    let valid_i = (u[0].plus() * &u[1] * inner(&u[2], &nr)) * &i_measure;

    let valid_a_i = valid_a.clone() + valid_i.clone();

    // codim-1: u0 scalar on p (dS), u1 vector on l (ds), u2 vector on i (dx)
    let u = components(&[p, l, &m.i], vec![
        scalar(),
        vector(),
        ReferenceElement::with_shape(CellType::Interval, Family::P, 1, ValueShape::Vector).unwrap(),
    ]);
    let (n0, n1) = (facet_normal(p), facet_normal(l));
    let e_measure = ds(INT, p).intersect(EXT, l).unwrap().intersect(CELL, &m.i).unwrap();
    let flux = u[0].plus() * n0.plus() + u[0].minus() * n0.minus();
    let valid_e = (inner(&flux, &u[2]) + inner(&u[1], &n1)) * &e_measure;

    let u = components(&[p, l], vec![scalar(), scalar()]);
    let unrestricted = (&u[0] * u[1].clone()) * &c_measure;
    let restricted_ext = (u[0].plus() * u[1].restricted(Side::Plus)) * &c_measure;

    (
        vec![
            ("valid_F_A", valid_a),
            ("valid_F_B", valid_b),
            ("valid_F_C", valid_c),
            ("valid_F_I", valid_i),
            ("valid_F_A_F_I", valid_a_i),
            ("valid_E", valid_e),
        ],
        vec![("unrestricted u0 under dS0", unrestricted), ("u1+ under ds1", restricted_ext)],
    )
}
