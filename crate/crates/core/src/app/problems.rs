use std::f64::consts::PI;
use std::sync::Arc;

use super::AppError;
use crate::assemble::DirichletBC;
use crate::fe::{Family, ReferenceElement};
use crate::forms::{
    avg, cos, entry, facet_normal, grad, inner, jump, spatial_coordinate, split, test_function,
    Coefficient, Expr, Form, FunctionSpace, IntegralType, Measure, MeshSequence, MixedElement,
};
use crate::mesh::{
    build_hybrid_unit_square, build_split_unit_square, CellType, EntityMap, Mesh, INTERFACE_MARKER,
    OUTER_BOUNDARY_MARKER,
};

/// Manufactured solution `cos(2πx) cos(2πy)` with its gradient.
pub fn exact_solution(x: [f64; 2]) -> (f64, [f64; 2]) {
    let (cx, sx) = ((2.0 * PI * x[0]).cos(), (2.0 * PI * x[0]).sin());
    let (cy, sy) = ((2.0 * PI * x[1]).cos(), (2.0 * PI * x[1]).sin());
    (cx * cy, [-2.0 * PI * sx * cy, -2.0 * PI * cx * sy])
}

/// Mesh size entering the penalty.
pub fn mesh_size(n: u32) -> f64 {
    0.10 / f64::from(1u32 << n)
}

/// `8π² cos(2πx) cos(2πy)` in the coordinates of `mesh`.
fn source(mesh: &Arc<Mesh>) -> Expr {
    let x = spatial_coordinate(mesh);
    8.0 * PI * PI * cos(&(2.0 * PI * entry(&x, 0))) * cos(&(2.0 * PI * entry(&x, 1)))
}

/// A benchmark residual with everything needed to solve and check it.
#[derive(Debug, Clone)]
pub struct Problem {
    pub parent: Arc<Mesh>,
    pub space: FunctionSpace,
    pub u: Coefficient,
    pub residual: Form,
    pub bcs: Vec<DirichletBC>,
    /// Components carrying the bulk solution, over which errors are measured.
    pub bulk: Vec<usize>,
    /// Submesh to parent maps, by component.
    pub maps: Vec<EntityMap>,
    /// Intersection measures coupling components.
    pub interface_measures: Vec<Measure>,
}

impl Problem {
    pub fn mesh(&self, k: usize) -> &Arc<Mesh> {
        self.space.component_mesh(k)
    }
}

fn bulk_element(cell: CellType, p: usize) -> Result<ReferenceElement, AppError> {
    let family = if cell == CellType::Quadrilateral { Family::Q } else { Family::P };
    Ok(ReferenceElement::new(cell, family, p)?)
}

fn outer_bcs(space: &FunctionSpace, components: &[usize]) -> Vec<DirichletBC> {
    components
        .iter()
        .map(|&k| DirichletBC::new(space, k, OUTER_BOUNDARY_MARKER, |x| exact_solution(x).0))
        .collect()
}

/// Two codim-0 submeshes glued by symmetric interior penalty across the
/// interface. Used by the quad-tri study and as the reference operator of
/// the split-square elimination check.
fn interior_penalty(parent: Mesh, p: usize, n: u32, penalty: f64) -> Result<Problem, AppError> {
    let parent = Arc::new(parent);
    let (a, map_a) = Mesh::extract_codim0_submesh(&parent, 1)?;
    let (b, map_b) = Mesh::extract_codim0_submesh(&parent, 2)?;
    let (a, b) = (Arc::new(a), Arc::new(b));
    let element = MixedElement::new(vec![
        bulk_element(a.cell(0).cell_type, p)?,
        bulk_element(b.cell(0).cell_type, p)?,
    ])?;
    let space = FunctionSpace::new(MeshSequence::new(vec![a.clone(), b.clone()])?, element)?;
    let u = Coefficient::new(&space, "u");
    let v = test_function(&space);
    let us = split(&Expr::from(&u))?;
    let vs = split(&v)?;
    let (na, nb) = (facet_normal(&a), facet_normal(&b));

    let dx_a = Measure::dx(&a)?;
    let dx_b = Measure::dx(&b)?;
    let ds_a = Measure::ds(&a)?.intersect(IntegralType::ExteriorFacet, &b)?.subdomain(INTERFACE_MARKER);
    let ds_b = Measure::ds(&b)?.intersect(IntegralType::ExteriorFacet, &a)?.subdomain(INTERFACE_MARKER);
    let c_h = penalty / mesh_size(n);

    let residual = inner(&grad(&us[0]), &grad(&vs[0])) * &dx_a + inner(&grad(&us[1]), &grad(&vs[1])) * &dx_b
        - inner(&avg(&[grad(&us[0]), grad(&us[1])])?, &jump(&vs, &[na.clone(), nb.clone()])?) * &ds_a
        - inner(&jump(&us, &[na, nb])?, &avg(&[grad(&vs[0]), grad(&vs[1])])?) * &ds_b
        + (c_h * inner(&(&us[0] - &us[1]), &(&vs[0] - &vs[1]))) * &ds_a
        - (source(&a) * &vs[0]) * &dx_a
        - (source(&b) * &vs[1]) * &dx_b;

    let bcs = outer_bcs(&space, &[0, 1]);
    Ok(Problem {
        parent,
        space,
        u,
        residual,
        bcs,
        bulk: vec![0, 1],
        maps: vec![map_a, map_b],
        interface_measures: vec![ds_a, ds_b],
    })
}

/// Quadrilaterals (Q_p) on the left half, triangles (P_p) on the right.
pub fn quad_tri_problem(p: usize, n: u32, penalty: f64) -> Result<Problem, AppError> {
    interior_penalty(build_hybrid_unit_square(n), p, n, penalty)
}

/// Interior penalty between the two halves of the all-quadrilateral square.
pub fn split_interior_penalty_problem(p: usize, n: u32, penalty: f64) -> Result<Problem, AppError> {
    interior_penalty(build_split_unit_square(n), p, n, penalty)
}

/// Left and right halves of the quadrilateral square (Q_p) coupled through an
/// auxiliary flux variable (P_p) on the interval mesh of the interface.
/// Components are ordered left, interface, right.
pub fn split_interface_problem(p: usize, n: u32, penalty: f64) -> Result<Problem, AppError> {
    let parent = Arc::new(build_split_unit_square(n));
    let (l, map_l) = Mesh::extract_codim0_submesh(&parent, 1)?;
    let (r, map_r) = Mesh::extract_codim0_submesh(&parent, 2)?;
    let (i, map_i) = Mesh::extract_codim1_submesh(&parent, INTERFACE_MARKER)?;
    let (l, i, r) = (Arc::new(l), Arc::new(i), Arc::new(r));
    let element = MixedElement::new(vec![
        ReferenceElement::new(CellType::Quadrilateral, Family::Q, p)?,
        ReferenceElement::new(CellType::Interval, Family::P, p)?,
        ReferenceElement::new(CellType::Quadrilateral, Family::Q, p)?,
    ])?;
    let space = FunctionSpace::new(MeshSequence::new(vec![l.clone(), i.clone(), r.clone()])?, element)?;
    let u = Coefficient::new(&space, "u");
    let v = test_function(&space);
    let us = split(&Expr::from(&u))?;
    let vs = split(&v)?;
    let (ul, ui, ur) = (&us[0], &us[1], &us[2]);
    let (vl, vi, vr) = (&vs[0], &vs[1], &vs[2]);
    let (nl, nr) = (facet_normal(&l), facet_normal(&r));

    let dx_l = Measure::dx(&l)?;
    let dx_r = Measure::dx(&r)?;
    let dz = Measure::dx(&i)?
        .intersect(IntegralType::ExteriorFacet, &l)?
        .intersect(IntegralType::ExteriorFacet, &r)?;
    let c_h = penalty / mesh_size(n);
    let jump_u = jump(&[ul.clone(), ur.clone()], &[nl.clone(), nr.clone()])?;
    let jump_v = jump(&[vl.clone(), vr.clone()], &[nl.clone(), nr.clone()])?;
    let flux = (inner(&grad(ul), &nl) - inner(&grad(ur), &nr)) / 2.0;

    let residual = inner(&grad(ul), &grad(vl)) * &dx_l + inner(&grad(ur), &grad(vr)) * &dx_r
        - (ui * (vl - vr)) * &dz
        - inner(&jump_u, &avg(&[grad(vl), grad(vr)])?) * &dz
        + (c_h * inner(&jump_u, &jump_v)) * &dz
        - ((flux - ui) * vi) * &dz
        - (source(&l) * vl) * &dx_l
        - (source(&r) * vr) * &dx_r;

    let bcs = outer_bcs(&space, &[0, 2]);
    Ok(Problem {
        parent,
        space,
        u,
        residual,
        bcs,
        bulk: vec![0, 2],
        maps: vec![map_l, map_i, map_r],
        interface_measures: vec![dz],
    })
}
