use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use super::tape::{apply, infer, Op, SlotType};
use super::CompileError;
use crate::fe::{
    default_quadrature_degree, make_quadrature, CellGeometry, QuadratureRule, ReferenceElement, MAX_QUADRATURE_DEGREE,
};
use crate::forms::{function_space_of, Coefficient, Expr, FunctionSpace, Integral, IntegralType, MathFunction, Node, Side};
use crate::mesh::{CellType, Mesh};

/// A mesh taking part in an integral and how it does so.
#[derive(Debug, Clone)]
pub struct Participant {
    pub role: IntegralType,
    pub mesh: Arc<Mesh>,
}

impl Participant {
    /// Number of cells bound per integration entity (2 for interior facets).
    pub fn num_sides(&self) -> usize {
        if self.role == IntegralType::InteriorFacet {
            2
        } else {
            1
        }
    }
}

/// Basis of one element evaluated on one participant cell.
#[derive(Debug, Clone)]
pub struct BasisSource {
    pub part: usize,
    pub side: usize,
    pub element: ReferenceElement,
}

/// Local dofs of one argument component on one participant cell.
#[derive(Debug, Clone)]
pub struct ArgBlock {
    pub component: usize,
    pub part: usize,
    pub side: usize,
    /// First local row/column of the block in the element tensor.
    pub offset: usize,
    pub ndofs: usize,
    pub basis: usize,
}

/// One coefficient component evaluated on one participant cell.
#[derive(Debug, Clone)]
pub struct CoefSlot {
    pub coefficient: usize,
    pub component: usize,
    pub part: usize,
    pub side: usize,
    pub basis: usize,
}

/// Element-local kernel of one integral.
#[derive(Debug, Clone)]
pub struct LocalKernel {
    pub arity: usize,
    pub participants: Vec<Participant>,
    pub subdomain: Option<i32>,
    pub quadrature_degree: usize,
    /// Reference rule of the primal entity, per cell type.
    pub rules: BTreeMap<CellType, QuadratureRule>,
    pub bases: Vec<BasisSource>,
    pub arg_spaces: Vec<FunctionSpace>,
    pub arg_blocks: Vec<Vec<ArgBlock>>,
    pub coefficients: Vec<Coefficient>,
    pub coef_slots: Vec<CoefSlot>,
    pub ops: Vec<Op>,
    pub types: Vec<SlotType>,
    /// Result slot; `None` when the integrand vanished during lowering.
    pub result: Option<usize>,
}

/// Cells bound to one integration entity: per participant, per side, the
/// cell index and its local facet (facet roles only).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntityBinding {
    pub parts: Vec<Vec<(usize, Option<usize>)>>,
}

/// Everything a kernel reads for one entity.
#[derive(Debug, Clone)]
pub struct PackedInputs {
    /// Per participant, per side.
    pub cells: Vec<Vec<CellGeometry>>,
    pub local_facets: Vec<Vec<Option<usize>>>,
    /// Stored normal of codim-1 participants.
    pub cell_normals: Vec<Option<[f64; 2]>>,
    /// Local dof values, per coefficient slot.
    pub coefficients: Vec<Vec<f64>>,
}

struct Lowering<'a> {
    parts: &'a [Participant],
    bases: Vec<BasisSource>,
    arg_spaces: Vec<Option<FunctionSpace>>,
    arg_blocks: Vec<Vec<ArgBlock>>,
    coefficients: Vec<Coefficient>,
    coef_slots: Vec<CoefSlot>,
    ops: Vec<Op>,
    types: Vec<SlotType>,
    memo: HashMap<Op, usize>,
}

/// Compiles one integral into an interpreted kernel. Quadrature is built on
/// the primal entity; other participants are reached by pulling physical
/// points back into their cells.
pub fn compile_integral(integral: &Integral) -> Result<LocalKernel, CompileError> {
    let measure = &integral.measure;
    let parts: Vec<Participant> =
        measure.participants().into_iter().map(|(role, mesh)| Participant { role, mesh: Arc::clone(mesh) }).collect();
    let mut lw = Lowering {
        parts: &parts,
        bases: Vec::new(),
        arg_spaces: vec![None, None],
        arg_blocks: vec![Vec::new(), Vec::new()],
        coefficients: Vec::new(),
        coef_slots: Vec::new(),
        ops: Vec::new(),
        types: Vec::new(),
        memo: HashMap::new(),
    };
    lw.collect_arguments(&integral.integrand, None, None)?;
    for blocks in &mut lw.arg_blocks {
        blocks.sort_by_key(|b| (b.component, b.part, b.side));
        let mut offset = 0;
        for b in blocks.iter_mut() {
            b.offset = offset;
            offset += b.ndofs;
        }
    }
    let result = lw.lower(&integral.integrand, None)?;
    if let Some(r) = result {
        if lw.types[r].comps != 1 {
            return Err(CompileError::Shape("integrand is not scalar".into()));
        }
    }
    let arity = lw.arg_spaces.iter().take_while(|s| s.is_some()).count();
    if lw.arg_spaces[arity..].iter().any(Option::is_some) {
        return Err(CompileError::Invalid("trial argument without test argument".into()));
    }
    if let Some(r) = result {
        for d in 0..arity {
            if lw.types[r].range[d].is_none() {
                return Err(CompileError::NotLinear(d));
            }
        }
    }

    let pmax = lw.bases.iter().map(|b| b.element.degree()).max().unwrap_or(0);
    let any_quad = parts.iter().any(|p| p.mesh.cells().iter().any(|c| c.cell_type == CellType::Quadrilateral));
    let degree = measure
        .quadrature_degree()
        .unwrap_or_else(|| default_quadrature_degree(pmax, any_quad).min(MAX_QUADRATURE_DEGREE));
    let mut rules = BTreeMap::new();
    let primal = &parts[0];
    if primal.role == IntegralType::Cell {
        for c in primal.mesh.cells() {
            if let std::collections::btree_map::Entry::Vacant(e) = rules.entry(c.cell_type) {
                e.insert(make_quadrature(c.cell_type, degree)?);
            }
        }
    } else {
        rules.insert(CellType::Interval, make_quadrature(CellType::Interval, degree)?);
    }

    Ok(LocalKernel {
        arity,
        subdomain: measure.subdomain_id(),
        quadrature_degree: degree,
        rules,
        bases: lw.bases,
        arg_spaces: lw.arg_spaces.into_iter().flatten().collect(),
        arg_blocks: lw.arg_blocks.into_iter().take(arity).collect(),
        coefficients: lw.coefficients,
        coef_slots: lw.coef_slots,
        ops: lw.ops,
        types: lw.types,
        result,
        participants: parts,
    })
}

impl Lowering<'_> {
    fn part_of(&self, mesh: &Mesh) -> Result<usize, CompileError> {
        self.parts.iter().position(|p| p.mesh.id() == mesh.id()).ok_or(CompileError::ForeignMesh(mesh.id()))
    }

    fn side_index(&self, part: usize, side: Option<Side>) -> Result<usize, CompileError> {
        match (self.parts[part].role, side) {
            (IntegralType::InteriorFacet, None) => Err(CompileError::MissingRestriction(self.parts[part].mesh.id())),
            (IntegralType::InteriorFacet, Some(Side::Minus)) => Ok(1),
            _ => Ok(0),
        }
    }

    fn basis(&mut self, part: usize, side: usize, element: &ReferenceElement) -> usize {
        let same = |b: &BasisSource| {
            b.part == part
                && b.side == side
                && b.element.cell() == element.cell()
                && b.element.family() == element.family()
                && b.element.degree() == element.degree()
                && b.element.value_shape() == element.value_shape()
        };
        if let Some(i) = self.bases.iter().position(same) {
            return i;
        }
        self.bases.push(BasisSource { part, side, element: element.clone() });
        self.bases.len() - 1
    }

    /// Resolves a function terminal to `(space, component, part, side)`.
    fn locate_function(
        &self,
        space: &FunctionSpace,
        component: Option<usize>,
        side: Option<Side>,
    ) -> Result<(usize, usize, usize), CompileError> {
        let k = match component {
            Some(k) => k,
            None if space.num_components() == 1 => 0,
            None => return Err(CompileError::Shape("multi-component function must be split".into())),
        };
        let part = self.part_of(space.component_mesh(k))?;
        let s = self.side_index(part, side)?;
        Ok((k, part, s))
    }

    fn collect_arguments(&mut self, e: &Expr, side: Option<Side>, comp: Option<usize>) -> Result<(), CompileError> {
        match e.node() {
            Node::Argument(a) => {
                if a.number > 1 {
                    return Err(CompileError::Unsupported(format!("argument number {}", a.number)));
                }
                match &self.arg_spaces[a.number] {
                    Some(s) if *s != a.space => {
                        return Err(CompileError::Invalid(format!("argument {} on two spaces", a.number)))
                    }
                    _ => self.arg_spaces[a.number] = Some(a.space.clone()),
                }
                let (k, part, s) = self.locate_function(&a.space, comp, side)?;
                if !self.arg_blocks[a.number].iter().any(|b| (b.component, b.part, b.side) == (k, part, s)) {
                    let element = a.space.component_element(k).clone();
                    let basis = self.basis(part, s, &element);
                    self.arg_blocks[a.number].push(ArgBlock {
                        component: k,
                        part,
                        side: s,
                        offset: 0,
                        ndofs: element.num_dofs(),
                        basis,
                    });
                }
                Ok(())
            }
            Node::Restricted(inner, s) => self.collect_arguments(inner, Some(*s), comp),
            Node::Indexed(inner, k) if function_space_of(inner).is_some() => self.collect_arguments(inner, side, Some(*k)),
            _ => {
                for c in e.children() {
                    self.collect_arguments(c, side, None)?;
                }
                Ok(())
            }
        }
    }

    fn push(&mut self, op: Op, ty: Option<SlotType>) -> Result<usize, CompileError> {
        if let Some(&i) = self.memo.get(&op) {
            return Ok(i);
        }
        let ty = match ty {
            Some(t) => t,
            None => infer(&op, &self.types)?,
        };
        self.ops.push(op);
        self.types.push(ty);
        self.memo.insert(op, self.ops.len() - 1);
        Ok(self.ops.len() - 1)
    }

    fn constant(&mut self, c: f64) -> Result<usize, CompileError> {
        self.push(Op::Const(c.to_bits()), Some(SlotType::scalar()))
    }

    fn function(
        &mut self,
        e: &Expr,
        component: Option<usize>,
        side: Option<Side>,
        grad: bool,
    ) -> Result<Option<usize>, CompileError> {
        let space = function_space_of(e).expect("function terminal").clone();
        let (k, part, s) = self.locate_function(&space, component, side)?;
        let element = space.component_element(k).clone();
        let bs = element.block_size();
        let value_comps = if grad { 2 * bs } else { bs };
        match strip(e).node() {
            Node::Argument(a) => {
                let block = self.arg_blocks[a.number]
                    .iter()
                    .position(|b| (b.component, b.part, b.side) == (k, part, s))
                    .expect("collected");
                let b = &self.arg_blocks[a.number][block];
                let mut range = [None, None];
                range[a.number] = Some((b.offset, b.ndofs));
                let ty = SlotType { range, comps: value_comps };
                Ok(Some(self.push(Op::Arg { number: a.number, block, grad }, Some(ty))?))
            }
            Node::Coefficient(c) => {
                let ci = match self.coefficients.iter().position(|x| x == c) {
                    Some(i) => i,
                    None => {
                        self.coefficients.push(c.clone());
                        self.coefficients.len() - 1
                    }
                };
                let basis = self.basis(part, s, &element);
                let slot = match self
                    .coef_slots
                    .iter()
                    .position(|x| (x.coefficient, x.component, x.part, x.side) == (ci, k, part, s))
                {
                    Some(i) => i,
                    None => {
                        self.coef_slots.push(CoefSlot { coefficient: ci, component: k, part, side: s, basis });
                        self.coef_slots.len() - 1
                    }
                };
                let ty = SlotType { range: [None, None], comps: value_comps };
                Ok(Some(self.push(Op::Coef { slot, grad }, Some(ty))?))
            }
            _ => unreachable!(),
        }
    }

    fn add(&mut self, a: Option<usize>, b: Option<usize>) -> Result<Option<usize>, CompileError> {
        Ok(match (a, b) {
            (Some(x), Some(y)) => Some(self.push(Op::Add(x, y), None)?),
            (x, y) => x.or(y),
        })
    }

    fn mul(&mut self, a: Option<usize>, b: Option<usize>) -> Result<Option<usize>, CompileError> {
        Ok(match (a, b) {
            (Some(x), Some(y)) => Some(self.push(Op::Mul(x, y), None)?),
            _ => None,
        })
    }

    /// Lowers `e` with restriction `side` pushed to its terminals. `None`
    /// means identically zero.
    fn lower(&mut self, e: &Expr, side: Option<Side>) -> Result<Option<usize>, CompileError> {
        match e.node() {
            Node::Constant(c) => {
                if *c == 0.0 {
                    Ok(None)
                } else {
                    Ok(Some(self.constant(*c)?))
                }
            }
            Node::Coefficient(_) | Node::Argument(_) => self.function(e, None, side, false),
            Node::Indexed(inner, k) if function_space_of(inner).is_some() => {
                let s = restriction(inner).or(side);
                self.function(inner, Some(*k), s, false)
            }
            Node::Indexed(inner, k) => match self.lower(inner, side)? {
                Some(x) => Ok(Some(self.push(Op::Entry(x, *k), None)?)),
                None => Ok(None),
            },
            Node::SpatialCoordinate(_) => {
                Ok(Some(self.push(Op::Coordinate, Some(SlotType { range: [None, None], comps: 2 }))?))
            }
            Node::FacetNormal(m) => {
                let part = self.part_of(m)?;
                if self.parts[part].role == IntegralType::Cell {
                    return Err(CompileError::Unsupported(format!("FacetNormal of cell participant {}", m.id())));
                }
                let s = self.side_index(part, side)?;
                Ok(Some(self.push(Op::Normal { part, side: s }, Some(SlotType { range: [None, None], comps: 2 }))?))
            }
            Node::CellNormal(m) => {
                let part = self.part_of(m)?;
                if !m.is_codim1() {
                    return Err(CompileError::Unsupported(format!("CellNormal of codim-0 mesh {}", m.id())));
                }
                Ok(Some(self.push(Op::CellNormal { part }, Some(SlotType { range: [None, None], comps: 2 }))?))
            }
            Node::Restricted(inner, s) => {
                if side.is_some() {
                    return Err(CompileError::Invalid("nested restriction".into()));
                }
                self.lower(inner, Some(*s))
            }
            Node::Sum(a, b) => {
                let (x, y) = (self.lower(a, side)?, self.lower(b, side)?);
                self.add(x, y)
            }
            Node::Product(a, b) => {
                let (x, y) = (self.lower(a, side)?, self.lower(b, side)?);
                self.mul(x, y)
            }
            Node::Inner(a, b) => match (self.lower(a, side)?, self.lower(b, side)?) {
                (Some(x), Some(y)) => Ok(Some(self.push(Op::Inner(x, y), None)?)),
                _ => Ok(None),
            },
            Node::Math(f, a) => {
                let x = match self.lower(a, side)? {
                    Some(x) => x,
                    None => self.constant(0.0)?,
                };
                Ok(Some(self.push(Op::Math(*f, x), None)?))
            }
            Node::Grad(a) => self.lower_grad(a, side),
            Node::Div(a) => match self.lower_grad(a, side)? {
                Some(g) => Ok(Some(self.push(Op::Trace(g), None)?)),
                None => Ok(None),
            },
        }
    }

    /// Lowers `grad(e)`, distributing over sums and products down to
    /// function terminals.
    fn lower_grad(&mut self, e: &Expr, side: Option<Side>) -> Result<Option<usize>, CompileError> {
        match e.node() {
            Node::Constant(_) => Ok(None),
            Node::Coefficient(_) | Node::Argument(_) => self.function(e, None, side, true),
            Node::Indexed(inner, k) if function_space_of(inner).is_some() => {
                let s = restriction(inner).or(side);
                self.function(inner, Some(*k), s, true)
            }
            Node::Restricted(inner, s) => {
                if side.is_some() {
                    return Err(CompileError::Invalid("nested restriction".into()));
                }
                self.lower_grad(inner, Some(*s))
            }
            Node::Sum(a, b) => {
                let (x, y) = (self.lower_grad(a, side)?, self.lower_grad(b, side)?);
                self.add(x, y)
            }
            Node::Product(a, b) => {
                if a.rank().ok() != Some(0) || b.rank().ok() != Some(0) {
                    return Err(CompileError::Unsupported("Grad of a non-scalar product".into()));
                }
                let (va, ga) = (self.lower(a, side)?, self.lower_grad(a, side)?);
                let (vb, gb) = (self.lower(b, side)?, self.lower_grad(b, side)?);
                let left = self.mul(va, gb)?;
                let right = self.mul(vb, ga)?;
                self.add(left, right)
            }
            Node::Math(f, a) => {
                let ga = self.lower_grad(a, side)?;
                let Some(ga) = ga else { return Ok(None) };
                let x = match self.lower(a, side)? {
                    Some(x) => x,
                    None => self.constant(0.0)?,
                };
                let d = match f {
                    MathFunction::Cos => {
                        let s = self.push(Op::Math(MathFunction::Sin, x), None)?;
                        let m1 = self.constant(-1.0)?;
                        self.push(Op::Mul(m1, s), None)?
                    }
                    MathFunction::Sin => self.push(Op::Math(MathFunction::Cos, x), None)?,
                };
                Ok(Some(self.push(Op::Mul(d, ga), None)?))
            }
            _ => Err(CompileError::Unsupported(format!("Grad of {}", e.kind_name()))),
        }
    }
}

fn strip(e: &Expr) -> &Expr {
    match e.node() {
        Node::Restricted(inner, _) => strip(inner),
        _ => e,
    }
}

fn restriction(e: &Expr) -> Option<Side> {
    match e.node() {
        Node::Restricted(_, s) => Some(*s),
        _ => None,
    }
}

/// Reference coordinates in `participant` of the physical points `points`.
/// Affine cells are inverted in closed form, bilinear quadrilaterals by
/// Newton iteration.
pub fn align_interface_quadrature(
    points: &[[f64; 2]],
    participant: &CellGeometry,
) -> Result<Vec<[f64; 2]>, CompileError> {
    points.iter().map(|&x| participant.pullback(x).map_err(CompileError::from)).collect()
}

/// Physical basis data of one basis source: values `[q][i]` and gradients
/// `[q][i]`.
struct PhysicalBasis {
    values: Vec<Vec<f64>>,
    grads: Vec<Vec<[f64; 2]>>,
}

impl LocalKernel {
    /// Local output size per argument (1 for absent arguments).
    pub fn shape(&self) -> [usize; 2] {
        let n = |d: usize| self.arg_blocks.get(d).map_or(1, |b| b.iter().map(|x| x.ndofs).sum());
        [n(0), n(1)]
    }

    pub fn primal(&self) -> &Participant {
        &self.participants[0]
    }

    /// Global dofs of each argument, in local order, for an entity.
    pub fn global_dofs(&self, binding: &EntityBinding) -> Vec<Vec<usize>> {
        self.arg_blocks
            .iter()
            .zip(&self.arg_spaces)
            .map(|(blocks, space)| {
                blocks
                    .iter()
                    .flat_map(|b| {
                        let cell = binding.parts[b.part][b.side].0;
                        space.component(b.component).cell_dofs[cell].iter().copied()
                    })
                    .collect()
            })
            .collect()
    }

    /// Current coefficient values, one vector per coefficient.
    pub fn snapshot_coefficients(&self) -> Vec<Vec<f64>> {
        self.coefficients.iter().map(Coefficient::to_vec).collect()
    }

    /// Gathers geometry and local coefficient values for an entity.
    pub fn pack(&self, binding: &EntityBinding, coefficient_values: &[Vec<f64>]) -> PackedInputs {
        let cells = self
            .participants
            .iter()
            .zip(&binding.parts)
            .map(|(p, sides)| {
                sides.iter().map(|&(c, _)| CellGeometry::new(p.mesh.cell(c).cell_type, p.mesh.cell_coordinates(c))).collect()
            })
            .collect();
        let local_facets = binding.parts.iter().map(|sides| sides.iter().map(|&(_, lf)| lf).collect()).collect();
        let cell_normals = self
            .participants
            .iter()
            .zip(&binding.parts)
            .map(|(p, sides)| p.mesh.cell_normals().map(|n| n[sides[0].0]))
            .collect();
        let coefficients = self
            .coef_slots
            .iter()
            .map(|s| {
                let space = self.coefficients[s.coefficient].space();
                let cell = binding.parts[s.part][s.side].0;
                let values = &coefficient_values[s.coefficient];
                space.component(s.component).cell_dofs[cell].iter().map(|&d| values[d]).collect()
            })
            .collect();
        PackedInputs { cells, local_facets, cell_normals, coefficients }
    }
}

/// Runs the kernel on one entity, returning the element tensor in row-major
/// `(test, trial)` order.
pub fn execute_kernel(kernel: &LocalKernel, inputs: &PackedInputs) -> Result<Vec<f64>, CompileError> {
    let [n0, n1] = kernel.shape();
    let mut t = vec![0.0; n0 * n1];
    let Some(result) = kernel.result else { return Ok(t) };

    // quadrature on the primal entity
    let primal = kernel.primal();
    let pg = &inputs.cells[0][0];
    let (points, weights, primal_ref) = if primal.role == IntegralType::Cell {
        let rule = &kernel.rules[&pg.cell_type];
        let mut pts = Vec::with_capacity(rule.len());
        let mut wts = Vec::with_capacity(rule.len());
        for (xi, w) in rule.points.iter().zip(&rule.weights) {
            pts.push(pg.map(*xi));
            wts.push(w * pg.scale(&pg.jacobian(*xi)));
        }
        (pts, wts, Some(rule.points.clone()))
    } else {
        let lf = inputs.local_facets[0][0].expect("facet role carries a local facet");
        let fv = pg.cell_type.facet_vertices(lf);
        let (a, b) = (pg.coords[fv[0]], pg.coords[fv[1]]);
        let len = (b[0] - a[0]).hypot(b[1] - a[1]);
        let rule = &kernel.rules[&CellType::Interval];
        let pts = rule.points.iter().map(|p| [a[0] + p[0] * (b[0] - a[0]), a[1] + p[0] * (b[1] - a[1])]).collect();
        let wts = rule.weights.iter().map(|w| w * len).collect();
        (pts, wts, None)
    };
    let nq = points.len();

    // reference points per (participant, side)
    let mut refs: HashMap<(usize, usize), Vec<[f64; 2]>> = HashMap::new();
    for b in &kernel.bases {
        if refs.contains_key(&(b.part, b.side)) {
            continue;
        }
        let r = match (&primal_ref, b.part) {
            (Some(r), 0) => r.clone(),
            _ => align_interface_quadrature(&points, &inputs.cells[b.part][b.side])?,
        };
        refs.insert((b.part, b.side), r);
    }

    let bases: Vec<PhysicalBasis> = kernel
        .bases
        .iter()
        .map(|b| {
            let geom = &inputs.cells[b.part][b.side];
            let r = &refs[&(b.part, b.side)];
            let tab = b.element.tabulate(r);
            let grads = tab
                .grads
                .iter()
                .zip(r)
                .map(|(gq, xi)| {
                    let jac = geom.jacobian(*xi);
                    gq.iter().map(|g| geom.push_gradient(&jac, *g)).collect()
                })
                .collect();
            PhysicalBasis { values: tab.values, grads }
        })
        .collect();

    let mut vals: Vec<Vec<f64>> = kernel.types.iter().map(|t| vec![0.0; t.len()]).collect();
    for q in 0..nq {
        for (i, op) in kernel.ops.iter().enumerate() {
            let (done, rest) = vals.split_at_mut(i);
            let out = &mut rest[0];
            match *op {
                Op::Const(bits) => out[0] = f64::from_bits(bits),
                Op::Coordinate => out.copy_from_slice(&points[q]),
                Op::Normal { part, side } => {
                    let lf = inputs.local_facets[part][side].expect("facet role carries a local facet");
                    out.copy_from_slice(&inputs.cells[part][side].outward_normal(lf));
                }
                Op::CellNormal { part } => {
                    out.copy_from_slice(&inputs.cell_normals[part].expect("codim-1 mesh stores normals"));
                }
                Op::Arg { number, block, grad } => {
                    let b = &kernel.arg_blocks[number][block];
                    let bs = kernel.bases[b.basis].element.block_size();
                    load_basis(&bases[b.basis], q, bs, grad, out);
                }
                Op::Coef { slot, grad } => {
                    let s = &kernel.coef_slots[slot];
                    let bs = kernel.bases[s.basis].element.block_size();
                    load_coefficient(&bases[s.basis], q, bs, grad, &inputs.coefficients[slot], out);
                }
                _ => apply(op, &kernel.types, &kernel.types[i], done, out),
            }
        }
        let ty = &kernel.types[result];
        let v = &vals[result];
        let w = weights[q];
        let (r0, l0) = ty.range[0].unwrap_or((0, 1));
        let (r1, l1) = ty.range[1].unwrap_or((0, 1));
        for i in 0..l0 {
            let row = (r0 + i) * n1;
            for j in 0..l1 {
                t[row + r1 + j] += w * v[i * l1 + j];
            }
        }
    }
    Ok(t)
}

fn load_basis(b: &PhysicalBasis, q: usize, bs: usize, grad: bool, out: &mut [f64]) {
    out.fill(0.0);
    let nn = b.values[q].len();
    for node in 0..nn {
        for c in 0..bs {
            let dof = node * bs + c;
            if grad {
                let g = b.grads[q][node];
                if bs == 1 {
                    out[dof * 2] = g[0];
                    out[dof * 2 + 1] = g[1];
                } else {
                    out[dof * 4 + c * 2] = g[0];
                    out[dof * 4 + c * 2 + 1] = g[1];
                }
            } else {
                out[dof * bs + c] = b.values[q][node];
            }
        }
    }
}

fn load_coefficient(b: &PhysicalBasis, q: usize, bs: usize, grad: bool, w: &[f64], out: &mut [f64]) {
    out.fill(0.0);
    for (node, (&phi, g)) in b.values[q].iter().zip(&b.grads[q]).enumerate() {
        for c in 0..bs {
            let coef = w[node * bs + c];
            if grad {
                out[c * 2] += coef * g[0];
                out[c * 2 + 1] += coef * g[1];
            } else {
                out[c] += coef * phi;
            }
        }
    }
}
