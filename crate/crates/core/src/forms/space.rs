use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, RwLock, RwLockReadGuard};

use super::FormError;
use crate::fe::{CellGeometry, NodeEntity, ReferenceElement};
use crate::mesh::{CellType, Mesh};

static NEXT_ID: AtomicU64 = AtomicU64::new(1);

fn fresh_id() -> u64 {
    NEXT_ID.fetch_add(1, Ordering::Relaxed)
}

/// Ordered list of meshes a product space is built over.
#[derive(Debug, Clone)]
pub struct MeshSequence {
    meshes: Vec<Arc<Mesh>>,
}

impl MeshSequence {
    pub fn new(meshes: Vec<Arc<Mesh>>) -> Result<Self, FormError> {
        if meshes.is_empty() {
            return Err(FormError::EmptySequence);
        }
        for (i, a) in meshes.iter().enumerate() {
            if meshes[..i].iter().any(|b| b.id() == a.id()) {
                return Err(FormError::DuplicateMesh(a.id()));
            }
        }
        Ok(MeshSequence { meshes })
    }

    pub fn meshes(&self) -> &[Arc<Mesh>] {
        &self.meshes
    }

    pub fn len(&self) -> usize {
        self.meshes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.meshes.is_empty()
    }
}

/// Cell types of a mixed element, one per component.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellSequence(pub Vec<CellType>);

#[derive(Debug, Clone)]
pub struct MixedElement {
    sub_elements: Vec<ReferenceElement>,
    cell: CellSequence,
}

impl MixedElement {
    /// Builds the element together with its cell sequence.
    pub fn new(sub_elements: Vec<ReferenceElement>) -> Result<Self, FormError> {
        if sub_elements.is_empty() {
            return Err(FormError::EmptySequence);
        }
        let cell = CellSequence(sub_elements.iter().map(|e| e.cell()).collect());
        Ok(MixedElement { sub_elements, cell })
    }

    pub fn sub_elements(&self) -> &[ReferenceElement] {
        &self.sub_elements
    }

    pub fn cell(&self) -> &CellSequence {
        &self.cell
    }
}

/// Dof layout of one component of a product space.
#[derive(Debug, Clone)]
pub struct ComponentLayout {
    /// First global dof of this component.
    pub offset: usize,
    pub num_dofs: usize,
    /// Per cell: global dofs in element order (scalar node major, block minor).
    pub cell_dofs: Vec<Vec<usize>>,
    /// Physical coordinates of each scalar node (component-local numbering).
    pub node_coords: Vec<[f64; 2]>,
}

#[derive(Debug)]
struct SpaceData {
    id: u64,
    domain: MeshSequence,
    element: MixedElement,
    components: Vec<ComponentLayout>,
    num_dofs: usize,
}

/// Product space `V_0 × … × V_{M-1}`, component `k` living on mesh `k` of the
/// domain. Dofs are numbered blockwise: all of component 0, then component 1, …
#[derive(Debug, Clone)]
pub struct FunctionSpace(Arc<SpaceData>);

impl PartialEq for FunctionSpace {
    fn eq(&self, other: &Self) -> bool {
        self.0.id == other.0.id
    }
}

impl Eq for FunctionSpace {}

impl FunctionSpace {
    pub fn new(domain: MeshSequence, element: MixedElement) -> Result<Self, FormError> {
        if domain.len() != element.sub_elements.len() {
            return Err(FormError::LengthMismatch { meshes: domain.len(), elements: element.sub_elements.len() });
        }
        let mut components = Vec::with_capacity(domain.len());
        let mut offset = 0;
        for (k, (mesh, elem)) in domain.meshes.iter().zip(&element.sub_elements).enumerate() {
            if let Some(bad) = mesh.cells().iter().find(|c| c.cell_type != elem.cell()) {
                return Err(FormError::CellMismatch { component: k, expected: elem.cell(), found: bad.cell_type });
            }
            let layout = number_dofs(mesh, elem, offset);
            offset += layout.num_dofs;
            components.push(layout);
        }
        Ok(FunctionSpace(Arc::new(SpaceData { id: fresh_id(), domain, element, components, num_dofs: offset })))
    }

    /// Single-mesh, single-element convenience constructor.
    pub fn single(mesh: &Arc<Mesh>, element: ReferenceElement) -> Result<Self, FormError> {
        Self::new(MeshSequence::new(vec![Arc::clone(mesh)])?, MixedElement::new(vec![element])?)
    }

    pub fn id(&self) -> u64 {
        self.0.id
    }

    pub fn domain(&self) -> &MeshSequence {
        &self.0.domain
    }

    pub fn element(&self) -> &MixedElement {
        &self.0.element
    }

    pub fn num_components(&self) -> usize {
        self.0.components.len()
    }

    pub fn component(&self, k: usize) -> &ComponentLayout {
        &self.0.components[k]
    }

    pub fn component_mesh(&self, k: usize) -> &Arc<Mesh> {
        &self.0.domain.meshes[k]
    }

    pub fn component_element(&self, k: usize) -> &ReferenceElement {
        &self.0.element.sub_elements[k]
    }

    pub fn num_dofs(&self) -> usize {
        self.0.num_dofs
    }

    /// Global dof range of component `k`.
    pub fn component_range(&self, k: usize) -> std::ops::Range<usize> {
        let c = &self.0.components[k];
        c.offset..c.offset + c.num_dofs
    }

    /// Component that owns global dof `dof`.
    pub fn component_of(&self, dof: usize) -> usize {
        self.0.components.iter().position(|c| dof < c.offset + c.num_dofs).expect("dof in range")
    }

    /// Nodal interpolation of `f` into component `k`; other entries untouched.
    pub fn interpolate_component(&self, k: usize, values: &mut [f64], f: impl Fn([f64; 2]) -> f64) {
        let c = &self.0.components[k];
        let bs = self.component_element(k).block_size();
        for (node, &x) in c.node_coords.iter().enumerate() {
            let v = f(x);
            for b in 0..bs {
                values[c.offset + node * bs + b] = v;
            }
        }
    }
}

fn number_dofs(mesh: &Mesh, elem: &ReferenceElement, offset: usize) -> ComponentLayout {
    let p = elem.degree();
    let per_edge = p.saturating_sub(1);
    let num_interior = elem.node_entities().iter().filter(|e| matches!(e, NodeEntity::Interior(_))).count();
    let nv = mesh.vertices().len();
    let edge_base = nv;
    let edge_count = if mesh.dim() == 2 { mesh.num_facets() } else { 0 };
    let interior_base = edge_base + edge_count * per_edge;
    let num_nodes = interior_base + mesh.num_cells() * num_interior;
    let bs = elem.block_size();

    let mut node_coords = vec![[f64::NAN; 2]; num_nodes];
    let mut cell_dofs = Vec::with_capacity(mesh.num_cells());
    for (c, cell) in mesh.cells().iter().enumerate() {
        let geom = CellGeometry::new(cell.cell_type, mesh.cell_coordinates(c));
        let mut dofs = Vec::with_capacity(elem.num_dofs());
        for (ent, xi) in elem.node_entities().iter().zip(elem.nodes()) {
            let node = match *ent {
                NodeEntity::Vertex(v) => cell.vertices[v],
                NodeEntity::Edge { local_facet, index } => {
                    let fv = cell.cell_type.facet_vertices(local_facet);
                    let forward = cell.vertices[fv[0]] < cell.vertices[fv[1]];
                    let k = if forward { index } else { per_edge - 1 - index };
                    edge_base + mesh.cell_facet(c, local_facet) * per_edge + k
                }
                NodeEntity::Interior(k) => interior_base + c * num_interior + k,
            };
            if node_coords[node][0].is_nan() {
                node_coords[node] = geom.map(*xi);
            }
            for b in 0..bs {
                dofs.push(offset + node * bs + b);
            }
        }
        cell_dofs.push(dofs);
    }
    ComponentLayout { offset, num_dofs: num_nodes * bs, cell_dofs, node_coords }
}

#[derive(Debug)]
struct CoefficientData {
    id: u64,
    name: String,
    space: FunctionSpace,
    values: RwLock<Vec<f64>>,
}

/// A discrete function on a (product) space. Cloning shares the same values.
#[derive(Debug, Clone)]
pub struct Coefficient(Arc<CoefficientData>);

impl PartialEq for Coefficient {
    fn eq(&self, other: &Self) -> bool {
        self.0.id == other.0.id
    }
}

impl Eq for Coefficient {}

impl Coefficient {
    pub fn new(space: &FunctionSpace, name: impl Into<String>) -> Self {
        let values = vec![0.0; space.num_dofs()];
        Coefficient(Arc::new(CoefficientData {
            id: fresh_id(),
            name: name.into(),
            space: space.clone(),
            values: RwLock::new(values),
        }))
    }

    pub fn id(&self) -> u64 {
        self.0.id
    }

    pub fn name(&self) -> &str {
        &self.0.name
    }

    pub fn space(&self) -> &FunctionSpace {
        &self.0.space
    }

    pub fn values(&self) -> RwLockReadGuard<'_, Vec<f64>> {
        self.0.values.read().expect("coefficient lock poisoned")
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.values().clone()
    }

    pub fn set_values(&self, values: &[f64]) {
        let mut guard = self.0.values.write().expect("coefficient lock poisoned");
        assert_eq!(guard.len(), values.len(), "value length must match the space");
        guard.copy_from_slice(values);
    }

    pub fn update(&self, f: impl FnOnce(&mut [f64])) {
        let mut guard = self.0.values.write().expect("coefficient lock poisoned");
        f(&mut guard);
    }

    pub fn interpolate_component(&self, k: usize, f: impl Fn([f64; 2]) -> f64) {
        let space = self.space().clone();
        self.update(|v| space.interpolate_component(k, v, f));
    }
}

/// Test (`number == 0`) or trial (`number == 1`) function.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Argument {
    pub space: FunctionSpace,
    pub number: usize,
}

impl fmt::Display for Argument {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.number {
            0 => write!(f, "v"),
            1 => write!(f, "du"),
            n => write!(f, "arg{n}"),
        }
    }
}
