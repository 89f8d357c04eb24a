//! Unstructured 2D meshes, submesh extraction and entity-entity maps.
//!
//! A [`Mesh`] is either a root mesh or a submesh of another mesh. Submeshes
//! keep a link to their parent together with the [`EntityMap`] induced by the
//! extraction, so any entity of a submesh can be traced back to an entity of
//! the root mesh. That is what lets integrals bind several meshes at once.

mod entity_map;
mod generators;
mod io;

pub use entity_map::{EntityMap, MapKind};
pub use generators::{build_hybrid_unit_square, build_split_unit_square, INTERFACE_MARKER, OUTER_BOUNDARY_MARKER};
pub use io::{read_mesh, write_mesh};

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, OnceLock};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeshError {
    #[error("no entities matched marker {0}")]
    EmptySelection(i32),
    #[error("non-manifold facet {facet}: {incident} incident cells")]
    NonManifold { facet: usize, incident: usize },
    #[error("invalid mesh: {0}")]
    Invalid(String),
    #[error("entity map source/target mismatch: {0} vs {1}")]
    MeshMismatch(MeshId, MeshId),
    #[error("cannot compose a cell->facet map with a map on cells")]
    IncompatibleKinds,
    #[error("entity map is not injective: entity {0} hit twice")]
    NotInjective(usize),
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Unique identity token for a mesh.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MeshId(u64);

impl MeshId {
    fn fresh() -> Self {
        static NEXT: AtomicU64 = AtomicU64::new(1);
        MeshId(NEXT.fetch_add(1, Ordering::Relaxed))
    }
}

impl fmt::Display for MeshId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "mesh#{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CellType {
    Interval,
    Triangle,
    Quadrilateral,
}

const INTERVAL_FACETS: [&[usize]; 2] = [&[0], &[1]];
const TRIANGLE_FACETS: [&[usize]; 3] = [&[0, 1], &[1, 2], &[2, 0]];
const QUAD_FACETS: [&[usize]; 4] = [&[0, 1], &[1, 2], &[2, 3], &[3, 0]];

impl CellType {
    pub fn num_vertices(self) -> usize {
        match self {
            CellType::Interval => 2,
            CellType::Triangle => 3,
            CellType::Quadrilateral => 4,
        }
    }

    pub fn tdim(self) -> usize {
        match self {
            CellType::Interval => 1,
            _ => 2,
        }
    }

    pub fn num_facets(self) -> usize {
        self.facet_vertices_all().len()
    }

    /// Local vertex indices of each local facet. Facets of 2D cells follow the
    /// counter-clockwise boundary.
    pub fn facet_vertices(self, local_facet: usize) -> &'static [usize] {
        self.facet_vertices_all()[local_facet]
    }

    fn facet_vertices_all(self) -> &'static [&'static [usize]] {
        match self {
            CellType::Interval => &INTERVAL_FACETS,
            CellType::Triangle => &TRIANGLE_FACETS,
            CellType::Quadrilateral => &QUAD_FACETS,
        }
    }

    /// Reference coordinates of the cell vertices (interval uses the x slot only).
    pub fn reference_vertices(self) -> &'static [[f64; 2]] {
        match self {
            CellType::Interval => &[[0.0, 0.0], [1.0, 0.0]],
            CellType::Triangle => &[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
            CellType::Quadrilateral => &[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
        }
    }

    pub fn reference_volume(self) -> f64 {
        match self {
            CellType::Triangle => 0.5,
            _ => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CellType::Interval => "interval",
            CellType::Triangle => "triangle",
            CellType::Quadrilateral => "quadrilateral",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "interval" => Some(CellType::Interval),
            "triangle" => Some(CellType::Triangle),
            "quadrilateral" | "quad" => Some(CellType::Quadrilateral),
            _ => None,
        }
    }
}

impl fmt::Display for CellType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub cell_type: CellType,
    pub vertices: Vec<usize>,
}

/// A facet: an edge of a 2D mesh or a vertex of a 1D mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct Facet {
    /// Sorted vertex indices.
    pub vertices: Vec<usize>,
    /// `(cell, local facet)` pairs, ascending by cell index.
    pub incident: Vec<(usize, usize)>,
}

impl Facet {
    pub fn is_exterior(&self) -> bool {
        self.incident.len() == 1
    }

    pub fn is_interior(&self) -> bool {
        self.incident.len() == 2
    }
}

/// Entity of a root mesh that a submesh entity corresponds to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RootEntity {
    Cell(usize),
    Facet(usize),
}

#[derive(Debug, Clone)]
pub struct ParentLink {
    pub mesh: Arc<Mesh>,
    pub map: EntityMap,
    /// Submesh vertex index -> parent vertex index.
    pub vertex_map: Vec<usize>,
}

#[derive(Debug)]
pub struct Mesh {
    id: MeshId,
    dim: usize,
    vertices: Vec<[f64; 2]>,
    cells: Vec<Cell>,
    cell_markers: Vec<i32>,
    facets: Vec<Facet>,
    cell_facets: Vec<Vec<usize>>,
    facet_lookup: HashMap<Vec<usize>, usize>,
    facet_markers: BTreeMap<usize, i32>,
    cell_normals: Option<Vec<[f64; 2]>>,
    parent: Option<ParentLink>,
    root_map: OnceLock<Option<EntityMap>>,
}

fn facet_key(vertices: &[usize]) -> Vec<usize> {
    let mut key = vertices.to_vec();
    key.sort_unstable();
    key
}

impl Mesh {
    /// Builds a mesh from raw cell data. `facet_markers` entries are given by
    /// their vertex indices (in any order).
    pub fn new(
        dim: usize,
        vertices: Vec<[f64; 2]>,
        cells: Vec<Cell>,
        cell_markers: Vec<i32>,
        facet_markers: &[(Vec<usize>, i32)],
    ) -> Result<Mesh, MeshError> {
        if !(1..=2).contains(&dim) {
            return Err(MeshError::Invalid(format!("unsupported topological dimension {dim}")));
        }
        if vertices.is_empty() {
            return Err(MeshError::Invalid("mesh has no vertices".into()));
        }
        if cell_markers.len() != cells.len() {
            return Err(MeshError::Invalid("one marker per cell required".into()));
        }
        for (c, cell) in cells.iter().enumerate() {
            if cell.cell_type.tdim() != dim {
                return Err(MeshError::Invalid(format!("cell {c} is a {} in a dim-{dim} mesh", cell.cell_type)));
            }
            if cell.vertices.len() != cell.cell_type.num_vertices() {
                return Err(MeshError::Invalid(format!("cell {c} has {} vertices", cell.vertices.len())));
            }
            if let Some(&v) = cell.vertices.iter().find(|&&v| v >= vertices.len()) {
                return Err(MeshError::Invalid(format!("cell {c} references missing vertex {v}")));
            }
            let mut sorted = facet_key(&cell.vertices);
            sorted.dedup();
            if sorted.len() != cell.vertices.len() {
                return Err(MeshError::Invalid(format!("cell {c} repeats a vertex")));
            }
            if dim == 2 {
                let area = signed_area(cell.vertices.iter().map(|&v| vertices[v]));
                if area <= 0.0 {
                    return Err(MeshError::Invalid(format!("cell {c} is not counter-clockwise")));
                }
            }
        }

        let mut facets: Vec<Facet> = Vec::new();
        let mut facet_lookup = HashMap::new();
        let mut cell_facets = Vec::with_capacity(cells.len());
        for (c, cell) in cells.iter().enumerate() {
            let ty = cell.cell_type;
            let mut local = Vec::with_capacity(ty.num_facets());
            for lf in 0..ty.num_facets() {
                let verts: Vec<usize> = ty.facet_vertices(lf).iter().map(|&i| cell.vertices[i]).collect();
                let key = facet_key(&verts);
                let f = *facet_lookup.entry(key.clone()).or_insert_with(|| {
                    facets.push(Facet { vertices: key, incident: Vec::new() });
                    facets.len() - 1
                });
                facets[f].incident.push((c, lf));
                local.push(f);
            }
            cell_facets.push(local);
        }

        let mut markers = BTreeMap::new();
        for (verts, marker) in facet_markers {
            let key = facet_key(verts);
            let f = facet_lookup
                .get(&key)
                .ok_or_else(|| MeshError::Invalid(format!("facet marker on unknown facet {verts:?}")))?;
            markers.insert(*f, *marker);
        }

        Ok(Mesh {
            id: MeshId::fresh(),
            dim,
            vertices,
            cells,
            cell_markers,
            facets,
            cell_facets,
            facet_lookup,
            facet_markers: markers,
            cell_normals: None,
            parent: None,
            root_map: OnceLock::new(),
        })
    }

    pub fn id(&self) -> MeshId {
        self.id
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn gdim(&self) -> usize {
        2
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn cell(&self, c: usize) -> &Cell {
        &self.cells[c]
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn cell_markers(&self) -> &[i32] {
        &self.cell_markers
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    pub fn facet(&self, f: usize) -> &Facet {
        &self.facets[f]
    }

    pub fn num_facets(&self) -> usize {
        self.facets.len()
    }

    /// Global facet index of `cell`'s local facet.
    pub fn cell_facet(&self, cell: usize, local_facet: usize) -> usize {
        self.cell_facets[cell][local_facet]
    }

    pub fn find_facet(&self, vertices: &[usize]) -> Option<usize> {
        self.facet_lookup.get(&facet_key(vertices)).copied()
    }

    pub fn facet_markers(&self) -> &BTreeMap<usize, i32> {
        &self.facet_markers
    }

    pub fn facet_marker(&self, f: usize) -> Option<i32> {
        self.facet_markers.get(&f).copied()
    }

    pub fn cell_normals(&self) -> Option<&[[f64; 2]]> {
        self.cell_normals.as_deref()
    }

    pub fn parent(&self) -> Option<&ParentLink> {
        self.parent.as_ref()
    }

    pub fn is_codim1(&self) -> bool {
        self.dim == 1
    }

    /// The single cell type of this mesh, or `None` for mixed meshes.
    pub fn uniform_cell_type(&self) -> Option<CellType> {
        let first = self.cells.first()?.cell_type;
        self.cells.iter().all(|c| c.cell_type == first).then_some(first)
    }

    pub fn cell_coordinates(&self, c: usize) -> Vec<[f64; 2]> {
        self.cells[c].vertices.iter().map(|&v| self.vertices[v]).collect()
    }

    /// Area of a 2D cell or length of an interval.
    pub fn cell_volume(&self, c: usize) -> f64 {
        let coords = self.cell_coordinates(c);
        match self.cells[c].cell_type {
            CellType::Interval => dist(coords[0], coords[1]),
            _ => signed_area(coords.into_iter()),
        }
    }

    pub fn total_volume(&self) -> f64 {
        (0..self.num_cells()).map(|c| self.cell_volume(c)).sum()
    }

    /// Unit outward normal of `cell`'s local facet.
    pub fn outward_normal(&self, cell: usize, local_facet: usize) -> [f64; 2] {
        let cell_ref = &self.cells[cell];
        let lv = cell_ref.cell_type.facet_vertices(local_facet);
        match cell_ref.cell_type {
            CellType::Interval => {
                let a = self.vertices[cell_ref.vertices[0]];
                let b = self.vertices[cell_ref.vertices[1]];
                let len = dist(a, b);
                let t = [(b[0] - a[0]) / len, (b[1] - a[1]) / len];
                if lv[0] == 1 { t } else { [-t[0], -t[1]] }
            }
            _ => {
                let a = self.vertices[cell_ref.vertices[lv[0]]];
                let b = self.vertices[cell_ref.vertices[lv[1]]];
                let len = dist(a, b);
                [(b[1] - a[1]) / len, -(b[0] - a[0]) / len]
            }
        }
    }

    /// Partitions the facets into exterior (one incident cell) and interior
    /// (two incident cells) sets.
    pub fn classify_facets(&self) -> Result<(Vec<usize>, Vec<usize>), MeshError> {
        let mut ext = Vec::new();
        let mut int = Vec::new();
        for (f, facet) in self.facets.iter().enumerate() {
            match facet.incident.len() {
                1 => ext.push(f),
                2 => int.push(f),
                n => return Err(MeshError::NonManifold { facet: f, incident: n }),
            }
        }
        Ok((ext, int))
    }

    /// Copy of this mesh with new cell markers. The parent link is kept, so
    /// the relabelled mesh still traces back to the same root entities.
    pub fn relabel_cells(&self, marker: impl Fn(usize, &Mesh) -> i32) -> Mesh {
        let cell_markers = (0..self.num_cells()).map(|c| marker(c, self)).collect();
        Mesh {
            id: MeshId::fresh(),
            dim: self.dim,
            vertices: self.vertices.clone(),
            cells: self.cells.clone(),
            cell_markers,
            facets: self.facets.clone(),
            cell_facets: self.cell_facets.clone(),
            facet_lookup: self.facet_lookup.clone(),
            facet_markers: self.facet_markers.clone(),
            cell_normals: self.cell_normals.clone(),
            parent: self.parent.clone(),
            root_map: OnceLock::new(),
        }
    }

    /// Mesh at the top of the parent chain.
    pub fn root(&self) -> &Mesh {
        match &self.parent {
            Some(link) => link.mesh.root(),
            None => self,
        }
    }

    /// Composed map from this mesh's cells to entities of the root mesh.
    /// `None` for a root mesh.
    pub fn map_to_root(&self) -> Option<&EntityMap> {
        self.root_map
            .get_or_init(|| {
                let link = self.parent.as_ref()?;
                match link.mesh.map_to_root() {
                    None => Some(link.map.clone()),
                    Some(up) => link.map.compose(up).ok(),
                }
            })
            .as_ref()
    }

    pub fn cell_to_root(&self, c: usize) -> RootEntity {
        match self.map_to_root() {
            None => RootEntity::Cell(c),
            Some(m) => match m.kind() {
                MapKind::CellToCell => RootEntity::Cell(m.table()[c]),
                MapKind::CellToFacet => RootEntity::Facet(m.table()[c]),
            },
        }
    }

    /// Root entity of a facet of a codim-0 mesh. Returns `None` if the facet
    /// does not correspond to a root facet (e.g. vertices of a 1D submesh).
    pub fn facet_to_root(&self, f: usize) -> Option<RootEntity> {
        let (cell, lf) = self.facets[f].incident[0];
        match self.cell_to_root(cell) {
            RootEntity::Cell(rc) if self.dim == 2 => Some(RootEntity::Facet(self.root().cell_facet(rc, lf))),
            _ => None,
        }
    }

    /// Extracts the cells carrying `marker` as a codim-0 submesh.
    pub fn extract_codim0_submesh(parent: &Arc<Mesh>, marker: i32) -> Result<(Mesh, EntityMap), MeshError> {
        let selected: Vec<usize> = (0..parent.num_cells()).filter(|&c| parent.cell_markers[c] == marker).collect();
        if selected.is_empty() {
            return Err(MeshError::EmptySelection(marker));
        }
        let mut local_of = vec![usize::MAX; parent.vertices.len()];
        let mut vertex_map = Vec::new();
        let mut cells = Vec::with_capacity(selected.len());
        for &pc in &selected {
            let pcell = &parent.cells[pc];
            let verts = pcell
                .vertices
                .iter()
                .map(|&v| {
                    if local_of[v] == usize::MAX {
                        local_of[v] = vertex_map.len();
                        vertex_map.push(v);
                    }
                    local_of[v]
                })
                .collect();
            cells.push(Cell { cell_type: pcell.cell_type, vertices: verts });
        }
        let vertices = vertex_map.iter().map(|&v| parent.vertices[v]).collect();
        let cell_markers = selected.iter().map(|&c| parent.cell_markers[c]).collect();
        let mut mesh = Mesh::new(parent.dim, vertices, cells, cell_markers, &[])?;

        for f in 0..mesh.facets.len() {
            let parent_verts: Vec<usize> = mesh.facets[f].vertices.iter().map(|&v| vertex_map[v]).collect();
            if let Some(pf) = parent.find_facet(&parent_verts) {
                if let Some(m) = parent.facet_marker(pf) {
                    mesh.facet_markers.insert(f, m);
                }
            }
        }
        if let Some(normals) = &parent.cell_normals {
            mesh.cell_normals = Some(selected.iter().map(|&c| normals[c]).collect());
        }
        let map = EntityMap::new(mesh.id, parent.id, MapKind::CellToCell, selected)?;
        mesh.parent = Some(ParentLink { mesh: Arc::clone(parent), map: map.clone(), vertex_map });
        Ok((mesh, map))
    }

    /// Extracts the facets carrying `facet_marker` as an interval mesh. Each
    /// cell stores the unit normal of its parent facet, oriented outward from
    /// the lower-index incident parent cell.
    pub fn extract_codim1_submesh(parent: &Arc<Mesh>, facet_marker: i32) -> Result<(Mesh, EntityMap), MeshError> {
        if parent.dim != 2 {
            return Err(MeshError::Invalid("codim-1 extraction needs a 2D parent".into()));
        }
        let selected: Vec<usize> =
            parent.facet_markers.iter().filter(|(_, &m)| m == facet_marker).map(|(&f, _)| f).collect();
        if selected.is_empty() {
            return Err(MeshError::EmptySelection(facet_marker));
        }
        let mut local_of = vec![usize::MAX; parent.vertices.len()];
        let mut vertex_map = Vec::new();
        let mut cells = Vec::with_capacity(selected.len());
        let mut normals = Vec::with_capacity(selected.len());
        for &pf in &selected {
            let (pc, lf) = parent.facets[pf].incident[0];
            let pcell = &parent.cells[pc];
            let verts = pcell
                .cell_type
                .facet_vertices(lf)
                .iter()
                .map(|&i| {
                    let v = pcell.vertices[i];
                    if local_of[v] == usize::MAX {
                        local_of[v] = vertex_map.len();
                        vertex_map.push(v);
                    }
                    local_of[v]
                })
                .collect();
            cells.push(Cell { cell_type: CellType::Interval, vertices: verts });
            normals.push(parent.outward_normal(pc, lf));
        }
        let vertices = vertex_map.iter().map(|&v| parent.vertices[v]).collect();
        let markers = vec![facet_marker; selected.len()];
        let mut mesh = Mesh::new(1, vertices, cells, markers, &[])?;
        mesh.cell_normals = Some(normals);
        let map = EntityMap::new(mesh.id, parent.id, MapKind::CellToFacet, selected)?;
        mesh.parent = Some(ParentLink { mesh: Arc::clone(parent), map: map.clone(), vertex_map });
        Ok((mesh, map))
    }
}

pub(crate) fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt()
}

/// Shoelace area of a polygon given in order.
pub(crate) fn signed_area(points: impl Iterator<Item = [f64; 2]>) -> f64 {
    let pts: Vec<[f64; 2]> = points.collect();
    let n = pts.len();
    let mut acc = 0.0;
    for i in 0..n {
        let a = pts[i];
        let b = pts[(i + 1) % n];
        acc += a[0] * b[1] - b[0] * a[1];
    }
    0.5 * acc
}
