use std::collections::HashMap;

use super::{MeshError, MeshId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MapKind {
    CellToCell,
    CellToFacet,
}

/// Injective map from the cells of a source mesh to cells or facets of a
/// target mesh.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntityMap {
    source: MeshId,
    target: MeshId,
    kind: MapKind,
    table: Vec<usize>,
}

impl EntityMap {
    pub fn new(source: MeshId, target: MeshId, kind: MapKind, table: Vec<usize>) -> Result<Self, MeshError> {
        let mut seen = HashMap::with_capacity(table.len());
        for &t in &table {
            if seen.insert(t, ()).is_some() {
                return Err(MeshError::NotInjective(t));
            }
        }
        Ok(EntityMap { source, target, kind, table })
    }

    pub fn identity(mesh: MeshId, num_cells: usize) -> Self {
        EntityMap { source: mesh, target: mesh, kind: MapKind::CellToCell, table: (0..num_cells).collect() }
    }

    pub fn source(&self) -> MeshId {
        self.source
    }

    pub fn target(&self) -> MeshId {
        self.target
    }

    pub fn kind(&self) -> MapKind {
        self.kind
    }

    pub fn table(&self) -> &[usize] {
        &self.table
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    /// `next ∘ self`: maps a source entity `e` to `next.table[self.table[e]]`.
    pub fn compose(&self, next: &EntityMap) -> Result<EntityMap, MeshError> {
        if self.target != next.source {
            return Err(MeshError::MeshMismatch(self.target, next.source));
        }
        if self.kind == MapKind::CellToFacet {
            return Err(MeshError::IncompatibleKinds);
        }
        let table = self
            .table
            .iter()
            .map(|&e| {
                next.table
                    .get(e)
                    .copied()
                    .ok_or_else(|| MeshError::Invalid(format!("entity {e} outside map domain")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(EntityMap { source: self.source, target: next.target, kind: next.kind, table })
    }

    /// Target entity -> source entity lookup.
    pub fn inverse_index(&self) -> HashMap<usize, usize> {
        self.table.iter().enumerate().map(|(s, &t)| (t, s)).collect()
    }
}
