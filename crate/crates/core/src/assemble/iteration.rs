use std::collections::HashMap;
use std::sync::Arc;

use super::AssembleError;
use crate::compile::EntityBinding;
use crate::forms::{IntegralType, Measure};
use crate::mesh::{Facet, Mesh, RootEntity};

/// One entity of the primal mesh together with the matching entities of
/// every participant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IterationEntity {
    pub primal: usize,
    pub binding: EntityBinding,
}

fn facet_matches(f: &Facet, role: IntegralType) -> bool {
    match role {
        IntegralType::ExteriorFacet => f.is_exterior(),
        IntegralType::InteriorFacet => f.is_interior(),
        IntegralType::Cell => false,
    }
}

fn facet_binding(f: &Facet) -> Vec<(usize, Option<usize>)> {
    // incident cells are ascending, so '+' is the lower cell index
    f.incident.iter().map(|&(c, lf)| (c, Some(lf))).collect()
}

/// Entities of `mesh` usable in `role`, keyed by the root entity they map to.
fn root_entities(mesh: &Mesh, role: IntegralType, subdomain: Option<i32>) -> Vec<(usize, RootEntity)> {
    match role {
        IntegralType::Cell => (0..mesh.num_cells())
            .filter(|&c| subdomain.is_none_or(|id| mesh.cell_markers()[c] == id))
            .map(|c| (c, mesh.cell_to_root(c)))
            .collect(),
        _ => (0..mesh.num_facets())
            .filter(|&f| facet_matches(mesh.facet(f), role))
            .filter(|&f| subdomain.is_none_or(|id| mesh.facet_marker(f) == Some(id)))
            .filter_map(|f| mesh.facet_to_root(f).map(|r| (f, r)))
            .collect(),
    }
}

fn binding_of(mesh: &Mesh, role: IntegralType, entity: usize) -> Vec<(usize, Option<usize>)> {
    match role {
        IntegralType::Cell => vec![(entity, None)],
        _ => facet_binding(mesh.facet(entity)),
    }
}

/// Iteration set of a measure: primal entities (filtered by subdomain and
/// facet class) for which every other participant has a matching entity of
/// the required class. Participants are matched through root entities of
/// the common parent using precomputed inverse indexes.
pub fn iteration_set(measure: &Measure) -> Result<Vec<IterationEntity>, AssembleError> {
    let parts: Vec<(IntegralType, &Arc<Mesh>)> = measure.participants();
    let (primal_role, primal) = parts[0];
    let root = primal.root().id();
    for (_, m) in &parts[1..] {
        if m.root().id() != root {
            return Err(AssembleError::UnrelatedMeshes(primal.id(), m.id()));
        }
    }
    let inverse: Vec<HashMap<RootEntity, usize>> = parts[1..]
        .iter()
        .map(|(role, m)| root_entities(m, *role, None).into_iter().map(|(e, r)| (r, e)).collect())
        .collect();

    let mut out = Vec::new();
    'entities: for (e, r) in root_entities(primal, primal_role, measure.subdomain_id()) {
        let mut bindings = vec![binding_of(primal, primal_role, e)];
        for ((role, m), inv) in parts[1..].iter().zip(&inverse) {
            match inv.get(&r) {
                Some(&pe) => bindings.push(binding_of(m, *role, pe)),
                None => continue 'entities,
            }
        }
        out.push(IterationEntity { primal: e, binding: EntityBinding { parts: bindings } });
    }
    Ok(out)
}
