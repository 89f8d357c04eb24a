use std::sync::Arc;

use proptest::prelude::*;

use multimesh::mesh::{
    build_hybrid_unit_square, build_split_unit_square, CellType, EntityMap, MapKind, Mesh, MeshError,
    INTERFACE_MARKER,
};

fn count_marked(mesh: &Mesh, marker: i32) -> usize {
    mesh.facet_markers().values().filter(|&&m| m == marker).count()
}

#[test]
fn generator_counts() {
    let hybrid = build_hybrid_unit_square(0);
    let quads = hybrid.cells().iter().filter(|c| c.cell_type == CellType::Quadrilateral).count();
    assert_eq!((quads, hybrid.num_cells() - quads), (50, 100));
    assert_eq!(count_marked(&hybrid, INTERFACE_MARKER), 10);
    assert_eq!(build_split_unit_square(0).num_cells(), 100);
    assert_eq!(build_split_unit_square(1).num_cells(), 400);
    for n in 0..3 {
        assert_eq!(count_marked(&build_split_unit_square(n), INTERFACE_MARKER), 10 << n);
        assert!((build_hybrid_unit_square(n).total_volume() - 1.0).abs() < 1e-12);
        assert!((build_split_unit_square(n).total_volume() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn codim0_extraction() {
    let parent = Arc::new(build_hybrid_unit_square(0));
    let (q, map) = Mesh::extract_codim0_submesh(&parent, 1).unwrap();
    let (t, _) = Mesh::extract_codim0_submesh(&parent, 2).unwrap();
    assert_eq!(q.num_cells(), 50);
    assert_eq!(map.kind(), MapKind::CellToCell);
    let mut image = map.table().to_vec();
    image.sort_unstable();
    image.dedup();
    assert_eq!(image.len(), 50);
    assert!((q.total_volume() + t.total_volume() - parent.total_volume()).abs() < 1e-12);

    let err = Mesh::extract_codim0_submesh(&parent, 42).unwrap_err();
    assert_eq!(err, MeshError::EmptySelection(42));
    assert!(err.to_string().contains("no entities matched marker"));
}

#[test]
fn codim1_extraction() {
    let parent = Arc::new(build_split_unit_square(0));
    let (i, map) = Mesh::extract_codim1_submesh(&parent, INTERFACE_MARKER).unwrap();
    assert_eq!(i.num_cells(), 10);
    assert_eq!(i.dim(), 1);
    assert_eq!(map.kind(), MapKind::CellToFacet);
    for n in i.cell_normals().unwrap() {
        assert!((n[0] - 1.0).abs() < 1e-12 && n[1].abs() < 1e-12);
    }
    assert!((i.total_volume() - 1.0).abs() < 1e-12);
    for c in 0..i.num_cells() {
        assert!(i.cell_coordinates(c).iter().all(|x| x[0] == 0.5));
    }
    assert!(Mesh::extract_codim1_submesh(&parent, 5).is_err());
}

#[test]
fn submesh_geometry_matches_parent_exactly() {
    let parent = Arc::new(build_hybrid_unit_square(1));
    for marker in [1, 2] {
        let (sub, map) = Mesh::extract_codim0_submesh(&parent, marker).unwrap();
        for c in 0..sub.num_cells() {
            assert_eq!(sub.cell_coordinates(c), parent.cell_coordinates(map.table()[c]));
        }
    }
    let (i, map) = Mesh::extract_codim1_submesh(&parent, INTERFACE_MARKER).unwrap();
    for c in 0..i.num_cells() {
        let mut mine = i.cell_coordinates(c);
        let mut theirs: Vec<[f64; 2]> =
            parent.facet(map.table()[c]).vertices.iter().map(|&v| parent.vertices()[v]).collect();
        mine.sort_by(|a, b| a.partial_cmp(b).unwrap());
        theirs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(mine, theirs);
    }
}

#[test]
fn facet_classification() {
    let parent = Arc::new(build_hybrid_unit_square(0));
    let (ext, int) = parent.classify_facets().unwrap();
    assert_eq!(ext.len() + int.len(), parent.num_facets());
    let interface: Vec<usize> =
        parent.facet_markers().iter().filter(|(_, &m)| m == INTERFACE_MARKER).map(|(&f, _)| f).collect();
    assert!(interface.iter().all(|f| int.contains(f)));
    for marker in [1, 2] {
        let (sub, _) = Mesh::extract_codim0_submesh(&parent, marker).unwrap();
        let (ext, int) = sub.classify_facets().unwrap();
        assert_eq!(ext.len() + int.len(), sub.num_facets());
        let marked: Vec<usize> =
            sub.facet_markers().iter().filter(|(_, &m)| m == INTERFACE_MARKER).map(|(&f, _)| f).collect();
        assert_eq!(marked.len(), 10);
        assert!(marked.iter().all(|f| ext.contains(f)));
    }
}

#[test]
fn identity_composition() {
    let parent = Arc::new(build_hybrid_unit_square(0));
    let (q, map) = Mesh::extract_codim0_submesh(&parent, 1).unwrap();
    let id = EntityMap::identity(q.id(), q.num_cells());
    assert_eq!(id.compose(&map).unwrap(), map);
}

#[test]
fn nested_extraction_composes_to_direct_extraction() {
    let parent = Arc::new(build_hybrid_unit_square(0));
    let lower = |c: usize, m: &Mesh| {
        let y = m.cell_coordinates(c).iter().map(|x| x[1]).sum::<f64>() / m.cell(c).cell_type.num_vertices() as f64;
        if m.cell_markers()[c] == 1 && y < 0.5 {
            5
        } else {
            m.cell_markers()[c]
        }
    };
    let (q, q_map) = Mesh::extract_codim0_submesh(&parent, 1).unwrap();
    let q = Arc::new(q.relabel_cells(lower));
    let (qq, qq_map) = Mesh::extract_codim0_submesh(&q, 5).unwrap();
    let nested = EntityMap::new(qq_map.source(), q_map.source(), MapKind::CellToCell, qq_map.table().to_vec())
        .unwrap()
        .compose(&q_map)
        .unwrap();

    let relabelled = Arc::new(parent.relabel_cells(lower));
    let (_, direct) = Mesh::extract_codim0_submesh(&relabelled, 5).unwrap();
    assert_eq!(qq.num_cells(), 25);
    assert_eq!(nested.table(), direct.table());
}

fn injective(len: usize, range: usize, seed: u64) -> Vec<usize> {
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    let mut pool: Vec<usize> = (0..range).collect();
    pool.shuffle(&mut rng);
    pool.truncate(len);
    pool
}

proptest! {
    #[test]
    fn compose_is_associative_and_injective(
        n0 in 1usize..30, e1 in 0usize..10, e2 in 0usize..10, e3 in 0usize..10, seed in any::<u64>()
    ) {
        let ids: Vec<_> = (0..4).map(|_| build_split_unit_square(0).id()).collect();
        let (n1, n2, n3) = (n0 + e1, n0 + e1 + e2, n0 + e1 + e2 + e3);
        let a = EntityMap::new(ids[0], ids[1], MapKind::CellToCell, injective(n0, n1, seed)).unwrap();
        let b = EntityMap::new(ids[1], ids[2], MapKind::CellToCell, injective(n1, n2, seed ^ 1)).unwrap();
        let c = EntityMap::new(ids[2], ids[3], MapKind::CellToFacet, injective(n2, n3, seed ^ 2)).unwrap();
        let left = a.compose(&b).unwrap().compose(&c).unwrap();
        let right = a.compose(&b.compose(&c).unwrap()).unwrap();
        prop_assert_eq!(left.table(), right.table());
        prop_assert_eq!(left.kind(), MapKind::CellToFacet);
        for (e, &img) in left.table().iter().enumerate() {
            prop_assert_eq!(img, c.table()[b.table()[a.table()[e]]]);
        }
        let mut image = left.table().to_vec();
        image.sort_unstable();
        image.dedup();
        prop_assert_eq!(image.len(), n0);
        prop_assert!(b.compose(&a).is_err());
    }
}
