//! Structured unit-square generators for the two benchmark problems.

use super::{Cell, CellType, Mesh};

/// Facet marker of the x = 0.5 interface.
pub const INTERFACE_MARKER: i32 = 999;
/// Facet marker of the outer boundary of the unit square.
pub const OUTER_BOUNDARY_MARKER: i32 = 1;

/// Number of background grid cells per side at refinement level `n`.
fn cells_per_side(n: u32) -> usize {
    10 << n
}

struct Grid {
    cells_per_side: usize,
}

impl Grid {
    fn vertex(&self, i: usize, j: usize) -> usize {
        j * (self.cells_per_side + 1) + i
    }

    fn vertices(&self) -> Vec<[f64; 2]> {
        let m = self.cells_per_side;
        let h = 1.0 / m as f64;
        let mut out = Vec::with_capacity((m + 1) * (m + 1));
        for j in 0..=m {
            for i in 0..=m {
                out.push([i as f64 * h, j as f64 * h]);
            }
        }
        out
    }

    /// Outer boundary edges marked 1 and edges on x = 0.5 marked 999.
    fn facet_markers(&self) -> Vec<(Vec<usize>, i32)> {
        let m = self.cells_per_side;
        let mid = m / 2;
        let mut out = Vec::new();
        for k in 0..m {
            out.push((vec![self.vertex(k, 0), self.vertex(k + 1, 0)], OUTER_BOUNDARY_MARKER));
            out.push((vec![self.vertex(k, m), self.vertex(k + 1, m)], OUTER_BOUNDARY_MARKER));
            out.push((vec![self.vertex(0, k), self.vertex(0, k + 1)], OUTER_BOUNDARY_MARKER));
            out.push((vec![self.vertex(m, k), self.vertex(m, k + 1)], OUTER_BOUNDARY_MARKER));
            out.push((vec![self.vertex(mid, k), self.vertex(mid, k + 1)], INTERFACE_MARKER));
        }
        out
    }
}

/// Unit square with quadrilaterals (marker 1) on x < 0.5 and triangles
/// (marker 2, two per background square) on x > 0.5. Grid spacing is
/// `0.10 / 2^n`. Cells are numbered row by row, left to right.
pub fn build_hybrid_unit_square(n: u32) -> Mesh {
    let grid = Grid { cells_per_side: cells_per_side(n) };
    let m = grid.cells_per_side;
    let mut cells = Vec::new();
    let mut markers = Vec::new();
    for j in 0..m {
        for i in 0..m {
            let v00 = grid.vertex(i, j);
            let v10 = grid.vertex(i + 1, j);
            let v11 = grid.vertex(i + 1, j + 1);
            let v01 = grid.vertex(i, j + 1);
            if i < m / 2 {
                cells.push(Cell { cell_type: CellType::Quadrilateral, vertices: vec![v00, v10, v11, v01] });
                markers.push(1);
            } else {
                cells.push(Cell { cell_type: CellType::Triangle, vertices: vec![v00, v10, v11] });
                cells.push(Cell { cell_type: CellType::Triangle, vertices: vec![v00, v11, v01] });
                markers.extend([2, 2]);
            }
        }
    }
    Mesh::new(2, grid.vertices(), cells, markers, &grid.facet_markers()).expect("generator produces a valid mesh")
}

/// All-quadrilateral unit square; marker 1 on x < 0.5, marker 2 on x > 0.5.
pub fn build_split_unit_square(n: u32) -> Mesh {
    let grid = Grid { cells_per_side: cells_per_side(n) };
    let m = grid.cells_per_side;
    let mut cells = Vec::with_capacity(m * m);
    let mut markers = Vec::with_capacity(m * m);
    for j in 0..m {
        for i in 0..m {
            cells.push(Cell {
                cell_type: CellType::Quadrilateral,
                vertices: vec![grid.vertex(i, j), grid.vertex(i + 1, j), grid.vertex(i + 1, j + 1), grid.vertex(i, j + 1)],
            });
            markers.push(if i < m / 2 { 1 } else { 2 });
        }
    }
    Mesh::new(2, grid.vertices(), cells, markers, &grid.facet_markers()).expect("generator produces a valid mesh")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hybrid_counts() {
        let mesh = build_hybrid_unit_square(0);
        let quads = mesh.cells().iter().filter(|c| c.cell_type == CellType::Quadrilateral).count();
        let tris = mesh.cells().iter().filter(|c| c.cell_type == CellType::Triangle).count();
        assert_eq!((quads, tris), (50, 100));
        let interface = mesh.facet_markers().values().filter(|&&m| m == INTERFACE_MARKER).count();
        assert_eq!(interface, 10);
        for n in 0..3 {
            assert!((build_hybrid_unit_square(n).total_volume() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn split_counts() {
        assert_eq!(build_split_unit_square(0).num_cells(), 100);
        assert_eq!(build_split_unit_square(1).num_cells(), 400);
        for n in 0..3 {
            let mesh = build_split_unit_square(n);
            let interface = mesh.facet_markers().values().filter(|&&m| m == INTERFACE_MARKER).count();
            assert_eq!(interface, 10 << n);
            assert!((mesh.total_volume() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn outer_boundary_is_fully_marked() {
        let mesh = build_hybrid_unit_square(1);
        let (ext, _) = mesh.classify_facets().unwrap();
        assert!(ext.iter().all(|&f| mesh.facet_marker(f) == Some(OUTER_BOUNDARY_MARKER)));
        assert_eq!(ext.len(), 4 * 20);
    }
}
