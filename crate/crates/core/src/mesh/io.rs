//! Line-oriented mesh text format.
//!
//! ```text
//! meshfmt 1
//! dim 2 gdim 2
//! vertices 3
//! 0 0
//! 1 0
//! 0 1
//! cells 1
//! triangle 0 1 2 5
//! facet_markers 1
//! 0 1 7
//! ```

use std::fmt::Write as _;

use super::{Cell, CellType, Mesh, MeshError};

pub fn write_mesh(mesh: &Mesh) -> String {
    let mut out = String::new();
    writeln!(out, "meshfmt 1").unwrap();
    writeln!(out, "dim {} gdim {}", mesh.dim(), mesh.gdim()).unwrap();
    writeln!(out, "vertices {}", mesh.vertices().len()).unwrap();
    for v in mesh.vertices() {
        writeln!(out, "{:?} {:?}", v[0], v[1]).unwrap();
    }
    writeln!(out, "cells {}", mesh.num_cells()).unwrap();
    for (cell, marker) in mesh.cells().iter().zip(mesh.cell_markers()) {
        write!(out, "{}", cell.cell_type).unwrap();
        for v in &cell.vertices {
            write!(out, " {v}").unwrap();
        }
        writeln!(out, " {marker}").unwrap();
    }
    writeln!(out, "facet_markers {}", mesh.facet_markers().len()).unwrap();
    for (&f, marker) in mesh.facet_markers() {
        for v in &mesh.facet(f).vertices {
            write!(out, "{v} ").unwrap();
        }
        writeln!(out, "{marker}").unwrap();
    }
    out
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn next_tokens(&mut self) -> Result<Vec<&'a str>, MeshError> {
        for (i, l) in self.inner.by_ref() {
            self.line = i + 1;
            let toks: Vec<&str> = l.split_whitespace().collect();
            if !toks.is_empty() {
                return Ok(toks);
            }
        }
        Err(MeshError::Parse { line: self.line + 1, msg: "unexpected end of input".into() })
    }

    fn err(&self, msg: impl Into<String>) -> MeshError {
        MeshError::Parse { line: self.line, msg: msg.into() }
    }

    fn header(&mut self, key: &str) -> Result<usize, MeshError> {
        let toks = self.next_tokens()?;
        match toks.as_slice() {
            [k, n] if *k == key => n.parse().map_err(|_| self.err(format!("bad count {n:?}"))),
            _ => Err(self.err(format!("expected `{key} <count>`"))),
        }
    }

    fn parse<T: std::str::FromStr>(&self, tok: &str) -> Result<T, MeshError> {
        tok.parse().map_err(|_| self.err(format!("cannot parse {tok:?}")))
    }
}

pub fn read_mesh(text: &str) -> Result<Mesh, MeshError> {
    let mut lines = Lines { inner: text.lines().enumerate(), line: 0 };
    if lines.next_tokens()? != ["meshfmt", "1"] {
        return Err(lines.err("expected `meshfmt 1`"));
    }
    let toks = lines.next_tokens()?;
    let dim: usize = match toks.as_slice() {
        ["dim", d, "gdim", "2"] => lines.parse(d)?,
        _ => return Err(lines.err("expected `dim D gdim 2`")),
    };

    let nv = lines.header("vertices")?;
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let toks = lines.next_tokens()?;
        if toks.len() != 2 {
            return Err(lines.err("vertex lines hold two coordinates"));
        }
        vertices.push([lines.parse(toks[0])?, lines.parse(toks[1])?]);
    }

    let nc = lines.header("cells")?;
    let mut cells = Vec::with_capacity(nc);
    let mut markers = Vec::with_capacity(nc);
    for _ in 0..nc {
        let toks = lines.next_tokens()?;
        let ty = CellType::from_name(toks[0]).ok_or_else(|| lines.err(format!("unknown cell type {:?}", toks[0])))?;
        if toks.len() != ty.num_vertices() + 2 {
            return Err(lines.err(format!("{ty} needs {} vertices and a marker", ty.num_vertices())));
        }
        let verts = toks[1..=ty.num_vertices()].iter().map(|t| lines.parse(t)).collect::<Result<Vec<usize>, _>>()?;
        cells.push(Cell { cell_type: ty, vertices: verts });
        markers.push(lines.parse(toks[toks.len() - 1])?);
    }

    let nf = lines.header("facet_markers")?;
    let mut facet_markers = Vec::with_capacity(nf);
    for _ in 0..nf {
        let toks = lines.next_tokens()?;
        if toks.len() != dim + 1 {
            return Err(lines.err(format!("facet lines hold {dim} vertices and a marker")));
        }
        let verts = toks[..dim].iter().map(|t| lines.parse(t)).collect::<Result<Vec<usize>, _>>()?;
        facet_markers.push((verts, lines.parse(toks[dim])?));
    }
    Mesh::new(dim, vertices, cells, markers, &facet_markers)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_hybrid_unit_square;

    #[test]
    fn parses_small_mesh() {
        let text = "meshfmt 1\ndim 2 gdim 2\nvertices 3\n0 0\n1 0\n0 1\ncells 1\ntriangle 0 1 2 5\nfacet_markers 1\n1 0 7\n";
        let mesh = read_mesh(text).unwrap();
        assert_eq!(mesh.num_cells(), 1);
        assert_eq!(mesh.cell_markers(), &[5]);
        let f = mesh.find_facet(&[0, 1]).unwrap();
        assert_eq!(mesh.facet_marker(f), Some(7));
    }

    #[test]
    fn round_trip_preserves_mesh() {
        let mesh = build_hybrid_unit_square(0);
        let back = read_mesh(&write_mesh(&mesh)).unwrap();
        assert_eq!(back.vertices(), mesh.vertices());
        assert_eq!(back.cells(), mesh.cells());
        assert_eq!(back.cell_markers(), mesh.cell_markers());
        assert_eq!(back.facet_markers(), mesh.facet_markers());
    }

    #[test]
    fn reports_line_of_error() {
        let text = "meshfmt 1\ndim 2 gdim 2\nvertices 1\n0 zero\n";
        assert!(matches!(read_mesh(text), Err(MeshError::Parse { line: 4, .. })));
    }
}
