//! Degree-1 geometric maps: affine intervals and triangles, bilinear
//! quadrilaterals.

use super::FeError;
use crate::mesh::CellType;

pub const PULLBACK_TOL: f64 = 1e-13;
pub const PULLBACK_MAX_ITERS: usize = 25;

#[derive(Debug, Clone, PartialEq)]
pub struct CellGeometry {
    pub cell_type: CellType,
    pub coords: Vec<[f64; 2]>,
}

/// Columns are the derivatives of the map w.r.t. each reference coordinate.
/// Intervals only use the first column.
pub type Jacobian = [[f64; 2]; 2];

impl CellGeometry {
    pub fn new(cell_type: CellType, coords: Vec<[f64; 2]>) -> Self {
        debug_assert_eq!(coords.len(), cell_type.num_vertices());
        CellGeometry { cell_type, coords }
    }

    pub fn map(&self, xi: [f64; 2]) -> [f64; 2] {
        let c = &self.coords;
        match self.cell_type {
            CellType::Interval => {
                let t = xi[0];
                [c[0][0] + t * (c[1][0] - c[0][0]), c[0][1] + t * (c[1][1] - c[0][1])]
            }
            CellType::Triangle => {
                let (s, t) = (xi[0], xi[1]);
                [
                    c[0][0] + s * (c[1][0] - c[0][0]) + t * (c[2][0] - c[0][0]),
                    c[0][1] + s * (c[1][1] - c[0][1]) + t * (c[2][1] - c[0][1]),
                ]
            }
            CellType::Quadrilateral => {
                let (s, t) = (xi[0], xi[1]);
                let n = [(1.0 - s) * (1.0 - t), s * (1.0 - t), s * t, (1.0 - s) * t];
                let mut x = [0.0; 2];
                for (w, p) in n.iter().zip(c) {
                    x[0] += w * p[0];
                    x[1] += w * p[1];
                }
                x
            }
        }
    }

    /// `J[i][j] = ∂x_i / ∂ξ_j`.
    pub fn jacobian(&self, xi: [f64; 2]) -> Jacobian {
        let c = &self.coords;
        match self.cell_type {
            CellType::Interval => [[c[1][0] - c[0][0], 0.0], [c[1][1] - c[0][1], 0.0]],
            CellType::Triangle => [
                [c[1][0] - c[0][0], c[2][0] - c[0][0]],
                [c[1][1] - c[0][1], c[2][1] - c[0][1]],
            ],
            CellType::Quadrilateral => {
                let (s, t) = (xi[0], xi[1]);
                let ds = [-(1.0 - t), 1.0 - t, t, -t];
                let dt = [-(1.0 - s), -s, s, 1.0 - s];
                let mut j = [[0.0; 2]; 2];
                for k in 0..4 {
                    for i in 0..2 {
                        j[i][0] += ds[k] * c[k][i];
                        j[i][1] += dt[k] * c[k][i];
                    }
                }
                j
            }
        }
    }

    /// Volume scaling `|det J|` (2D) or the length factor `|∂x/∂ξ|` (interval).
    pub fn scale(&self, jac: &Jacobian) -> f64 {
        match self.cell_type {
            CellType::Interval => jac[0][0].hypot(jac[1][0]),
            _ => (jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0]).abs(),
        }
    }

    /// Pushes a reference gradient forward to physical coordinates. For
    /// intervals this is the tangential gradient.
    pub fn push_gradient(&self, jac: &Jacobian, g: [f64; 2]) -> [f64; 2] {
        match self.cell_type {
            CellType::Interval => {
                let t = [jac[0][0], jac[1][0]];
                let l2 = t[0] * t[0] + t[1] * t[1];
                [t[0] * g[0] / l2, t[1] * g[0] / l2]
            }
            _ => {
                let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
                // J^{-T} g
                [
                    (jac[1][1] * g[0] - jac[1][0] * g[1]) / det,
                    (-jac[0][1] * g[0] + jac[0][0] * g[1]) / det,
                ]
            }
        }
    }

    /// Reference coordinates of physical point `x`. Affine cells are inverted
    /// in closed form, quadrilaterals by Newton iteration.
    pub fn pullback(&self, x: [f64; 2]) -> Result<[f64; 2], FeError> {
        let c = &self.coords;
        match self.cell_type {
            CellType::Interval => {
                let t = [c[1][0] - c[0][0], c[1][1] - c[0][1]];
                let l2 = t[0] * t[0] + t[1] * t[1];
                let s = ((x[0] - c[0][0]) * t[0] + (x[1] - c[0][1]) * t[1]) / l2;
                let back = self.map([s, 0.0]);
                if (back[0] - x[0]).hypot(back[1] - x[1]) > 1e-10 * l2.sqrt() {
                    return Err(FeError::PullbackFailed);
                }
                Ok([s, 0.0])
            }
            CellType::Triangle => {
                let j = self.jacobian([0.0, 0.0]);
                let r = [x[0] - c[0][0], x[1] - c[0][1]];
                solve2(&j, r).ok_or(FeError::PullbackFailed)
            }
            CellType::Quadrilateral => {
                let mut xi = [0.5, 0.5];
                for _ in 0..PULLBACK_MAX_ITERS {
                    let fx = self.map(xi);
                    let r = [x[0] - fx[0], x[1] - fx[1]];
                    let d = solve2(&self.jacobian(xi), r).ok_or(FeError::PullbackFailed)?;
                    xi = [xi[0] + d[0], xi[1] + d[1]];
                    if d[0].abs().max(d[1].abs()) <= PULLBACK_TOL {
                        return Ok(xi);
                    }
                }
                Err(FeError::PullbackFailed)
            }
        }
    }

    /// Unit outward normal of a local facet (straight facets).
    pub fn outward_normal(&self, local_facet: usize) -> [f64; 2] {
        let fv = self.cell_type.facet_vertices(local_facet);
        match self.cell_type {
            CellType::Interval => {
                let t = [self.coords[1][0] - self.coords[0][0], self.coords[1][1] - self.coords[0][1]];
                let l = t[0].hypot(t[1]);
                let s = if fv[0] == 1 { 1.0 } else { -1.0 };
                [s * t[0] / l, s * t[1] / l]
            }
            _ => {
                let a = self.coords[fv[0]];
                let b = self.coords[fv[1]];
                let l = (b[0] - a[0]).hypot(b[1] - a[1]);
                [(b[1] - a[1]) / l, -(b[0] - a[0]) / l]
            }
        }
    }
}

fn solve2(j: &Jacobian, r: [f64; 2]) -> Option<[f64; 2]> {
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    if det.abs() < 1e-300 || !det.is_finite() {
        return None;
    }
    Some([(j[1][1] * r[0] - j[0][1] * r[1]) / det, (-j[1][0] * r[0] + j[0][0] * r[1]) / det])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quad_pullback_inverts_map() {
        let g = CellGeometry::new(CellType::Quadrilateral, vec![[0.0, 0.0], [2.0, 0.1], [2.3, 1.7], [-0.2, 1.0]]);
        for xi in [[0.1, 0.9], [0.5, 0.5], [1.0, 0.0], [0.77, 0.21]] {
            let back = g.pullback(g.map(xi)).unwrap();
            assert!((back[0] - xi[0]).abs() < 1e-12 && (back[1] - xi[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn triangle_gradient_push_forward() {
        // x = 2ξ, y = 3η: d/dx = (1/2) d/dξ
        let g = CellGeometry::new(CellType::Triangle, vec![[0.0, 0.0], [2.0, 0.0], [0.0, 3.0]]);
        let j = g.jacobian([0.2, 0.2]);
        assert_eq!(g.push_gradient(&j, [1.0, 1.0]), [0.5, 1.0 / 3.0]);
        assert!((g.scale(&j) - 6.0).abs() < 1e-15);
    }

    #[test]
    fn interval_off_line_point_fails() {
        let g = CellGeometry::new(CellType::Interval, vec![[0.0, 0.0], [0.0, 1.0]]);
        assert_eq!(g.pullback([0.0, 0.25]).unwrap(), [0.25, 0.0]);
        assert!(g.pullback([0.1, 0.25]).is_err());
    }
}
