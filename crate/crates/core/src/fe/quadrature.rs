use super::FeError;
use crate::mesh::CellType;

pub const MAX_QUADRATURE_DEGREE: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub cell: CellType,
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Gauss-Legendre points and weights on [0, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut pts = vec![0.0; n];
    let mut wts = vec![0.0; n];
    for i in 0..n {
        // Chebyshev-like initial guess on [-1, 1], refined by Newton.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        pts[n - 1 - i] = 0.5 * (x + 1.0);
        wts[n - 1 - i] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
    (pts, wts)
}

fn points_for(degree: usize) -> usize {
    degree / 2 + 1
}

/// Rule exact for polynomials of total degree `degree` (per-direction degree
/// on quadrilaterals).
pub fn make_quadrature(cell: CellType, degree: usize) -> Result<QuadratureRule, FeError> {
    if degree > MAX_QUADRATURE_DEGREE {
        return Err(FeError::QuadratureDegree(degree));
    }
    let mut points = Vec::new();
    let mut weights = Vec::new();
    match cell {
        CellType::Interval => {
            let (x, w) = gauss_legendre(points_for(degree));
            points.extend(x.iter().map(|&t| [t, 0.0]));
            weights = w;
        }
        CellType::Quadrilateral => {
            let (x, w) = gauss_legendre(points_for(degree));
            for (j, &y) in x.iter().enumerate() {
                for (i, &xi) in x.iter().enumerate() {
                    points.push([xi, y]);
                    weights.push(w[i] * w[j]);
                }
            }
        }
        CellType::Triangle => {
            // Collapsed square: x = u, y = (1 - u) v, dA = (1 - u) du dv.
            let (u, wu) = gauss_legendre(points_for(degree + 1));
            let (v, wv) = gauss_legendre(points_for(degree));
            for (i, &ui) in u.iter().enumerate() {
                for (j, &vj) in v.iter().enumerate() {
                    points.push([ui, (1.0 - ui) * vj]);
                    weights.push(wu[i] * wv[j] * (1.0 - ui));
                }
            }
        }
    }
    Ok(QuadratureRule { cell, points, weights })
}

/// Maps interval reference points `t ∈ [0, 1]` onto a local facet of `cell`,
/// running from the facet's first local vertex to its second.
pub fn facet_embedding(cell: CellType, local_facet: usize, facet_points: &[f64]) -> Result<Vec<[f64; 2]>, FeError> {
    if local_facet >= cell.num_facets() {
        return Err(FeError::BadFacet { cell, local_facet });
    }
    let rv = cell.reference_vertices();
    let fv = cell.facet_vertices(local_facet);
    Ok(match cell {
        CellType::Interval => facet_points.iter().map(|_| rv[fv[0]]).collect(),
        _ => {
            let (a, b) = (rv[fv[0]], rv[fv[1]]);
            facet_points.iter().map(|&t| [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]).collect()
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: i32) -> f64 {
        (1..=n).map(f64::from).product()
    }

    fn integrate(rule: &QuadratureRule, a: i32, b: i32) -> f64 {
        rule.points.iter().zip(&rule.weights).map(|(p, w)| w * p[0].powi(a) * p[1].powi(b)).sum()
    }

    #[test]
    fn interval_degree_one_is_midpoint() {
        let r = make_quadrature(CellType::Interval, 1).unwrap();
        assert_eq!(r.len(), 1);
        assert!((r.points[0][0] - 0.5).abs() < 1e-15);
        assert!((r.weights[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn weights_sum_to_reference_measure() {
        for d in 0..=MAX_QUADRATURE_DEGREE {
            for cell in [CellType::Interval, CellType::Triangle, CellType::Quadrilateral] {
                let r = make_quadrature(cell, d).unwrap();
                let s: f64 = r.weights.iter().sum();
                assert!((s - cell.reference_volume()).abs() < 1e-14, "{cell} degree {d}: {s}");
            }
        }
    }

    #[test]
    fn monomial_exactness() {
        for d in 0..=MAX_QUADRATURE_DEGREE {
            let line = make_quadrature(CellType::Interval, d).unwrap();
            let quad = make_quadrature(CellType::Quadrilateral, d).unwrap();
            let tri = make_quadrature(CellType::Triangle, d).unwrap();
            for a in 0..=d as i32 {
                let exact = 1.0 / (a + 1) as f64;
                assert!((integrate(&line, a, 0) - exact).abs() < 1e-14);
                for b in 0..=(d as i32 - a) {
                    let q_exact = 1.0 / ((a + 1) * (b + 1)) as f64;
                    assert!((integrate(&quad, a, b) - q_exact).abs() < 1e-14);
                    let t_exact = factorial(a) * factorial(b) / factorial(a + b + 2);
                    assert!((integrate(&tri, a, b) - t_exact).abs() < 1e-14, "tri {a},{b} at degree {d}");
                }
            }
        }
    }

    #[test]
    fn rejects_excessive_degree() {
        assert!(matches!(make_quadrature(CellType::Triangle, 13), Err(FeError::QuadratureDegree(13))));
    }

    #[test]
    fn facet_embedding_lies_on_facet() {
        let e = facet_embedding(CellType::Triangle, 0, &[0.0]).unwrap();
        assert_eq!(e[0], [0.0, 0.0]);
        let ts = [0.0, 0.3, 0.8, 1.0];
        let pts = facet_embedding(CellType::Triangle, 1, &ts).unwrap();
        for (p, &t) in pts.iter().zip(&ts) {
            assert!((p[0] + p[1] - 1.0).abs() < 1e-14);
            // pull back along the facet
            assert!((p[1] - t).abs() < 1e-14);
        }
        let pts = facet_embedding(CellType::Quadrilateral, 2, &ts).unwrap();
        for (p, &t) in pts.iter().zip(&ts) {
            assert!((p[1] - 1.0).abs() < 1e-14);
            assert!((1.0 - p[0] - t).abs() < 1e-14);
        }
        assert!(facet_embedding(CellType::Quadrilateral, 4, &ts).is_err());
    }
}
