use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use super::expr::Expr;
use super::FormError;
use crate::mesh::Mesh;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum IntegralType {
    /// `dx`
    Cell,
    /// `ds`
    ExteriorFacet,
    /// `dS`
    InteriorFacet,
}

impl IntegralType {
    pub fn symbol(self) -> &'static str {
        match self {
            IntegralType::Cell => "dx",
            IntegralType::ExteriorFacet => "ds",
            IntegralType::InteriorFacet => "dS",
        }
    }

    pub fn from_symbol(s: &str) -> Option<Self> {
        match s {
            "dx" => Some(IntegralType::Cell),
            "ds" => Some(IntegralType::ExteriorFacet),
            "dS" => Some(IntegralType::InteriorFacet),
            _ => None,
        }
    }

    pub fn is_facet(self) -> bool {
        self != IntegralType::Cell
    }
}

impl fmt::Display for IntegralType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// Integration measure, possibly intersected with measures on other meshes.
/// The first (owning) mesh is the primal integration domain: its entities
/// form the iteration set.
#[derive(Clone)]
pub struct Measure {
    integral_type: IntegralType,
    mesh: Arc<Mesh>,
    subdomain: Option<i32>,
    intersect: Vec<(IntegralType, Arc<Mesh>)>,
    quadrature_degree: Option<usize>,
}

impl fmt::Debug for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}<{}>", self.integral_type, self.mesh.id())?;
        if let Some(s) = self.subdomain {
            write!(f, "({s})")?;
        }
        for (t, m) in &self.intersect {
            write!(f, " ∩ {t}<{}>", m.id())?;
        }
        Ok(())
    }
}

/// Builds a measure, checking the participant rules: meshes are pairwise
/// distinct, codim-1 meshes only take part through their cells, and a
/// codim-1 participant pairs with facet participants on codim-0 meshes.
pub fn measure(
    integral_type: IntegralType,
    mesh: &Arc<Mesh>,
    subdomain: Option<i32>,
    intersect: &[(IntegralType, Arc<Mesh>)],
) -> Result<Measure, FormError> {
    let m = Measure {
        integral_type,
        mesh: Arc::clone(mesh),
        subdomain,
        intersect: intersect.to_vec(),
        quadrature_degree: None,
    };
    m.check()?;
    Ok(m)
}

impl Measure {
    /// Plain single-domain measure.
    pub fn new(integral_type: IntegralType, mesh: &Arc<Mesh>) -> Result<Measure, FormError> {
        measure(integral_type, mesh, None, &[])
    }

    pub fn dx(mesh: &Arc<Mesh>) -> Result<Measure, FormError> {
        Self::new(IntegralType::Cell, mesh)
    }

    pub fn ds(mesh: &Arc<Mesh>) -> Result<Measure, FormError> {
        Self::new(IntegralType::ExteriorFacet, mesh)
    }

    #[allow(non_snake_case)]
    pub fn dS(mesh: &Arc<Mesh>) -> Result<Measure, FormError> {
        Self::new(IntegralType::InteriorFacet, mesh)
    }

    /// Adds an intersected participant.
    pub fn intersect(mut self, integral_type: IntegralType, mesh: &Arc<Mesh>) -> Result<Measure, FormError> {
        self.intersect.push((integral_type, Arc::clone(mesh)));
        self.check()?;
        Ok(self)
    }

    /// Same measure restricted to a marked subdomain, like `ds(999)`.
    pub fn subdomain(&self, id: i32) -> Measure {
        Measure { subdomain: Some(id), ..self.clone() }
    }

    pub fn with_quadrature_degree(&self, degree: usize) -> Measure {
        Measure { quadrature_degree: Some(degree), ..self.clone() }
    }

    pub fn integral_type(&self) -> IntegralType {
        self.integral_type
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn subdomain_id(&self) -> Option<i32> {
        self.subdomain
    }

    pub fn intersect_measures(&self) -> &[(IntegralType, Arc<Mesh>)] {
        &self.intersect
    }

    pub fn quadrature_degree(&self) -> Option<usize> {
        self.quadrature_degree
    }

    /// Primal participant first, then the intersected ones in order.
    pub fn participants(&self) -> Vec<(IntegralType, &Arc<Mesh>)> {
        std::iter::once((self.integral_type, &self.mesh))
            .chain(self.intersect.iter().map(|(t, m)| (*t, m)))
            .collect()
    }

    /// Role of `mesh` in this measure, if it participates.
    pub fn role_of(&self, mesh: &Mesh) -> Option<IntegralType> {
        self.participants().into_iter().find(|(_, m)| m.id() == mesh.id()).map(|(t, _)| t)
    }

    fn check(&self) -> Result<(), FormError> {
        let parts = self.participants();
        for (i, (_, a)) in parts.iter().enumerate() {
            if parts[..i].iter().any(|(_, b)| b.id() == a.id()) {
                return Err(FormError::DuplicateMesh(a.id()));
            }
        }
        let has_codim1 = parts.iter().any(|(_, m)| m.is_codim1());
        for (t, m) in &parts {
            if m.is_codim1() && *t != IntegralType::Cell {
                return Err(FormError::InvalidMeasure(format!("codim-1 mesh {} only supports dx, got {t}", m.id())));
            }
            if !m.is_codim1() && has_codim1 && *t == IntegralType::Cell {
                return Err(FormError::InvalidMeasure(format!(
                    "codim-0 mesh {} must take part through facets next to a codim-1 mesh",
                    m.id()
                )));
            }
        }
        let primal = parts[0];
        if !primal.1.is_codim1() {
            let primal_is_cell = primal.0 == IntegralType::Cell;
            for (t, m) in &parts[1..] {
                if !m.is_codim1() && (*t == IntegralType::Cell) != primal_is_cell {
                    return Err(FormError::InvalidMeasure(format!("cannot intersect {} with {t}", primal.0)));
                }
            }
        }
        Ok(())
    }

    /// Structural key: integral types, mesh ids, subdomain.
    pub(crate) fn key(&self) -> String {
        format!("{self:?}")
    }
}

#[derive(Clone, Debug)]
pub struct Integral {
    pub integrand: Expr,
    pub measure: Measure,
}

/// Sum of integrals.
#[derive(Clone, Debug, Default)]
pub struct Form {
    pub integrals: Vec<Integral>,
}

impl Form {
    pub fn empty() -> Self {
        Form::default()
    }

    pub fn is_empty(&self) -> bool {
        self.integrals.is_empty()
    }

    /// Number of distinct arguments (0 functional, 1 linear, 2 bilinear).
    pub fn arity(&self) -> usize {
        let mut nums: Vec<usize> = self.integrals.iter().flat_map(|i| i.integrand.argument_numbers()).collect();
        nums.sort_unstable();
        nums.dedup();
        nums.len()
    }

    pub fn scale(&self, a: f64) -> Form {
        Form {
            integrals: self
                .integrals
                .iter()
                .map(|i| Integral { integrand: a * &i.integrand, measure: i.measure.clone() })
                .collect(),
        }
    }
}

impl Mul<&Measure> for Expr {
    type Output = Form;
    fn mul(self, m: &Measure) -> Form {
        Form { integrals: vec![Integral { integrand: self, measure: m.clone() }] }
    }
}

impl Mul<&Measure> for &Expr {
    type Output = Form;
    fn mul(self, m: &Measure) -> Form {
        self.clone() * m
    }
}

impl Add for Form {
    type Output = Form;
    fn add(mut self, rhs: Form) -> Form {
        self.integrals.extend(rhs.integrals);
        self
    }
}

impl Sub for Form {
    type Output = Form;
    fn sub(self, rhs: Form) -> Form {
        self + (-rhs)
    }
}

impl Neg for Form {
    type Output = Form;
    fn neg(self) -> Form {
        self.scale(-1.0)
    }
}

impl Mul<Form> for f64 {
    type Output = Form;
    fn mul(self, rhs: Form) -> Form {
        rhs.scale(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_split_unit_square, INTERFACE_MARKER};

    fn meshes() -> (Arc<Mesh>, Arc<Mesh>, Arc<Mesh>) {
        let parent = Arc::new(build_split_unit_square(0));
        let (l, _) = Mesh::extract_codim0_submesh(&parent, 1).unwrap();
        let (r, _) = Mesh::extract_codim0_submesh(&parent, 2).unwrap();
        let (i, _) = Mesh::extract_codim1_submesh(&parent, INTERFACE_MARKER).unwrap();
        (Arc::new(l), Arc::new(r), Arc::new(i))
    }

    #[test]
    fn plain_cell_measure() {
        let (l, _, _) = meshes();
        let m = measure(IntegralType::Cell, &l, None, &[]).unwrap();
        assert_eq!(m.participants().len(), 1);
        assert_eq!(m.subdomain_id(), None);
    }

    #[test]
    fn interface_measures() {
        let (l, r, i) = meshes();
        let ds = measure(IntegralType::ExteriorFacet, &l, Some(999), &[(IntegralType::ExteriorFacet, Arc::clone(&r))]).unwrap();
        assert_eq!(ds.role_of(&r), Some(IntegralType::ExteriorFacet));
        let dz = measure(
            IntegralType::Cell,
            &i,
            None,
            &[(IntegralType::ExteriorFacet, Arc::clone(&l)), (IntegralType::ExteriorFacet, Arc::clone(&r))],
        )
        .unwrap();
        assert_eq!(dz.participants().len(), 3);
    }

    #[test]
    fn invalid_measures() {
        let (l, r, i) = meshes();
        assert!(matches!(
            measure(IntegralType::Cell, &l, None, &[(IntegralType::Cell, Arc::clone(&l))]),
            Err(FormError::DuplicateMesh(_))
        ));
        assert!(matches!(measure(IntegralType::ExteriorFacet, &i, None, &[]), Err(FormError::InvalidMeasure(_))));
        assert!(measure(IntegralType::Cell, &i, None, &[(IntegralType::Cell, Arc::clone(&l))]).is_err());
        assert!(measure(IntegralType::Cell, &l, None, &[(IntegralType::ExteriorFacet, Arc::clone(&r))]).is_err());
    }
}
