use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use super::space::{Argument, Coefficient, FunctionSpace};
use super::FormError;
use crate::fe::ValueShape;
use crate::mesh::Mesh;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Plus,
    Minus,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Plus => "+",
            Side::Minus => "-",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MathFunction {
    Cos,
    Sin,
}

/// Expression tree node.
#[derive(Debug)]
pub enum Node {
    Coefficient(Coefficient),
    Argument(Argument),
    /// Component `k` of a function on a product space, or entry `k` of a
    /// vector-valued expression.
    Indexed(Expr, usize),
    SpatialCoordinate(Arc<Mesh>),
    FacetNormal(Arc<Mesh>),
    /// Stored normal of a codim-1 mesh cell.
    CellNormal(Arc<Mesh>),
    Constant(f64),
    Grad(Expr),
    Div(Expr),
    Sum(Expr, Expr),
    Product(Expr, Expr),
    Inner(Expr, Expr),
    Restricted(Expr, Side),
    Math(MathFunction, Expr),
}

/// Immutable, cheaply cloned expression.
#[derive(Clone)]
pub struct Expr(Arc<Node>);

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Expr {
    pub fn new(node: Node) -> Self {
        Expr(Arc::new(node))
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    pub fn ptr_eq(&self, other: &Expr) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    pub fn constant(c: f64) -> Self {
        Expr::new(Node::Constant(c))
    }

    pub fn restricted(&self, side: Side) -> Self {
        Expr::new(Node::Restricted(self.clone(), side))
    }

    /// `self('+')`
    pub fn plus(&self) -> Self {
        self.restricted(Side::Plus)
    }

    /// `self('-')`
    pub fn minus(&self) -> Self {
        self.restricted(Side::Minus)
    }

    /// Short node name used in diagnostics paths.
    pub fn kind_name(&self) -> &'static str {
        match self.node() {
            Node::Coefficient(_) => "Coefficient",
            Node::Argument(_) => "Argument",
            Node::Indexed(..) => "Indexed",
            Node::SpatialCoordinate(_) => "SpatialCoordinate",
            Node::FacetNormal(_) => "FacetNormal",
            Node::CellNormal(_) => "CellNormal",
            Node::Constant(_) => "Constant",
            Node::Grad(_) => "Grad",
            Node::Div(_) => "Div",
            Node::Sum(..) => "Sum",
            Node::Product(..) => "Product",
            Node::Inner(..) => "Inner",
            Node::Restricted(..) => "Restricted",
            Node::Math(..) => "Math",
        }
    }

    pub fn children(&self) -> Vec<&Expr> {
        match self.node() {
            Node::Indexed(e, _) | Node::Grad(e) | Node::Div(e) | Node::Restricted(e, _) | Node::Math(_, e) => vec![e],
            Node::Sum(a, b) | Node::Product(a, b) | Node::Inner(a, b) => vec![a, b],
            _ => vec![],
        }
    }

    /// Tensor rank of the value (0 scalar, 1 vector, 2 matrix).
    pub fn rank(&self) -> Result<usize, FormError> {
        let shape_err = |msg: String| Err(FormError::Shape(format!("{msg} in {self}")));
        match self.node() {
            Node::Coefficient(c) => whole_space_rank(c.space()),
            Node::Argument(a) => whole_space_rank(&a.space),
            Node::Indexed(e, k) => match function_space_of(e) {
                Some(space) => {
                    if *k >= space.num_components() {
                        return shape_err(format!("component {k} out of range"));
                    }
                    Ok(value_rank(space.component_element(*k).value_shape()))
                }
                // entry of a vector value
                None => match e.rank()? {
                    1 if *k < 2 => Ok(0),
                    r => shape_err(format!("entry {k} of a rank-{r} value")),
                },
            },
            Node::SpatialCoordinate(_) | Node::FacetNormal(_) | Node::CellNormal(_) => Ok(1),
            Node::Constant(_) => Ok(0),
            Node::Grad(e) => {
                let r = e.rank()?;
                if r >= 2 {
                    return shape_err("gradient of a rank-2 value".into());
                }
                Ok(r + 1)
            }
            Node::Div(e) => match e.rank()? {
                0 => shape_err("divergence of a scalar".into()),
                r => Ok(r - 1),
            },
            Node::Sum(a, b) => {
                let (ra, rb) = (a.rank()?, b.rank()?);
                if ra != rb {
                    return shape_err(format!("sum of rank {ra} and rank {rb}"));
                }
                Ok(ra)
            }
            Node::Product(a, b) => match (a.rank()?, b.rank()?) {
                (0, r) | (r, 0) => Ok(r),
                (ra, rb) => shape_err(format!("product of rank {ra} and rank {rb}; use inner")),
            },
            Node::Inner(a, b) => {
                let (ra, rb) = (a.rank()?, b.rank()?);
                if ra != rb {
                    return shape_err(format!("inner of rank {ra} and rank {rb}"));
                }
                Ok(0)
            }
            Node::Restricted(e, _) => e.rank(),
            Node::Math(_, e) => match e.rank()? {
                0 => Ok(0),
                _ => shape_err("math function of a non-scalar".into()),
            },
        }
    }

    /// Visits every node in pre-order.
    pub fn visit(&self, f: &mut impl FnMut(&Expr)) {
        f(self);
        for c in self.children() {
            c.visit(f);
        }
    }

    /// Argument numbers appearing in the expression, sorted.
    pub fn argument_numbers(&self) -> Vec<usize> {
        let mut out = Vec::new();
        self.visit(&mut |e| {
            if let Node::Argument(a) = e.node() {
                if !out.contains(&a.number) {
                    out.push(a.number);
                }
            }
        });
        out.sort_unstable();
        out
    }

    /// `(argument number, component)` pairs the expression touches.
    pub fn argument_components(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        collect_argument_components(self, &mut out);
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn depends_on(&self, c: &Coefficient) -> bool {
        let mut found = false;
        self.visit(&mut |e| {
            if let Node::Coefficient(x) = e.node() {
                found |= x == c;
            }
        });
        found
    }
}

fn collect_argument_components(e: &Expr, out: &mut Vec<(usize, usize)>) {
    match e.node() {
        Node::Indexed(inner, k) => {
            if let Some(a) = argument_of(inner) {
                out.push((a.number, *k));
                return;
            }
            collect_argument_components(inner, out);
        }
        Node::Argument(a) => out.push((a.number, 0)),
        _ => {
            for c in e.children() {
                collect_argument_components(c, out);
            }
        }
    }
}

fn argument_of(e: &Expr) -> Option<&Argument> {
    match e.node() {
        Node::Argument(a) => Some(a),
        Node::Restricted(inner, _) => argument_of(inner),
        _ => None,
    }
}

/// Space of a (possibly restricted) coefficient or argument.
pub(crate) fn function_space_of(e: &Expr) -> Option<&FunctionSpace> {
    match e.node() {
        Node::Coefficient(c) => Some(c.space()),
        Node::Argument(a) => Some(&a.space),
        Node::Restricted(inner, _) => function_space_of(inner),
        _ => None,
    }
}

fn value_rank(shape: ValueShape) -> usize {
    match shape {
        ValueShape::Scalar => 0,
        ValueShape::Vector => 1,
    }
}

fn whole_space_rank(space: &FunctionSpace) -> Result<usize, FormError> {
    if space.num_components() != 1 {
        return Err(FormError::Shape(format!(
            "function on a {}-component space must be split before use",
            space.num_components()
        )));
    }
    Ok(value_rank(space.component_element(0).value_shape()))
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            Node::Coefficient(c) => write!(f, "{}", c.name()),
            Node::Argument(a) => write!(f, "{a}"),
            Node::Indexed(e, k) => write!(f, "{e}[{k}]"),
            Node::SpatialCoordinate(m) => write!(f, "x<{}>", m.id()),
            Node::FacetNormal(m) => write!(f, "n<{}>", m.id()),
            Node::CellNormal(m) => write!(f, "cn<{}>", m.id()),
            Node::Constant(c) => write!(f, "{c}"),
            Node::Grad(e) => write!(f, "grad({e})"),
            Node::Div(e) => write!(f, "div({e})"),
            Node::Sum(a, b) => write!(f, "({a} + {b})"),
            Node::Product(a, b) => write!(f, "{a}*{b}"),
            Node::Inner(a, b) => write!(f, "inner({a}, {b})"),
            Node::Restricted(e, s) => write!(f, "({e})('{s}')"),
            Node::Math(MathFunction::Cos, e) => write!(f, "cos({e})"),
            Node::Math(MathFunction::Sin, e) => write!(f, "sin({e})"),
        }
    }
}

impl From<f64> for Expr {
    fn from(c: f64) -> Self {
        Expr::constant(c)
    }
}

impl From<&Coefficient> for Expr {
    fn from(c: &Coefficient) -> Self {
        Expr::new(Node::Coefficient(c.clone()))
    }
}

impl From<&Argument> for Expr {
    fn from(a: &Argument) -> Self {
        Expr::new(Node::Argument(a.clone()))
    }
}

macro_rules! binary_ops {
    ($lhs:ty, $rhs:ty) => {
        impl Add<$rhs> for $lhs {
            type Output = Expr;
            fn add(self, rhs: $rhs) -> Expr {
                Expr::new(Node::Sum(self.clone(), rhs.clone()))
            }
        }
        impl Sub<$rhs> for $lhs {
            type Output = Expr;
            fn sub(self, rhs: $rhs) -> Expr {
                Expr::new(Node::Sum(self.clone(), -(rhs.clone())))
            }
        }
        impl Mul<$rhs> for $lhs {
            type Output = Expr;
            fn mul(self, rhs: $rhs) -> Expr {
                Expr::new(Node::Product(self.clone(), rhs.clone()))
            }
        }
    };
}

binary_ops!(Expr, Expr);
binary_ops!(Expr, &Expr);
binary_ops!(&Expr, Expr);
binary_ops!(&Expr, &Expr);

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::new(Node::Product(Expr::constant(-1.0), self))
    }
}

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        -(self.clone())
    }
}

impl Mul<Expr> for f64 {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::new(Node::Product(Expr::constant(self), rhs))
    }
}

impl Mul<&Expr> for f64 {
    type Output = Expr;
    fn mul(self, rhs: &Expr) -> Expr {
        self * rhs.clone()
    }
}

impl Div<f64> for Expr {
    type Output = Expr;
    fn div(self, rhs: f64) -> Expr {
        Expr::new(Node::Product(Expr::constant(1.0 / rhs), self))
    }
}

impl Div<f64> for &Expr {
    type Output = Expr;
    fn div(self, rhs: f64) -> Expr {
        self.clone() / rhs
    }
}

pub fn grad(e: &Expr) -> Expr {
    Expr::new(Node::Grad(e.clone()))
}

pub fn div(e: &Expr) -> Expr {
    Expr::new(Node::Div(e.clone()))
}

pub fn inner(a: &Expr, b: &Expr) -> Expr {
    Expr::new(Node::Inner(a.clone(), b.clone()))
}

pub fn cos(e: &Expr) -> Expr {
    Expr::new(Node::Math(MathFunction::Cos, e.clone()))
}

pub fn sin(e: &Expr) -> Expr {
    Expr::new(Node::Math(MathFunction::Sin, e.clone()))
}

pub fn spatial_coordinate(mesh: &Arc<Mesh>) -> Expr {
    Expr::new(Node::SpatialCoordinate(Arc::clone(mesh)))
}

pub fn facet_normal(mesh: &Arc<Mesh>) -> Expr {
    Expr::new(Node::FacetNormal(Arc::clone(mesh)))
}

pub fn cell_normal(mesh: &Arc<Mesh>) -> Expr {
    Expr::new(Node::CellNormal(Arc::clone(mesh)))
}

/// Entry `k` of a vector-valued expression (`x[0]`, `n[1]`, ...).
pub fn entry(e: &Expr, k: usize) -> Expr {
    Expr::new(Node::Indexed(e.clone(), k))
}

pub fn test_function(space: &FunctionSpace) -> Expr {
    Expr::from(&Argument { space: space.clone(), number: 0 })
}

pub fn trial_function(space: &FunctionSpace) -> Expr {
    Expr::from(&Argument { space: space.clone(), number: 1 })
}

/// Components of a function on a product space. Each component keeps a
/// reference to the unbroken parent function.
pub fn split(f: &Expr) -> Result<Vec<Expr>, FormError> {
    let space = function_space_of(f).ok_or_else(|| FormError::Shape(format!("cannot split {f}")))?;
    Ok((0..space.num_components()).map(|k| Expr::new(Node::Indexed(f.clone(), k))).collect())
}

/// `(e_0 + … + e_{n-1}) / n`
pub fn avg(exprs: &[Expr]) -> Result<Expr, FormError> {
    let sum = sum_all(exprs)?;
    Ok(sum / exprs.len() as f64)
}

/// `Σ u_i n_i`
pub fn jump(values: &[Expr], normals: &[Expr]) -> Result<Expr, FormError> {
    if values.len() != normals.len() {
        return Err(FormError::Shape(format!("jump of {} values with {} normals", values.len(), normals.len())));
    }
    let terms: Vec<Expr> = values.iter().zip(normals).map(|(u, n)| u * n).collect();
    sum_all(&terms)
}

fn sum_all(exprs: &[Expr]) -> Result<Expr, FormError> {
    let (first, rest) = exprs.split_first().ok_or(FormError::EmptySequence)?;
    let mut acc = first.clone();
    for e in rest {
        acc = acc + e;
    }
    acc.rank()?;
    Ok(acc)
}
