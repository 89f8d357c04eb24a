use super::expr::{cos, function_space_of, inner, sin, Expr, MathFunction, Node};
use super::measure::{Form, Integral};
use super::space::{Argument, Coefficient};

/// Gateaux derivative of `F` with respect to the whole coefficient `u`, in
/// the direction of a new trial argument on `u`'s (product) space.
///
/// Every occurrence of `u` is linearized, including occurrences through
/// components obtained by [`split`](super::split). Integrals that do not
/// depend on `u` are dropped.
pub fn derivative(form: &Form, u: &Coefficient) -> Form {
    let du = Expr::from(&Argument { space: u.space().clone(), number: form.arity() });
    linearize(form, |e| gateaux(e, u, &du))
}

/// Derivative with respect to component `k` of `u` only. Summing over all
/// components reproduces [`derivative`].
pub fn component_derivative(form: &Form, u: &Coefficient, k: usize) -> Form {
    let du = Expr::from(&Argument { space: u.space().clone(), number: form.arity() });
    linearize(form, |e| directional(e, u, &du, Some(k)))
}

fn linearize(form: &Form, mut d: impl FnMut(&Expr) -> Option<Expr>) -> Form {
    let integrals = form
        .integrals
        .iter()
        .filter_map(|i| d(&i.integrand).map(|integrand| Integral { integrand, measure: i.measure.clone() }))
        .collect();
    Form { integrals }
}

/// Directional derivative of `e` with respect to `u` along `du`. `None` means
/// the derivative is identically zero.
pub fn gateaux(e: &Expr, u: &Coefficient, du: &Expr) -> Option<Expr> {
    directional(e, u, du, None)
}

fn directional(e: &Expr, u: &Coefficient, du: &Expr, only: Option<usize>) -> Option<Expr> {
    let d = |x: &Expr| directional(x, u, du, only);
    match e.node() {
        Node::Coefficient(c) => {
            if c != u {
                return None;
            }
            match only {
                // unsplit use is component 0 of a single-component space
                Some(k) if k != 0 => None,
                _ => Some(du.clone()),
            }
        }
        Node::Argument(_)
        | Node::SpatialCoordinate(_)
        | Node::FacetNormal(_)
        | Node::CellNormal(_)
        | Node::Constant(_) => None,
        Node::Indexed(inner_e, k) => {
            if let (Some(want), Some(_)) = (only, function_space_of(inner_e)) {
                if want != *k {
                    return None;
                }
                return directional(inner_e, u, du, None).map(|x| Expr::new(Node::Indexed(x, *k)));
            }
            d(inner_e).map(|x| Expr::new(Node::Indexed(x, *k)))
        }
        Node::Grad(a) => d(a).map(|x| Expr::new(Node::Grad(x))),
        Node::Div(a) => d(a).map(|x| Expr::new(Node::Div(x))),
        Node::Restricted(a, s) => d(a).map(|x| x.restricted(*s)),
        Node::Sum(a, b) => match (d(a), d(b)) {
            (Some(x), Some(y)) => Some(x + y),
            (x, y) => x.or(y),
        },
        Node::Product(a, b) => match (d(a), d(b)) {
            (Some(x), Some(y)) => Some(x * b + a * y),
            (Some(x), None) => Some(x * b),
            (None, Some(y)) => Some(a * y),
            (None, None) => None,
        },
        Node::Inner(a, b) => match (d(a), d(b)) {
            (Some(x), Some(y)) => Some(inner(&x, b) + inner(a, &y)),
            (Some(x), None) => Some(inner(&x, b)),
            (None, Some(y)) => Some(inner(a, &y)),
            (None, None) => None,
        },
        Node::Math(f, a) => d(a).map(|x| match f {
            MathFunction::Cos => -(sin(a) * x),
            MathFunction::Sin => cos(a) * x,
        }),
    }
}
