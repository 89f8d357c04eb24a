use std::collections::BTreeMap;

use super::expr::{Expr, MathFunction, Node};
use super::measure::{Form, Integral};

/// `(test component, trial component)`; the trial part is `None` for
/// linear forms. Functionals use `(0, None)`.
pub type BlockKey = (usize, Option<usize>);

/// Splits a form into blocks by the argument components each term touches.
/// Within an integrand every argument component other than the selected one
/// is replaced by zero and the tree is pruned.
pub fn split_form_into_blocks(form: &Form) -> BTreeMap<BlockKey, Form> {
    let mut out: BTreeMap<BlockKey, Form> = BTreeMap::new();
    for integral in &form.integrals {
        let touched = integral.integrand.argument_components();
        let comps = |n: usize| -> Vec<usize> {
            touched.iter().filter(|(num, _)| *num == n).map(|(_, c)| *c).collect()
        };
        let keys: Vec<(BlockKey, Vec<(usize, usize)>)> = match integral.integrand.argument_numbers().len() {
            0 => vec![((0, None), vec![])],
            1 => comps(0).into_iter().map(|r| ((r, None), vec![(0, r)])).collect(),
            _ => {
                let cs = comps(1);
                comps(0)
                    .into_iter()
                    .flat_map(|r| cs.iter().map(move |&c| ((r, Some(c)), vec![(0, r), (1, c)])))
                    .collect()
            }
        };
        for (key, select) in keys {
            if let Some(integrand) = restrict_to_components(&integral.integrand, &select) {
                out.entry(key)
                    .or_default()
                    .integrals
                    .push(Integral { integrand, measure: integral.measure.clone() });
            }
        }
    }
    out
}

/// Keeps only component `c` of argument `n` for every `(n, c)` in `select`.
/// Returns `None` when the result is identically zero.
pub fn restrict_to_components(e: &Expr, select: &[(usize, usize)]) -> Option<Expr> {
    let keep = |number: usize, comp: usize| select.iter().all(|&(n, c)| n != number || c == comp);
    let r = |x: &Expr| restrict_to_components(x, select);
    match e.node() {
        Node::Argument(a) => keep(a.number, 0).then(|| e.clone()),
        Node::Indexed(inner, k) => {
            if let Some(number) = argument_number(inner) {
                return keep(number, *k).then(|| e.clone());
            }
            r(inner).map(|x| Expr::new(Node::Indexed(x, *k)))
        }
        Node::Coefficient(_)
        | Node::SpatialCoordinate(_)
        | Node::FacetNormal(_)
        | Node::CellNormal(_)
        | Node::Constant(_) => Some(e.clone()),
        Node::Grad(a) => r(a).map(|x| Expr::new(Node::Grad(x))),
        Node::Div(a) => r(a).map(|x| Expr::new(Node::Div(x))),
        Node::Restricted(a, s) => r(a).map(|x| x.restricted(*s)),
        Node::Sum(a, b) => match (r(a), r(b)) {
            (Some(x), Some(y)) => Some(x + y),
            (x, y) => x.or(y),
        },
        Node::Product(a, b) => Some(r(a)? * r(b)?),
        Node::Inner(a, b) => Some(super::expr::inner(&r(a)?, &r(b)?)),
        Node::Math(f, a) => match (f, r(a)) {
            (_, Some(x)) => Some(Expr::new(Node::Math(*f, x))),
            (MathFunction::Cos, None) => Some(Expr::constant(1.0)),
            (MathFunction::Sin, None) => None,
        },
    }
}

fn argument_number(e: &Expr) -> Option<usize> {
    match e.node() {
        Node::Argument(a) => Some(a.number),
        Node::Restricted(inner, _) => argument_number(inner),
        _ => None,
    }
}
