//! Canonical polynomial normal form of integrands. Products are expanded,
//! factors sorted, and `inner` treated as a symmetric bilinear atom, so two
//! integrands compare equal when they agree up to reordering and
//! distribution.

use std::collections::BTreeMap;

use super::expr::{function_space_of, Expr, MathFunction, Node, Side};
use super::measure::Form;

/// Sorted scalar atoms and at most one tensor-valued atom.
pub type Monomial = (Vec<String>, Option<String>);

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Polynomial {
    pub terms: BTreeMap<Monomial, f64>,
}

impl Polynomial {
    fn constant(c: f64) -> Self {
        Self::term(Vec::new(), None, c)
    }

    fn term(scalars: Vec<String>, tensor: Option<String>, c: f64) -> Self {
        let mut p = Polynomial::default();
        p.add_term(scalars, tensor, c);
        p
    }

    fn add_term(&mut self, mut scalars: Vec<String>, tensor: Option<String>, c: f64) {
        if c == 0.0 {
            return;
        }
        scalars.sort();
        *self.terms.entry((scalars, tensor)).or_insert(0.0) += c;
    }

    fn add(mut self, other: Polynomial) -> Self {
        for ((s, t), c) in other.terms {
            self.add_term(s, t, c);
        }
        self
    }

    fn map_monomials(&self, mut f: impl FnMut(&[String], Option<&str>) -> Option<(Vec<String>, Option<String>)>) -> Self {
        let mut out = Polynomial::default();
        for ((s, t), c) in &self.terms {
            if let Some((s2, t2)) = f(s, t.as_deref()) {
                out.add_term(s2, t2, *c);
            }
        }
        out
    }

    fn bilinear(&self, other: &Polynomial, combine: impl Fn(&Monomial, &Monomial) -> Monomial) -> Self {
        let mut out = Polynomial::default();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let (s, t) = combine(ma, mb);
                out.add_term(s, t, ca * cb);
            }
        }
        out
    }

    fn as_constant(&self) -> Option<f64> {
        match self.terms.len() {
            0 => Some(0.0),
            1 => self.terms.get(&(Vec::new(), None)).copied(),
            _ => None,
        }
    }

    /// Deterministic text key with coefficients rounded to 12 digits.
    pub fn key(&self) -> String {
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|((s, t), c)| {
                let mut f = s.clone();
                f.extend(t.clone());
                format!("{c:.12e}*{}", f.join("*"))
            })
            .collect();
        parts.join(" + ")
    }

    /// Entrywise comparison with relative tolerance against the largest
    /// coefficient of either side.
    pub fn approx_eq(&self, other: &Polynomial, rtol: f64) -> bool {
        let scale = self.terms.values().chain(other.terms.values()).fold(0.0_f64, |m, c| m.max(c.abs()));
        let tol = rtol * scale.max(f64::MIN_POSITIVE);
        let keys = self.terms.keys().chain(other.terms.keys());
        keys.into_iter().all(|k| {
            let a = self.terms.get(k).copied().unwrap_or(0.0);
            let b = other.terms.get(k).copied().unwrap_or(0.0);
            (a - b).abs() <= tol
        })
    }
}

pub fn canonical_key(e: &Expr) -> String {
    canonical(e, None).key()
}

/// Sum of canonical integrands per measure.
pub fn canonical_form(form: &Form) -> BTreeMap<String, Polynomial> {
    let mut out: BTreeMap<String, Polynomial> = BTreeMap::new();
    for i in &form.integrals {
        let p = canonical(&i.integrand, None);
        let slot = out.entry(i.measure.key()).or_default();
        *slot = std::mem::take(slot).add(p);
    }
    out
}

/// Whether two forms agree after canonical expansion.
pub fn forms_equivalent(a: &Form, b: &Form) -> bool {
    let (ca, cb) = (canonical_form(a), canonical_form(b));
    let empty = Polynomial::default();
    ca.keys().chain(cb.keys()).all(|k| {
        let pa = ca.get(k).unwrap_or(&empty);
        let pb = cb.get(k).unwrap_or(&empty);
        pa.approx_eq(pb, 1e-12)
    })
}

fn suffix(side: Option<Side>) -> String {
    side.map(|s| format!("('{s}')")).unwrap_or_default()
}

fn atom(e: &Expr, name: String) -> Polynomial {
    if e.rank().unwrap_or(0) == 0 {
        Polynomial::term(vec![name], None, 1.0)
    } else {
        Polynomial::term(vec![], Some(name), 1.0)
    }
}

fn terminal_name(e: &Expr) -> String {
    match e.node() {
        Node::Coefficient(c) => format!("{}#{}", c.name(), c.id()),
        Node::Argument(a) => format!("{a}@{}", a.space.id()),
        Node::Restricted(inner, _) => terminal_name(inner),
        _ => e.to_string(),
    }
}

fn restriction_of(e: &Expr) -> Option<Side> {
    match e.node() {
        Node::Restricted(_, s) => Some(*s),
        _ => None,
    }
}

fn canonical(e: &Expr, side: Option<Side>) -> Polynomial {
    let c = |x: &Expr| canonical(x, side);
    match e.node() {
        Node::Constant(v) => Polynomial::constant(*v),
        Node::Coefficient(_) | Node::Argument(_) => atom(e, format!("{}{}", terminal_name(e), suffix(side))),
        Node::SpatialCoordinate(_) | Node::FacetNormal(_) | Node::CellNormal(_) => {
            atom(e, format!("{e}{}", suffix(side)))
        }
        Node::Indexed(inner, k) if function_space_of(inner).is_some() => {
            let s = restriction_of(inner).or(side);
            atom(e, format!("{}[{k}]{}", terminal_name(inner), suffix(s)))
        }
        Node::Indexed(inner, k) => c(inner).map_monomials(|s, t| match t {
            Some(t) => {
                let mut s = s.to_vec();
                s.push(format!("{t}[{k}]"));
                Some((s, None))
            }
            None => Some((s.to_vec(), Some(format!("[{k}]")))),
        }),
        Node::Restricted(inner, s) => canonical(inner, Some(*s)),
        Node::Sum(a, b) => c(a).add(c(b)),
        Node::Product(a, b) => c(a).bilinear(&c(b), |(sa, ta), (sb, tb)| {
            let mut s = sa.clone();
            s.extend(sb.iter().cloned());
            let t = match (ta, tb) {
                (Some(x), Some(y)) => Some(format!("({x})*({y})")),
                (x, y) => x.clone().or_else(|| y.clone()),
            };
            (s, t)
        }),
        Node::Inner(a, b) => c(a).bilinear(&c(b), |(sa, ta), (sb, tb)| {
            let mut s = sa.clone();
            s.extend(sb.iter().cloned());
            match (ta, tb) {
                (Some(x), Some(y)) => {
                    let (x, y) = if x <= y { (x, y) } else { (y, x) };
                    s.push(format!("inner({x},{y})"));
                    (s, None)
                }
                (x, y) => (s, x.clone().or_else(|| y.clone())),
            }
        }),
        Node::Grad(a) => differential(&c(a), "grad"),
        Node::Div(a) => differential(&c(a), "div"),
        Node::Math(f, a) => {
            let inner = c(a);
            let name = match f {
                MathFunction::Cos => "cos",
                MathFunction::Sin => "sin",
            };
            match inner.as_constant() {
                Some(v) => Polynomial::constant(match f {
                    MathFunction::Cos => v.cos(),
                    MathFunction::Sin => v.sin(),
                }),
                None => Polynomial::term(vec![format!("{name}({})", inner.key())], None, 1.0),
            }
        }
    }
}

/// Linear differential operator applied termwise. Products of several
/// non-constant factors stay opaque.
fn differential(p: &Polynomial, op: &str) -> Polynomial {
    let wrap = |name: String| if op == "div" { (vec![name], None) } else { (vec![], Some(name)) };
    p.map_monomials(|s, t| match (s, t) {
        ([], None) => None,
        ([x], None) => Some(wrap(format!("{op}({x})"))),
        ([], Some(t)) => Some(wrap(format!("{op}({t})"))),
        (s, t) => {
            let mut f = s.to_vec();
            f.extend(t.map(str::to_string));
            Some(wrap(format!("{op}({})", f.join("*"))))
        }
    })
}
