use crate::forms::MathFunction;

use super::CompileError;

/// One tape instruction. Operands refer to earlier slots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Op {
    /// Constant, stored as its bit pattern so the op stays hashable.
    Const(u64),
    /// Physical quadrature point.
    Coordinate,
    /// Outward unit normal of a facet participant's cell.
    Normal { part: usize, side: usize },
    /// Stored normal of a codim-1 participant.
    CellNormal { part: usize },
    /// Basis of argument block `block` (value or physical gradient).
    Arg { number: usize, block: usize, grad: bool },
    /// Coefficient slot (value or physical gradient).
    Coef { slot: usize, grad: bool },
    Add(usize, usize),
    /// Scalar-times-anything product.
    Mul(usize, usize),
    /// Full contraction of equal shapes.
    Inner(usize, usize),
    /// Entry of a vector.
    Entry(usize, usize),
    /// Trace of a 2×2 matrix.
    Trace(usize),
    Math(MathFunction, usize),
}

/// Static type of a slot: which argument dofs it depends on (local range
/// `(offset, len)` per argument number) and how many value components it has
/// (1 scalar, 2 vector, 4 matrix, row-major).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SlotType {
    pub range: [Option<(usize, usize)>; 2],
    pub comps: usize,
}

impl SlotType {
    pub fn scalar() -> Self {
        SlotType { range: [None, None], comps: 1 }
    }

    pub fn extent(&self, d: usize) -> usize {
        self.range[d].map_or(1, |r| r.1)
    }

    pub fn len(&self) -> usize {
        self.extent(0) * self.extent(1) * self.comps
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn hull(a: Option<(usize, usize)>, b: Option<(usize, usize)>) -> Option<(usize, usize)> {
    match (a, b) {
        (Some((a0, al)), Some((b0, bl))) => {
            let lo = a0.min(b0);
            let hi = (a0 + al).max(b0 + bl);
            Some((lo, hi - lo))
        }
        (x, y) => x.or(y),
    }
}

fn exclusive(a: &SlotType, b: &SlotType) -> Result<[Option<(usize, usize)>; 2], CompileError> {
    let mut out = [None, None];
    for (d, slot) in out.iter_mut().enumerate() {
        *slot = match (a.range[d], b.range[d]) {
            (Some(_), Some(_)) => return Err(CompileError::NotLinear(d)),
            (x, y) => x.or(y),
        };
    }
    Ok(out)
}

/// Type of `op` given its operand types.
pub(crate) fn infer(op: &Op, types: &[SlotType]) -> Result<SlotType, CompileError> {
    let shape = |m: String| Err(CompileError::Shape(m));
    Ok(match *op {
        Op::Add(a, b) => {
            let (ta, tb) = (types[a], types[b]);
            if ta.comps != tb.comps {
                return shape(format!("adding {} and {} components", ta.comps, tb.comps));
            }
            if let Some(d) = (0..2).find(|&d| ta.range[d].is_some() != tb.range[d].is_some()) {
                return Err(CompileError::NotLinear(d));
            }
            SlotType { range: [hull(ta.range[0], tb.range[0]), hull(ta.range[1], tb.range[1])], comps: ta.comps }
        }
        Op::Mul(a, b) => {
            let (ta, tb) = (types[a], types[b]);
            if ta.comps != 1 && tb.comps != 1 {
                return shape("product of two non-scalars".into());
            }
            SlotType { range: exclusive(&ta, &tb)?, comps: ta.comps.max(tb.comps) }
        }
        Op::Inner(a, b) => {
            let (ta, tb) = (types[a], types[b]);
            if ta.comps != tb.comps {
                return shape(format!("inner of {} and {} components", ta.comps, tb.comps));
            }
            SlotType { range: exclusive(&ta, &tb)?, comps: 1 }
        }
        Op::Entry(a, k) => {
            let t = types[a];
            if t.comps != 2 || k >= 2 {
                return shape(format!("entry {k} of a {}-component value", t.comps));
            }
            SlotType { comps: 1, ..t }
        }
        Op::Trace(a) => {
            let t = types[a];
            if t.comps != 4 {
                return shape("trace of a non-matrix".into());
            }
            SlotType { comps: 1, ..t }
        }
        Op::Math(_, a) => {
            let t = types[a];
            if t.comps != 1 {
                return shape("math function of a non-scalar".into());
            }
            if let Some(d) = (0..2).find(|&d| t.range[d].is_some()) {
                return Err(CompileError::NotLinear(d));
            }
            t
        }
        _ => unreachable!("terminal types are assigned by the lowering"),
    })
}

/// Offsets of the `(i, j)` entry of a slot, or `None` outside its range.
#[inline]
fn locate(t: &SlotType, i: usize, j: usize) -> Option<usize> {
    let li = match t.range[0] {
        Some((lo, len)) => {
            if i < lo || i >= lo + len {
                return None;
            }
            i - lo
        }
        None => 0,
    };
    let lj = match t.range[1] {
        Some((lo, len)) => {
            if j < lo || j >= lo + len {
                return None;
            }
            j - lo
        }
        None => 0,
    };
    Some((li * t.extent(1) + lj) * t.comps)
}

fn absolute(t: &SlotType, d: usize) -> std::ops::Range<usize> {
    match t.range[d] {
        Some((lo, len)) => lo..lo + len,
        None => 0..1,
    }
}

/// Evaluates a non-terminal op into `out`.
pub(crate) fn apply(op: &Op, types: &[SlotType], out_type: &SlotType, vals: &[Vec<f64>], out: &mut [f64]) {
    match *op {
        Op::Add(a, b) => {
            out.fill(0.0);
            for (s, ts) in [(a, &types[a]), (b, &types[b])] {
                let src = &vals[s];
                for i in absolute(ts, 0) {
                    for j in absolute(ts, 1) {
                        let so = locate(ts, i, j).expect("inside own range");
                        let oo = locate(out_type, i, j).expect("hull contains operand");
                        for c in 0..out_type.comps {
                            out[oo + c] += src[so + c];
                        }
                    }
                }
            }
        }
        Op::Mul(a, b) | Op::Inner(a, b) => {
            let (ta, tb) = (&types[a], &types[b]);
            let (va, vb) = (&vals[a], &vals[b]);
            let inner = matches!(op, Op::Inner(..));
            for i in absolute(out_type, 0) {
                for j in absolute(out_type, 1) {
                    let oa = locate(ta, i, j).expect("operand range");
                    let ob = locate(tb, i, j).expect("operand range");
                    let oo = locate(out_type, i, j).expect("own range");
                    if inner {
                        let mut s = 0.0;
                        for c in 0..ta.comps {
                            s += va[oa + c] * vb[ob + c];
                        }
                        out[oo] = s;
                    } else if ta.comps == 1 {
                        for c in 0..tb.comps {
                            out[oo + c] = va[oa] * vb[ob + c];
                        }
                    } else {
                        for c in 0..ta.comps {
                            out[oo + c] = va[oa + c] * vb[ob];
                        }
                    }
                }
            }
        }
        Op::Entry(a, k) => {
            let src = &vals[a];
            for (n, o) in out.iter_mut().enumerate() {
                *o = src[n * 2 + k];
            }
        }
        Op::Trace(a) => {
            let src = &vals[a];
            for (n, o) in out.iter_mut().enumerate() {
                *o = src[n * 4] + src[n * 4 + 3];
            }
        }
        Op::Math(f, a) => {
            let x = vals[a][0];
            out[0] = match f {
                MathFunction::Cos => x.cos(),
                MathFunction::Sin => x.sin(),
            };
        }
        _ => unreachable!("terminals are loaded by the kernel"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn add_hulls_disjoint_blocks() {
        let ta = SlotType { range: [Some((0, 2)), None], comps: 1 };
        let tb = SlotType { range: [Some((3, 1)), None], comps: 1 };
        let types = vec![ta, tb];
        let op = Op::Add(0, 1);
        let t = infer(&op, &types).unwrap();
        assert_eq!(t.range[0], Some((0, 4)));
        let mut out = vec![0.0; t.len()];
        apply(&op, &types, &t, &[vec![1.0, 2.0], vec![5.0]], &mut out);
        assert_eq!(out, vec![1.0, 2.0, 0.0, 5.0]);
    }

    #[test]
    fn product_of_two_tests_is_rejected() {
        let ta = SlotType { range: [Some((0, 2)), None], comps: 1 };
        assert_eq!(infer(&Op::Mul(0, 1), &[ta, ta]), Err(CompileError::NotLinear(0)));
    }

    #[test]
    fn inner_forms_outer_product_of_arguments() {
        let tv = SlotType { range: [Some((0, 2)), None], comps: 2 };
        let tu = SlotType { range: [None, Some((0, 3))], comps: 2 };
        let types = vec![tv, tu];
        let t = infer(&Op::Inner(0, 1), &types).unwrap();
        assert_eq!((t.extent(0), t.extent(1), t.comps), (2, 3, 1));
        let v = vec![1.0, 0.0, 0.0, 1.0];
        let u = vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let mut out = vec![0.0; 6];
        apply(&Op::Inner(0, 1), &types, &t, &[v, u], &mut out);
        assert_eq!(out, vec![1.0, 3.0, 5.0, 2.0, 4.0, 6.0]);
    }
}
