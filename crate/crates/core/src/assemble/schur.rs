use std::collections::BTreeMap;
use std::ops::Range;

use nalgebra::{DMatrix, DVector, LU};

use super::tensor::CsrMatrix;
use super::AssembleError;

/// System left after eliminating a contiguous block of unknowns `m`:
/// `S = A_kk − A_km A_mm⁻¹ A_mk`, `g = b_k − A_km A_mm⁻¹ b_m`.
/// Kept unknowns stay in ascending global order.
#[derive(Debug, Clone)]
pub struct ReducedSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    /// Global index of each kept unknown.
    pub kept: Vec<usize>,
    pub eliminated: Range<usize>,
    lu: LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    /// Rows of `[A_mk | b_m]` restricted to the eliminated block.
    a_mk: CsrMatrix,
    b_m: Vec<f64>,
}

impl ReducedSystem {
    /// Full solution from the kept unknowns: `u_m = A_mm⁻¹ (b_m − A_mk u_k)`.
    pub fn recover(&self, u_k: &[f64]) -> Vec<f64> {
        let n = self.kept.len() + self.eliminated.len();
        let mut full = vec![0.0; n];
        for (&g, &v) in self.kept.iter().zip(u_k) {
            full[g] = v;
        }
        let r = self.a_mk.matvec(&full);
        let rhs = DVector::from_iterator(self.b_m.len(), self.b_m.iter().zip(&r).map(|(b, r)| b - r));
        let u_m = self.lu.solve(&rhs).expect("factorization checked at elimination");
        for (i, g) in self.eliminated.clone().enumerate() {
            full[g] = u_m[i];
        }
        full
    }
}

/// Eliminates the unknowns in `m` (typically one component range of a product
/// space). The eliminated block is factorized densely, so it should be small.
pub fn eliminate_component(a: &CsrMatrix, b: &[f64], m: Range<usize>) -> Result<ReducedSystem, AssembleError> {
    let n = a.nrows;
    if a.ncols != n || b.len() != n || m.end > n || m.is_empty() {
        return Err(AssembleError::Shape(format!("cannot eliminate {m:?} from a {}x{} system", a.nrows, a.ncols)));
    }
    let nm = m.len();
    let kept: Vec<usize> = (0..n).filter(|i| !m.contains(i)).collect();
    let mut reduced_index = vec![usize::MAX; n];
    for (i, &g) in kept.iter().enumerate() {
        reduced_index[g] = i;
    }

    let mut a_mm = DMatrix::<f64>::zeros(nm, nm);
    let mut a_mk = Vec::new();
    for (i, r) in m.clone().enumerate() {
        for (c, v) in a.row(r) {
            if m.contains(&c) {
                a_mm[(i, c - m.start)] += v;
            } else {
                a_mk.push((i, c, v));
            }
        }
    }
    let a_mk = CsrMatrix::from_triplets(nm, n, a_mk);
    let lu = a_mm.lu();
    if !lu.is_invertible() {
        return Err(AssembleError::Singular);
    }

    // Columns touched by A_mk and their solves X[:, j] = A_mm⁻¹ A_mk[:, j].
    let mut columns: BTreeMap<usize, DVector<f64>> = BTreeMap::new();
    for (i, c, v) in a_mk.triplets() {
        columns.entry(c).or_insert_with(|| DVector::zeros(nm))[i] += v;
    }
    for col in columns.values_mut() {
        *col = lu.solve(col).ok_or(AssembleError::Singular)?;
    }
    let b_m: Vec<f64> = b[m.clone()].to_vec();
    let y = lu.solve(&DVector::from_column_slice(&b_m)).ok_or(AssembleError::Singular)?;

    let mut triplets = Vec::new();
    let mut rhs: Vec<f64> = kept.iter().map(|&g| b[g]).collect();
    for (i, &r) in kept.iter().enumerate() {
        let mut coupling = Vec::new();
        for (c, v) in a.row(r) {
            if m.contains(&c) {
                coupling.push((c - m.start, v));
            } else {
                triplets.push((i, reduced_index[c], v));
            }
        }
        if coupling.is_empty() {
            continue;
        }
        for (&j, x) in &columns {
            let s: f64 = coupling.iter().map(|&(k, v)| v * x[k]).sum();
            triplets.push((i, reduced_index[j], -s));
        }
        rhs[i] -= coupling.iter().map(|&(k, v)| v * y[k]).sum::<f64>();
    }
    let nk = kept.len();
    Ok(ReducedSystem {
        matrix: CsrMatrix::from_triplets(nk, nk, triplets),
        rhs,
        kept,
        eliminated: m,
        lu,
        a_mk,
        b_m,
    })
}
