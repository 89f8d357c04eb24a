use faer::prelude::*;
use faer::sparse::{SparseColMat, Triplet};

use super::tensor::CsrMatrix;
use super::AssembleError;

/// Target relative residual of every solve.
pub const SOLVE_RTOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LinearSolver {
    /// Sparse LU with partial pivoting.
    #[default]
    Lu,
    /// Jacobi-preconditioned conjugate gradients (symmetric positive definite
    /// systems only).
    Cg,
}

pub fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn solve_linear(a: &CsrMatrix, b: &[f64], solver: LinearSolver) -> Result<Vec<f64>, AssembleError> {
    if a.nrows != a.ncols || a.nrows != b.len() {
        return Err(AssembleError::Shape(format!("{}x{} system with {} right-hand side entries", a.nrows, a.ncols, b.len())));
    }
    match solver {
        LinearSolver::Lu => sparse_lu(a, b),
        LinearSolver::Cg => conjugate_gradient(a, b, SOLVE_RTOL * 1e-2, 10 * a.nrows.max(1)).map(|(x, _)| x),
    }
}

fn sparse_lu(a: &CsrMatrix, b: &[f64]) -> Result<Vec<f64>, AssembleError> {
    let n = a.nrows;
    if n == 0 {
        return Ok(Vec::new());
    }
    let triplets: Vec<Triplet<usize, usize, f64>> =
        a.triplets().into_iter().map(|(r, c, v)| Triplet::new(r, c, v)).collect();
    let m = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &triplets)
        .map_err(|e| AssembleError::Solver(format!("{e:?}")))?;
    let lu = m.sp_lu().map_err(|_| AssembleError::Singular)?;
    let rhs = Col::from_fn(n, |i| b[i]);
    let x = lu.solve(&rhs);
    let x: Vec<f64> = (0..n).map(|i| x[i]).collect();
    if x.iter().any(|v| !v.is_finite()) {
        return Err(AssembleError::Singular);
    }
    Ok(x)
}

/// Jacobi-preconditioned CG. Returns the solution and iteration count.
pub fn conjugate_gradient(
    a: &CsrMatrix,
    b: &[f64],
    rtol: f64,
    max_iters: usize,
) -> Result<(Vec<f64>, usize), AssembleError> {
    let n = b.len();
    let inv_diag: Vec<f64> = a.diagonal().iter().map(|&d| if d != 0.0 { 1.0 / d } else { 1.0 }).collect();
    let bnorm = norm2(b);
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok((x, 0));
    }
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    for it in 1..=max_iters {
        let ap = a.matvec(&p);
        let pap = dot(&p, &ap);
        if pap <= 0.0 || !pap.is_finite() {
            return Err(AssembleError::Solver("matrix is not positive definite".into()));
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        if norm2(&r) <= rtol * bnorm {
            return Ok((x, it));
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(AssembleError::NotConverged { iterations: max_iters, residual: norm2(&r) / bnorm })
}
