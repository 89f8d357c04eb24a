use super::assembly::{argument_spaces, assemble_with_spaces};
use super::bc::{apply_bcs_matrix, constrained_dofs, DirichletBC};
use super::solve::{norm2, solve_linear, LinearSolver};
use super::AssembleError;
use crate::forms::{derivative, Coefficient, Form};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonConfig {
    /// Absolute tolerance on the residual 2-norm.
    pub abs_tol: f64,
    /// Tolerance relative to the initial residual.
    pub rel_tol: f64,
    pub max_iters: usize,
    pub solver: LinearSolver,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        NewtonConfig { abs_tol: 1e-10, rel_tol: 1e-9, max_iters: 25, solver: LinearSolver::Lu }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonReport {
    /// Number of linear solves performed.
    pub iterations: usize,
    /// Residual norm before each iteration and after the last one.
    pub residuals: Vec<f64>,
}

/// Newton's method for `F(u; v) = 0` with the Jacobian taken as the Gateaux
/// derivative of `F` with respect to the whole of `u`. Boundary values are
/// imposed on the initial iterate; corrections vanish on constrained dofs,
/// which are excluded from the residual norm.
pub fn newton_solve(
    form: &Form,
    u: &Coefficient,
    bcs: &[DirichletBC],
    cfg: &NewtonConfig,
) -> Result<NewtonReport, AssembleError> {
    if !(cfg.abs_tol > 0.0 && cfg.rel_tol > 0.0) {
        return Err(AssembleError::InvalidForm("tolerances must be positive".into()));
    }
    let spaces = argument_spaces(form)?;
    if spaces.len() != 1 {
        return Err(AssembleError::InvalidForm(format!("residual must have arity 1, found {}", spaces.len())));
    }
    let jac = derivative(form, u);
    let trial = [spaces[0].clone(), u.space().clone()];
    let fixed = constrained_dofs(bcs);

    u.update(|vals| {
        for bc in bcs {
            for (&d, g) in bc.dofs().iter().zip(bc.values()) {
                vals[d] = g;
            }
        }
    });

    let residual = || -> Result<(Vec<f64>, f64), AssembleError> {
        let mut f = assemble_with_spaces(form, &spaces)?.into_vector().expect("arity 1");
        for &d in &fixed {
            f[d] = 0.0;
        }
        let n = norm2(&f);
        Ok((f, n))
    };

    let (mut f, mut norm) = residual()?;
    let norm0 = norm;
    let mut residuals = vec![norm];
    for it in 0..=cfg.max_iters {
        if norm <= cfg.abs_tol || (it > 0 && norm <= cfg.rel_tol * norm0) {
            return Ok(NewtonReport { iterations: it, residuals });
        }
        if it == cfg.max_iters {
            break;
        }
        let mut a = assemble_with_spaces(&jac, &trial)?.into_matrix().expect("arity 2");
        apply_bcs_matrix(&mut a, bcs);
        let rhs: Vec<f64> = f.iter().map(|v| -v).collect();
        let du = solve_linear(&a, &rhs, cfg.solver)?;
        u.update(|vals| {
            for (v, d) in vals.iter_mut().zip(&du) {
                *v += d;
            }
        });
        (f, norm) = residual()?;
        residuals.push(norm);
    }
    Err(AssembleError::NewtonDiverged { iterations: cfg.max_iters, residual: norm })
}
