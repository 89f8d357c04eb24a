use super::bc::{apply_bcs_matrix, apply_bcs_vector, DirichletBC};
use super::iteration::iteration_set;
use super::tensor::{CsrMatrix, GlobalTensor};
use super::AssembleError;
use crate::compile::{compile_integral, execute_kernel};
use crate::forms::{validate_form, Form, FunctionSpace, Node};

/// Argument spaces of a form, by argument number.
pub fn argument_spaces(form: &Form) -> Result<Vec<FunctionSpace>, AssembleError> {
    let mut spaces: Vec<Option<FunctionSpace>> = vec![None, None];
    let mut conflict = None;
    for i in &form.integrals {
        i.integrand.visit(&mut |e| {
            if let Node::Argument(a) = e.node() {
                if a.number >= spaces.len() {
                    conflict = Some(format!("argument number {}", a.number));
                    return;
                }
                match &spaces[a.number] {
                    Some(s) if *s != a.space => conflict = Some(format!("argument {} on two spaces", a.number)),
                    _ => spaces[a.number] = Some(a.space.clone()),
                }
            }
        });
    }
    if let Some(c) = conflict {
        return Err(AssembleError::InvalidForm(c));
    }
    let n = spaces.iter().take_while(|s| s.is_some()).count();
    if spaces[n..].iter().any(Option::is_some) {
        return Err(AssembleError::InvalidForm("trial argument without test argument".into()));
    }
    Ok(spaces.into_iter().flatten().collect())
}

/// Assembles a form and applies Dirichlet conditions: matrix rows of
/// constrained dofs become identity rows, vector entries take the boundary
/// values.
pub fn assemble(form: &Form, bcs: &[DirichletBC]) -> Result<GlobalTensor, AssembleError> {
    let spaces = argument_spaces(form)?;
    let mut t = assemble_with_spaces(form, &spaces)?;
    match &mut t {
        GlobalTensor::Matrix(a) => apply_bcs_matrix(a, bcs),
        GlobalTensor::Vector(b) => apply_bcs_vector(b, bcs, true),
        GlobalTensor::Scalar(_) => {}
    }
    Ok(t)
}

/// Assembles without boundary conditions into tensors sized by `spaces`
/// (one per argument). Integrals are visited in order and entities in
/// ascending index, so the result is bit-reproducible.
pub fn assemble_with_spaces(form: &Form, spaces: &[FunctionSpace]) -> Result<GlobalTensor, AssembleError> {
    validate_form(form).map_err(|d| AssembleError::InvalidForm(d.to_string()))?;
    let arity = spaces.len();
    if arity > 2 {
        return Err(AssembleError::InvalidForm(format!("arity {arity}")));
    }
    let mut scalar = 0.0;
    let mut vector = if arity == 1 { vec![0.0; spaces[0].num_dofs()] } else { Vec::new() };
    let mut triplets = Vec::new();

    for integral in &form.integrals {
        let kernel = compile_integral(integral)?;
        if kernel.arity != arity {
            return Err(AssembleError::InvalidForm(format!(
                "integral of arity {} in a form of arity {arity}",
                kernel.arity
            )));
        }
        for (k, s) in kernel.arg_spaces.iter().zip(spaces) {
            if k != s {
                return Err(AssembleError::InvalidForm("argument space differs from the requested space".into()));
            }
        }
        let entities = iteration_set(&integral.measure)?;
        if entities.is_empty() {
            log::warn!("empty iteration set for {:?}", integral.measure);
            continue;
        }
        let coefficient_values = kernel.snapshot_coefficients();
        for entity in &entities {
            let inputs = kernel.pack(&entity.binding, &coefficient_values);
            let t = execute_kernel(&kernel, &inputs)?;
            let dofs = kernel.global_dofs(&entity.binding);
            match arity {
                0 => scalar += t[0],
                1 => {
                    for (i, &d) in dofs[0].iter().enumerate() {
                        vector[d] += t[i];
                    }
                }
                _ => {
                    let n1 = dofs[1].len();
                    for (i, &r) in dofs[0].iter().enumerate() {
                        for (j, &c) in dofs[1].iter().enumerate() {
                            triplets.push((r, c, t[i * n1 + j]));
                        }
                    }
                }
            }
        }
    }
    Ok(match arity {
        0 => GlobalTensor::Scalar(scalar),
        1 => GlobalTensor::Vector(vector),
        _ => GlobalTensor::Matrix(CsrMatrix::from_triplets(spaces[0].num_dofs(), spaces[1].num_dofs(), triplets)),
    })
}

pub fn assemble_matrix(form: &Form, test: &FunctionSpace, trial: &FunctionSpace) -> Result<CsrMatrix, AssembleError> {
    Ok(assemble_with_spaces(form, &[test.clone(), trial.clone()])?.into_matrix().expect("arity 2"))
}

pub fn assemble_vector(form: &Form, test: &FunctionSpace) -> Result<Vec<f64>, AssembleError> {
    Ok(assemble_with_spaces(form, std::slice::from_ref(test))?.into_vector().expect("arity 1"))
}

pub fn assemble_scalar(form: &Form) -> Result<f64, AssembleError> {
    Ok(assemble_with_spaces(form, &[])?.into_scalar().expect("arity 0"))
}
