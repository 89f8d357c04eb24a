use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::problems::{exact_solution, quad_tri_problem, split_interface_problem, Problem};
use super::AppError;
use crate::assemble::{
    apply_bcs_matrix, apply_bcs_symmetric, assemble_with_spaces, conjugate_gradient, eliminate_component,
    error_norms, newton_solve, CsrMatrix, ErrorNorms, NewtonConfig, SOLVE_RTOL,
};
use crate::forms::derivative;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemKind {
    QuadTri,
    SplitInterface,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SolverChoice {
    /// Newton with sparse LU on the monolithic system.
    #[default]
    Lu,
    /// Eliminate the interface block, then Jacobi CG on the reduced system.
    CgFieldsplit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Tsv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub problem: ProblemKind,
    pub degrees: Vec<usize>,
    pub refinements: Vec<u32>,
    pub penalty: f64,
    pub solver: SolverChoice,
    pub out: Option<PathBuf>,
    pub json: Option<PathBuf>,
    /// Written with the Jacobian of every completed cell; the last one wins.
    pub dump_matrix: Option<PathBuf>,
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig {
            problem: ProblemKind::QuadTri,
            degrees: vec![1, 2],
            refinements: vec![0, 1, 2, 3],
            penalty: 100.0,
            solver: SolverChoice::Lu,
            out: None,
            json: None,
            dump_matrix: None,
        }
    }
}

impl StudyConfig {
    pub fn validate(&self) -> Result<(), AppError> {
        if self.degrees.is_empty() || self.refinements.is_empty() {
            return Err(AppError::Config("degree and refinement lists must be non-empty".into()));
        }
        if let Some(p) = self.degrees.iter().find(|p| !(1..=3).contains(*p)) {
            return Err(AppError::Config(format!("degree {p} outside 1..=3")));
        }
        if let Some(n) = self.refinements.iter().find(|n| **n > 3) {
            return Err(AppError::Config(format!("refinement {n} outside 0..=3")));
        }
        if !(self.penalty > 0.0 && self.penalty.is_finite()) {
            return Err(AppError::Config(format!("penalty {} must be positive", self.penalty)));
        }
        if self.solver == SolverChoice::CgFieldsplit && self.problem != ProblemKind::SplitInterface {
            return Err(AppError::Config("cg-fieldsplit needs the split-interface problem".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyRow {
    pub p: usize,
    pub n: u32,
    pub l2: f64,
    pub h1: f64,
    pub log2_l2: f64,
    pub log2_h1: f64,
    /// `log2(e_{n-1} / e_n)`, present when level `n-1` precedes in the study.
    pub rate_l2: Option<f64>,
    pub rate_h1: Option<f64>,
    pub seconds: f64,
    pub newton_iterations: Option<usize>,
    /// `‖A − Aᵀ‖_max / ‖A‖_max` of the bulk operator.
    pub symmetry_defect: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub problem: ProblemKind,
    pub penalty: f64,
    pub rows: Vec<StudyRow>,
    pub wall_seconds: f64,
}

impl StudyReport {
    pub fn failed(&self) -> bool {
        self.rows.iter().any(|r| r.error.is_some())
    }

    pub fn row(&self, p: usize, n: u32) -> Option<&StudyRow> {
        self.rows.iter().find(|r| r.p == p && r.n == n)
    }
}

/// Parses `1,2,3`.
pub fn parse_list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>, String> {
    s.split(',').map(|t| t.trim().parse().map_err(|_| format!("bad list entry {t:?}"))).collect()
}

/// Parses `0..3` (inclusive) or a list `0,2`.
pub fn parse_refinements(s: &str) -> Result<Vec<u32>, String> {
    match s.split_once("..") {
        Some((a, b)) => {
            let a: u32 = a.trim().parse().map_err(|_| format!("bad range {s:?}"))?;
            let b: u32 = b.trim().trim_start_matches('=').parse().map_err(|_| format!("bad range {s:?}"))?;
            if a > b {
                return Err(format!("empty range {s:?}"));
            }
            Ok((a..=b).collect())
        }
        None => parse_list(s),
    }
}

/// `‖A − Aᵀ‖_max / ‖A‖_max`
pub fn symmetry_defect(a: &CsrMatrix) -> f64 {
    let scale = a.max_abs();
    if scale == 0.0 {
        return 0.0;
    }
    a.max_abs_diff(&a.transpose()) / scale
}

/// Solution data of one study cell.
#[derive(Debug, Clone)]
pub struct CellOutcome {
    pub norms: ErrorNorms,
    pub newton_iterations: Option<usize>,
    pub jacobian: CsrMatrix,
    /// Of the Jacobian, or of its Schur complement when an interface
    /// component is present.
    pub symmetry_defect: f64,
}

/// Solves a benchmark problem in place and measures its error. The
/// returned Jacobian carries no boundary conditions.
pub fn solve_problem(problem: &Problem, solver: SolverChoice) -> Result<CellOutcome, AppError> {
    let jac_form = derivative(&problem.residual, &problem.u);
    let spaces = [problem.space.clone(), problem.space.clone()];
    let newton_iterations = match solver {
        SolverChoice::Lu => {
            let report = newton_solve(&problem.residual, &problem.u, &problem.bcs, &NewtonConfig::default())?;
            Some(report.iterations)
        }
        SolverChoice::CgFieldsplit => {
            solve_fieldsplit(problem, &jac_form)?;
            None
        }
    };
    let jacobian = assemble_with_spaces(&jac_form, &spaces)?.into_matrix().expect("arity 2");
    let parts = problem
        .bulk
        .iter()
        .map(|&k| error_norms(&problem.u, k, exact_solution))
        .collect::<Result<Vec<_>, _>>()?;
    let symmetry = if problem.space.num_components() == 3 {
        let zero = vec![0.0; jacobian.nrows];
        symmetry_defect(&eliminate_component(&jacobian, &zero, problem.space.component_range(1))?.matrix)
    } else {
        symmetry_defect(&jacobian)
    };
    Ok(CellOutcome { norms: ErrorNorms::combine(&parts), newton_iterations, jacobian, symmetry_defect: symmetry })
}

/// One linear step from zero: symmetric boundary conditions, elimination of
/// the auxiliary interface block, Jacobi CG on the reduced system.
fn solve_fieldsplit(problem: &Problem, jac_form: &crate::forms::Form) -> Result<(), AppError> {
    let spaces = [problem.space.clone(), problem.space.clone()];
    problem.u.set_values(&vec![0.0; problem.space.num_dofs()]);
    let mut a = assemble_with_spaces(jac_form, &spaces)?.into_matrix().expect("arity 2");
    let f = assemble_with_spaces(&problem.residual, &spaces[..1])?.into_vector().expect("arity 1");
    let mut b: Vec<f64> = f.iter().map(|v| -v).collect();
    apply_bcs_symmetric(&mut a, &mut b, &problem.bcs);
    let interface = problem.space.component_range(1);
    let reduced = eliminate_component(&a, &b, interface)?;
    let n = reduced.rhs.len();
    let (x, _) = conjugate_gradient(&reduced.matrix, &reduced.rhs, SOLVE_RTOL * 1e-2, 10 * n.max(1))?;
    problem.u.set_values(&reduced.recover(&x));
    Ok(())
}

fn run_cell(cfg: &StudyConfig, p: usize, n: u32) -> Result<CellOutcome, AppError> {
    let problem = match cfg.problem {
        ProblemKind::QuadTri => quad_tri_problem(p, n, cfg.penalty)?,
        ProblemKind::SplitInterface => split_interface_problem(p, n, cfg.penalty)?,
    };
    let outcome = solve_problem(&problem, cfg.solver)?;
    if let Some(path) = &cfg.dump_matrix {
        let mut a = outcome.jacobian.clone();
        apply_bcs_matrix(&mut a, &problem.bcs);
        std::fs::write(path, a.to_matrix_market())?;
    }
    Ok(outcome)
}

/// Runs every (p, n) cell. A failing cell is recorded and the study goes on.
pub fn run_study(cfg: &StudyConfig) -> Result<StudyReport, AppError> {
    cfg.validate()?;
    let start = Instant::now();
    let mut levels = cfg.refinements.clone();
    levels.sort_unstable();
    levels.dedup();
    let mut rows: Vec<StudyRow> = Vec::new();
    for &p in &cfg.degrees {
        for &n in &levels {
            let t0 = Instant::now();
            let result = run_cell(cfg, p, n);
            let seconds = t0.elapsed().as_secs_f64();
            let row = match result {
                Ok(o) => StudyRow {
                    p,
                    n,
                    l2: o.norms.l2,
                    h1: o.norms.h1,
                    log2_l2: o.norms.l2.log2(),
                    log2_h1: o.norms.h1.log2(),
                    rate_l2: None,
                    rate_h1: None,
                    seconds,
                    newton_iterations: o.newton_iterations,
                    symmetry_defect: o.symmetry_defect,
                    error: None,
                },
                Err(e) => {
                    log::error!("p={p} n={n}: {e}");
                    StudyRow {
                        p,
                        n,
                        l2: f64::NAN,
                        h1: f64::NAN,
                        log2_l2: f64::NAN,
                        log2_h1: f64::NAN,
                        rate_l2: None,
                        rate_h1: None,
                        seconds,
                        newton_iterations: None,
                        symmetry_defect: f64::NAN,
                        error: Some(e.to_string()),
                    }
                }
            };
            rows.push(row);
        }
    }
    fill_rates(&mut rows);
    Ok(StudyReport { problem: cfg.problem, penalty: cfg.penalty, rows, wall_seconds: start.elapsed().as_secs_f64() })
}

fn fill_rates(rows: &mut [StudyRow]) {
    for i in 1..rows.len() {
        let (prev, cur) = (&rows[i - 1], &rows[i]);
        if prev.p != cur.p || prev.n + 1 != cur.n || prev.error.is_some() || cur.error.is_some() {
            continue;
        }
        let rate_l2 = prev.log2_l2 - cur.log2_l2;
        let rate_h1 = prev.log2_h1 - cur.log2_h1;
        rows[i].rate_l2 = Some(rate_l2);
        rows[i].rate_h1 = Some(rate_h1);
    }
}

pub fn run_quad_tri_study(cfg: &StudyConfig) -> Result<StudyReport, AppError> {
    run_study(&StudyConfig { problem: ProblemKind::QuadTri, ..cfg.clone() })
}

pub fn run_split_interface_study(cfg: &StudyConfig) -> Result<StudyReport, AppError> {
    run_study(&StudyConfig { problem: ProblemKind::SplitInterface, ..cfg.clone() })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |v| format!("{v:.4}"))
}

fn to_tsv(report: &StudyReport) -> String {
    let mut s = String::from("p\tn\tlog2_L2\trate_L2\tlog2_H1\trate_H1\tseconds\n");
    for r in &report.rows {
        let _ = writeln!(
            s,
            "{}\t{}\t{:.4}\t{}\t{:.4}\t{}\t{:.3}",
            r.p,
            r.n,
            r.log2_l2,
            fmt_opt(r.rate_l2),
            r.log2_h1,
            fmt_opt(r.rate_h1),
            r.seconds
        );
    }
    s
}

pub fn emit_report(report: &StudyReport, format: ReportFormat, path: &Path) -> Result<(), AppError> {
    let text = match format {
        ReportFormat::Tsv => to_tsv(report),
        ReportFormat::Json => serde_json::to_string_pretty(report)?,
    };
    std::fs::write(path, text)?;
    Ok(())
}
