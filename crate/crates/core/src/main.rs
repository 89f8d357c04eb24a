use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use multimesh::app::{
    emit_report, parse_list, parse_refinements, run_study, ProblemKind, ReportFormat, SolverChoice, StudyConfig,
};

#[derive(Parser)]
#[command(name = "multimesh", about = "Convergence studies for multi-domain interior penalty problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a convergence study and write a rate table.
    Study {
        #[arg(long, value_enum)]
        problem: ProblemKind,
        #[arg(long, default_value = "1,2", value_parser = parse_list::<usize>)]
        degrees: std::vec::Vec<usize>,
        /// Inclusive range `a..b` or a list.
        #[arg(long, default_value = "0..3", value_parser = parse_refinements)]
        refine: std::vec::Vec<u32>,
        #[arg(long, default_value_t = 100.0)]
        penalty: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
        #[arg(long)]
        dump_matrix: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "lu")]
        solver: SolverChoice,
    },
}

fn main() -> ExitCode {
    let Command::Study { problem, degrees, refine, penalty, out, json, dump_matrix, solver } = Cli::parse().command;
    let cfg = StudyConfig { problem, degrees, refinements: refine, penalty, solver, out, json, dump_matrix };
    let report = match run_study(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    println!("p\tn\tL2\trate\tH1\trate\tseconds");
    for r in &report.rows {
        match &r.error {
            Some(e) => println!("{}\t{}\tfailed: {e}", r.p, r.n),
            None => println!(
                "{}\t{}\t{:.3e}\t{}\t{:.3e}\t{}\t{:.2}",
                r.p,
                r.n,
                r.l2,
                r.rate_l2.map_or("-".into(), |v| format!("{v:.2}")),
                r.h1,
                r.rate_h1.map_or("-".into(), |v| format!("{v:.2}")),
                r.seconds
            ),
        }
    }
    let outputs = [(cfg.out.as_ref(), ReportFormat::Tsv), (cfg.json.as_ref(), ReportFormat::Json)];
    for (path, format) in outputs {
        if let Some(path) = path {
            if let Err(e) = emit_report(&report, format, path) {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
        }
    }
    if report.failed() {
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    }
}
