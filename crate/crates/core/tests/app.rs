use std::path::PathBuf;
use std::process::Command;

use multimesh::app::{emit_report, run_study, ProblemKind, ReportFormat, SolverChoice, StudyConfig, StudyReport};

fn config(problem: ProblemKind, degrees: Vec<usize>, refinements: Vec<u32>) -> StudyConfig {
    StudyConfig { problem, degrees, refinements, ..StudyConfig::default() }
}

fn scratch(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("multimesh-{}-{name}", std::process::id()))
}

fn numbers(report: &StudyReport) -> Vec<(usize, u32, u64, u64)> {
    report.rows.iter().map(|r| (r.p, r.n, r.l2.to_bits(), r.h1.to_bits())).collect()
}

#[test]
fn reruns_are_bit_identical() {
    let cfg = config(ProblemKind::QuadTri, vec![1], vec![0, 1]);
    let (a, b) = (run_study(&cfg).unwrap(), run_study(&cfg).unwrap());
    assert_eq!(numbers(&a), numbers(&b));
    assert!(!a.failed());
}

#[test]
fn coarser_study_is_a_prefix() {
    let long = run_study(&config(ProblemKind::QuadTri, vec![1], vec![0, 1, 2])).unwrap();
    let short = run_study(&config(ProblemKind::QuadTri, vec![1], vec![0, 1])).unwrap();
    assert_eq!(numbers(&short)[..], numbers(&long)[..2]);
    assert_eq!(short.rows[1].rate_l2, long.rows[1].rate_l2);
}

#[test]
fn rates_survive_a_larger_penalty() {
    let base = run_study(&config(ProblemKind::QuadTri, vec![1], vec![1, 2])).unwrap();
    let stiff = run_study(&StudyConfig { penalty: 1000.0, ..config(ProblemKind::QuadTri, vec![1], vec![1, 2]) }).unwrap();
    let (a, b) = (base.row(1, 2).unwrap(), stiff.row(1, 2).unwrap());
    assert!((a.rate_l2.unwrap() - b.rate_l2.unwrap()).abs() < 0.15);
    assert!((a.rate_h1.unwrap() - b.rate_h1.unwrap()).abs() < 0.15);
}

#[test]
fn split_interface_quadratic_rate() {
    let report = run_study(&config(ProblemKind::SplitInterface, vec![2], vec![1, 2])).unwrap();
    let rate = report.row(2, 2).unwrap().rate_l2.unwrap();
    assert!((rate - 3.0).abs() < 0.2, "{rate}");
    let split = run_study(&StudyConfig {
        solver: SolverChoice::CgFieldsplit,
        ..config(ProblemKind::SplitInterface, vec![2], vec![1, 2])
    })
    .unwrap();
    for (a, b) in report.rows.iter().zip(&split.rows) {
        assert!((a.l2 - b.l2).abs() <= 1e-8 * a.l2);
    }
}

#[test]
fn table_rates_are_log_ratios() {
    let report = run_study(&config(ProblemKind::QuadTri, vec![1, 2], vec![0, 1])).unwrap();
    let path = scratch("rates.tsv");
    emit_report(&report, ReportFormat::Tsv, &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    std::fs::remove_file(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "p\tn\tlog2_L2\trate_L2\tlog2_H1\trate_H1\tseconds");
    let rows: Vec<Vec<String>> = lines.map(|l| l.split('\t').map(str::to_owned).collect()).collect();
    assert_eq!(rows.len(), 4);
    for pair in rows.chunks(2) {
        assert_eq!(pair[0][3], "-");
        for col in [2, 4] {
            let coarse: f64 = pair[0][col].parse().unwrap();
            let fine: f64 = pair[1][col].parse().unwrap();
            let rate: f64 = pair[1][col + 1].parse().unwrap();
            assert!((rate - (coarse - fine)).abs() <= 1.5e-4 + 1e-12, "{rate} vs {}", coarse - fine);
        }
    }

    let json = scratch("rates.json");
    emit_report(&report, ReportFormat::Json, &json).unwrap();
    let back: StudyReport = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    std::fs::remove_file(&json).unwrap();
    for (a, b) in back.rows.iter().zip(&report.rows) {
        assert_eq!((a.p, a.n), (b.p, b.n));
        assert!((a.l2 - b.l2).abs() <= 1e-15 * b.l2 && (a.h1 - b.h1).abs() <= 1e-15 * b.h1);
    }
}

#[test]
fn invalid_configurations_are_rejected() {
    assert!(run_study(&config(ProblemKind::QuadTri, vec![], vec![0])).is_err());
    assert!(run_study(&config(ProblemKind::QuadTri, vec![1], vec![4])).is_err());
    assert!(run_study(&StudyConfig { penalty: 0.0, ..StudyConfig::default() }).is_err());
    assert!(run_study(&StudyConfig { solver: SolverChoice::CgFieldsplit, ..StudyConfig::default() }).is_err());
}

#[test]
fn command_line_study() {
    let out = scratch("cli.tsv");
    let matrix = scratch("cli.mtx");
    let status = Command::new(env!("CARGO_BIN_EXE_multimesh"))
        .args(["study", "--problem", "quad-tri", "--degrees", "1", "--refine", "0..1", "--out"])
        .arg(&out)
        .arg("--dump-matrix")
        .arg(&matrix)
        .output()
        .unwrap();
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    assert_eq!(std::fs::read_to_string(&out).unwrap().lines().count(), 3);
    assert!(std::fs::read_to_string(&matrix).unwrap().starts_with("%%MatrixMarket"));
    std::fs::remove_file(&out).unwrap();
    std::fs::remove_file(&matrix).unwrap();

    let bad = Command::new(env!("CARGO_BIN_EXE_multimesh"))
        .args(["study", "--problem", "quad-tri", "--degrees", "7"])
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}
