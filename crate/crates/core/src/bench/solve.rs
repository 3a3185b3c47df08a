use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::DeflationEvent;
use crate::precond::PrecondSpec;
use crate::problems::{build_rhs, generate, read_matrix_market, write_vector, ProblemSpec, Rhs};
use crate::solver::{mp_solve, Selection, SolveReport, SolverConfig};
use crate::SparseMatrix;

/// Everything a single `solve` run needs.
#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub problem: Option<ProblemSpec>,
    pub matrix: Option<PathBuf>,
    pub rhs: Option<Rhs>,
    pub preconds: Vec<PrecondSpec>,
    pub config: SolverConfig,
    /// JSON convergence history.
    pub history: Option<PathBuf>,
    /// Two-column `iteration residual` text file.
    pub plot: Option<PathBuf>,
    /// Solution vector in Matrix Market array format.
    pub out: Option<PathBuf>,
}

/// The JSON history written by `solve --history`.
#[derive(Debug, Clone, Serialize)]
pub struct HistoryRecord {
    pub variant: String,
    pub preconds: Vec<String>,
    pub alpha: Option<Vec<f64>>,
    pub ordering: String,
    pub residuals: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub stagnated: bool,
    pub deflations: Vec<DeflationEvent>,
    pub basis_columns: Vec<usize>,
    pub true_residual: f64,
    pub wall_time: f64,
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub report: SolveReport,
    pub record: HistoryRecord,
    pub summary: String,
}

/// Parses `lincomb`, `columns`, `columns:s1,s2,...` (one-based selectors) or
/// `random`.
pub fn parse_selection(s: &str, seed: u64) -> Result<Selection> {
    let s = s.trim();
    match s {
        "lincomb" => return Ok(Selection::LinComb),
        "columns" => return Ok(Selection::Columns(Vec::new())),
        "random" => return Ok(Selection::RandomColumns { seed }),
        _ => {}
    }
    if let Some(list) = s.strip_prefix("columns:") {
        let selectors = list
            .split(',')
            .map(|t| match t.trim().parse::<usize>() {
                Ok(v) if v >= 1 => Ok(v - 1),
                _ => Err(Error::usage(format!(
                    "selectors are one-based integers, got '{t}'"
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        return Ok(Selection::Columns(selectors));
    }
    Err(Error::usage(format!(
        "selection must be lincomb, columns[:s1,s2,...] or random, got '{s}'"
    )))
}

/// A single value `a` means weights `(a, 1 - a)` for two preconditioners;
/// a comma list gives the weights directly.
pub fn parse_alpha(s: &str, num_preconds: usize) -> Result<Vec<f64>> {
    let values = s
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::usage(format!("alpha '{t}' is not a number")))
        })
        .collect::<Result<Vec<_>>>()?;
    if values.iter().any(|&a| !(a > 0.0 && a < 1.0)) {
        return Err(Error::usage("alpha must lie in (0,1)"));
    }
    if values.len() == 1 {
        if num_preconds != 2 {
            return Err(Error::usage(
                "a single alpha needs exactly two preconditioners; pass one weight per preconditioner",
            ));
        }
        return Ok(vec![values[0], 1.0 - values[0]]);
    }
    Ok(values)
}

/// Matrix and right-hand side from either a generator spec or a file.
pub fn load_system(
    problem: Option<&ProblemSpec>,
    matrix: Option<&Path>,
    rhs: Option<&Rhs>,
) -> Result<(SparseMatrix, Vec<f64>)> {
    match (problem, matrix) {
        (Some(_), Some(_)) => Err(Error::usage("give either --problem or --matrix, not both")),
        (None, None) => Err(Error::usage("one of --problem or --matrix is required")),
        (Some(spec), None) => {
            let mut spec = spec.clone();
            if let Some(rhs) = rhs {
                spec.rhs = rhs.clone();
            }
            generate(&spec)
        }
        (None, Some(path)) => {
            let a = read_matrix_market(path)?;
            let b = build_rhs(rhs.unwrap_or(&Rhs::Ones), a.n())?;
            Ok((a, b))
        }
    }
}

/// Runs one solve and writes the requested artifacts.
pub fn run_solve(opts: &SolveOptions) -> Result<SolveOutcome> {
    let (a, b) = load_system(opts.problem.as_ref(), opts.matrix.as_deref(), opts.rhs.as_ref())?;
    opts.config.validate(opts.preconds.len())?;
    let preconds = opts
        .preconds
        .iter()
        .map(|p| p.build(&a))
        .collect::<Result<Vec<_>>>()?;
    let report = mp_solve(&a, &b, None, &preconds, &opts.config)?;

    let record = HistoryRecord {
        variant: report.variant.to_string(),
        preconds: opts.preconds.iter().map(ToString::to_string).collect(),
        alpha: opts.config.alpha.clone(),
        ordering: opts.config.ordering.name(),
        residuals: report.residual_history.clone(),
        iterations: report.iterations,
        converged: report.converged,
        stagnated: report.stagnated,
        deflations: report.deflation_events.clone(),
        basis_columns: report.basis_columns_history.clone(),
        true_residual: report.true_residual,
        wall_time: report.wall_time,
    };
    if let Some(path) = &opts.history {
        let json =
            serde_json::to_string_pretty(&record).map_err(|e| Error::Internal(format!("json: {e}")))?;
        fs::write(path, json + "\n").map_err(|e| Error::io(path, e))?;
    }
    if let Some(path) = &opts.plot {
        write_history_plot_data(&report, path)?;
    }
    if let Some(path) = &opts.out {
        write_vector(&report.final_x, path)?;
    }

    let summary = summary_line(&report, &record);
    Ok(SolveOutcome {
        report,
        record,
        summary,
    })
}

fn summary_line(report: &SolveReport, record: &HistoryRecord) -> String {
    let status = if report.converged {
        "converged"
    } else if report.stagnated {
        "stagnated"
    } else {
        "reached maxit"
    };
    let mut s = format!(
        "{} [{}] {status} after {} iterations: relres {:.3e}, true {:.3e}, {} columns, {:.3}s",
        record.variant,
        record.preconds.join(","),
        report.iterations,
        report.final_residual(),
        report.true_residual,
        report.basis_columns_history.last().copied().unwrap_or(0),
        report.wall_time,
    );
    if report.residual_mismatch {
        s.push_str(" (warning: true residual disagrees with the estimate)");
    }
    s
}

/// Process exit status for a finished solve: 0 converged, 2 otherwise.
pub fn exit_code(report: &SolveReport) -> i32 {
    if report.converged {
        0
    } else {
        2
    }
}

/// Writes `iteration residual` pairs, one per line, with round-trip exact
/// values.
pub fn write_history_plot_data(report: &SolveReport, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if report.residual_history.is_empty() {
        return Err(Error::usage("residual history is empty"));
    }
    let mut out = String::new();
    for (i, r) in report.residual_history.iter().enumerate() {
        let _ = writeln!(out, "{i} {r:?}");
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn read_history_plot_data(path: impl AsRef<Path>) -> Result<Vec<(usize, f64)>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(ln, l)| {
            let bad = || Error::Parse {
                line: ln + 1,
                message: format!("expected 'iteration value', got '{l}'"),
            };
            let (i, v) = l.trim().split_once(' ').ok_or_else(bad)?;
            Ok((
                i.parse().map_err(|_| bad())?,
                v.trim().parse().map_err(|_| bad())?,
            ))
        })
        .collect()
}
