//! The alpha/ordering sweep: for each problem, both preconditioners alone
//! under FGMRES, then selective MPGMRES with weighted linear combinations for
//! every alpha and requested ordering.

use rayon::prelude::*;

use super::table::{render_csv, render_markdown, Count, SweepRow, TableHeader};
use crate::error::{Error, Result};
use crate::precond::{PrecondSpec, Preconditioner};
use crate::problems::{generate, ProblemSpec};
use crate::solver::{mp_solve, Ordering, Selection, SolverConfig, Variant};
use crate::SparseMatrix;

pub const DEFAULT_ALPHAS: [f64; 5] = [0.9, 0.7, 0.5, 0.3, 0.1];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orderings {
    Forward,
    Reverse,
    Both,
}

impl Orderings {
    fn includes(self, reverse: bool) -> bool {
        matches!(
            (self, reverse),
            (Orderings::Both, _) | (Orderings::Forward, false) | (Orderings::Reverse, true)
        )
    }
}

impl std::str::FromStr for Orderings {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "forward" => Ok(Orderings::Forward),
            "reverse" => Ok(Orderings::Reverse),
            "both" => Ok(Orderings::Both),
            other => Err(Error::usage(format!(
                "ordering must be forward, reverse or both, got '{other}'"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPlan {
    /// One table row per problem.
    pub problems: Vec<ProblemSpec>,
    pub pair: [PrecondSpec; 2],
    /// Weights on the leading preconditioner, in column order.
    pub alphas: Vec<f64>,
    pub orderings: Orderings,
    pub tol: f64,
    pub maxit: usize,
    /// Concurrent solves; 0 uses the rayon default.
    pub workers: usize,
}

impl SweepPlan {
    pub fn new(problems: Vec<ProblemSpec>, pair: [PrecondSpec; 2]) -> Self {
        Self {
            problems,
            pair,
            alphas: DEFAULT_ALPHAS.to_vec(),
            orderings: Orderings::Both,
            tol: 1e-8,
            maxit: 200,
            workers: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.problems.is_empty() {
            return Err(Error::usage("sweep needs at least one problem"));
        }
        if self.alphas.is_empty() {
            return Err(Error::usage("sweep needs at least one alpha"));
        }
        if self.alphas.iter().any(|&a| !(a > 0.0 && a < 1.0)) {
            return Err(Error::usage("alpha must lie in (0,1)"));
        }
        SolverConfig::new(Variant::Fgmres)
            .with_tol(self.tol)
            .with_maxit(self.maxit)
            .validate(1)
    }

    pub fn header(&self) -> TableHeader {
        TableHeader {
            first: self.pair[0].to_string(),
            second: self.pair[1].to_string(),
            alphas: self.alphas.clone(),
            maxit: self.maxit,
        }
    }

    fn solo_config(&self) -> SolverConfig {
        SolverConfig::new(Variant::Fgmres)
            .with_tol(self.tol)
            .with_maxit(self.maxit)
    }

    fn selective_config(&self, alpha: f64, reverse: bool) -> Result<SolverConfig> {
        let ordering = if reverse {
            Ordering::Reverse
        } else {
            Ordering::Forward
        };
        SolverConfig::new(Variant::MpgmresSelective)
            .with_selection(Selection::LinComb)
            .with_ordering(ordering)
            .with_tol(self.tol)
            .with_maxit(self.maxit)
            .with_alpha(alpha)
    }
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub header: TableHeader,
    pub rows: Vec<SweepRow>,
    pub csv: String,
    pub markdown: String,
}

#[derive(Debug, Clone, Copy)]
enum Job {
    Solo { row: usize, which: usize },
    Selective { row: usize, reverse: bool, alpha: usize },
}

struct System {
    label: String,
    a: SparseMatrix,
    b: Vec<f64>,
    preconds: [Preconditioner; 2],
}

fn setup(spec: &ProblemSpec, pair: &[PrecondSpec; 2]) -> Result<System> {
    let label = spec.label();
    let wrap = |e: Error| e.context(format!("problem {label}"));
    let (a, b) = generate(spec).map_err(wrap)?;
    let p1 = pair[0].build(&a).map_err(wrap)?;
    let p2 = pair[1].build(&a).map_err(wrap)?;
    Ok(System {
        label,
        a,
        b,
        preconds: [p1, p2],
    })
}

fn run_job(plan: &SweepPlan, systems: &[System], job: Job) -> Result<Count> {
    let (row, config, preconds, what) = match job {
        Job::Solo { row, which } => {
            let sys = &systems[row];
            let p = std::slice::from_ref(&sys.preconds[which]);
            (
                row,
                plan.solo_config(),
                p,
                format!("fgmres with {}", plan.pair[which]),
            )
        }
        Job::Selective { row, reverse, alpha } => {
            let a = plan.alphas[alpha];
            let config = plan.selective_config(a, reverse)?;
            let order = if reverse { "reverse" } else { "forward" };
            (
                row,
                config,
                &systems[row].preconds[..],
                format!("smpgmres alpha={a} {order}"),
            )
        }
    };
    let sys = &systems[row];
    let report = mp_solve(&sys.a, &sys.b, None, preconds, &config)
        .map_err(|e| e.context(format!("{} ({what})", sys.label)))?;
    Ok(Count {
        iterations: report.iterations,
        converged: report.converged,
    })
}

/// Runs every cell of the plan. Cells are solved concurrently but assembled in
/// plan order, so the emitted tables do not depend on scheduling.
pub fn run_sweep(plan: &SweepPlan) -> Result<SweepOutcome> {
    plan.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(plan.workers)
        .build()
        .map_err(|e| Error::Internal(format!("thread pool: {e}")))?;

    let mut jobs = Vec::new();
    for row in 0..plan.problems.len() {
        jobs.push(Job::Solo { row, which: 0 });
        jobs.push(Job::Solo { row, which: 1 });
        for reverse in [false, true] {
            if plan.orderings.includes(reverse) {
                jobs.extend((0..plan.alphas.len()).map(|alpha| Job::Selective { row, reverse, alpha }));
            }
        }
    }

    let counts: Vec<Count> = pool.install(|| -> Result<Vec<Count>> {
        let systems = plan
            .problems
            .par_iter()
            .map(|p| setup(p, &plan.pair))
            .collect::<Result<Vec<_>>>()?;
        jobs.par_iter().map(|&job| run_job(plan, &systems, job)).collect()
    })?;

    let mut rows: Vec<SweepRow> = plan
        .problems
        .iter()
        .map(|p| SweepRow {
            label: p.label(),
            solo_first: Count::failed(0),
            solo_second: Count::failed(0),
            per_alpha_forward: plan
                .orderings
                .includes(false)
                .then(|| vec![Count::failed(0); plan.alphas.len()]),
            per_alpha_reverse: plan
                .orderings
                .includes(true)
                .then(|| vec![Count::failed(0); plan.alphas.len()]),
        })
        .collect();
    for (job, count) in jobs.iter().zip(counts) {
        match *job {
            Job::Solo { row, which: 0 } => rows[row].solo_first = count,
            Job::Solo { row, .. } => rows[row].solo_second = count,
            Job::Selective { row, reverse, alpha } => {
                let slot = if reverse {
                    &mut rows[row].per_alpha_reverse
                } else {
                    &mut rows[row].per_alpha_forward
                };
                slot.as_mut().expect("ordering was planned")[alpha] = count;
            }
        }
    }

    let header = plan.header();
    let csv = render_csv(&header, &rows)?;
    let markdown = render_markdown(&header, &rows);
    Ok(SweepOutcome {
        header,
        rows,
        csv,
        markdown,
    })
}
