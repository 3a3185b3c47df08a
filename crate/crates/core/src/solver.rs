//! Krylov state machines: GMRES, FGMRES (fixed or cyclic schedule), complete
//! MPGMRES and selective MPGMRES.
//!
//! All variants share one engine. Each iteration builds a block of search
//! directions `Z`, forms `W = A Z`, orthogonalizes `W` against the current
//! basis (deflating dependent candidates), appends the coefficients to the
//! Hessenberg-type matrix and updates the least-squares residual. The variants
//! differ only in how `Z` is built from the newest basis block.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{
    norm2, orthogonalize_append, ColumnBlock, DeflationEvent, HessenbergStore, LsqUpdater, SparseMatrix,
    DEFAULT_DEFLATE_TOL,
};
use crate::precond::Preconditioner;

/// Largest block the complete variant may build before aborting.
pub const DEFAULT_MAX_BLOCK_COLUMNS: usize = 4096;

/// Deflated candidates whose remainder is at most this fraction of their norm
/// are exact dependencies (happy breakdown) and stay in the least-squares
/// problem. Larger remainders mean the coefficient column is only approximate,
/// so the direction is kept out of the minimization.
pub const EXACT_DEPENDENCE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Right-preconditioned GMRES with one fixed preconditioner.
    Gmres,
    /// Flexible GMRES with one fixed preconditioner.
    Fgmres,
    /// Flexible GMRES switching preconditioners in cyclic order.
    FgmresCyclic,
    MpgmresComplete,
    MpgmresSelective,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Gmres => "gmres",
            Variant::Fgmres => "fgmres",
            Variant::FgmresCyclic => "fgmres_cyclic",
            Variant::MpgmresComplete => "mpgmres_complete",
            Variant::MpgmresSelective => "mpgmres_selective",
        }
    }

    pub const ALL: [Variant; 5] = [
        Variant::Gmres,
        Variant::Fgmres,
        Variant::FgmresCyclic,
        Variant::MpgmresComplete,
        Variant::MpgmresSelective,
    ];
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "gmres" => Variant::Gmres,
            "fgmres" => Variant::Fgmres,
            "fgmres_cyclic" | "cyclic" | "cycling" => Variant::FgmresCyclic,
            "mpgmres_complete" | "mpgmres" | "complete" => Variant::MpgmresComplete,
            "mpgmres_selective" | "smpgmres" | "selective" => Variant::MpgmresSelective,
            other => return Err(Error::usage(format!("unknown variant '{other}'"))),
        })
    }
}

/// How the selective variant picks directions from the newest basis block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Selection {
    /// Preconditioner `i` takes column `selectors[i]`; an empty list means
    /// `selectors[i] = i`. Out-of-range selectors are clamped.
    Columns(Vec<usize>),
    /// Fresh uniformly random selectors every iteration from a seeded stream.
    RandomColumns { seed: u64 },
    /// Every preconditioner acts on the weighted combination `V alpha`.
    LinComb,
}

/// Order in which the preconditioners enter each block.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum Ordering {
    #[default]
    Forward,
    Reverse,
    /// Explicit permutation of preconditioner indices.
    Custom(Vec<usize>),
}

impl Ordering {
    /// Permutation for `l` preconditioners.
    pub fn permutation(&self, l: usize) -> Result<Vec<usize>> {
        match self {
            Ordering::Forward => Ok((0..l).collect()),
            Ordering::Reverse => Ok((0..l).rev().collect()),
            Ordering::Custom(p) => {
                let mut seen = vec![false; l];
                if p.len() != l || p.iter().any(|&i| i >= l || std::mem::replace(&mut seen[i], true)) {
                    return Err(Error::usage(format!(
                        "ordering {p:?} is not a permutation of 0..{l}"
                    )));
                }
                Ok(p.clone())
            }
        }
    }

    pub fn name(&self) -> String {
        match self {
            Ordering::Forward => "forward".into(),
            Ordering::Reverse => "reverse".into(),
            Ordering::Custom(p) => format!("{p:?}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub variant: Variant,
    /// Relative residual target.
    pub tol: f64,
    pub maxit: usize,
    pub selection: Selection,
    /// Weights for [`Selection::LinComb`], one per preconditioner, applied in
    /// the configured ordering: the first weight goes to whichever
    /// preconditioner leads. `None` means equal weights.
    pub alpha: Option<Vec<f64>>,
    pub ordering: Ordering,
    pub deflate_tol: f64,
    pub max_block_columns: usize,
    /// Apply preconditioners and products of one block on the rayon pool.
    pub parallel: bool,
}

impl SolverConfig {
    pub fn new(variant: Variant) -> Self {
        Self {
            variant,
            tol: 1e-8,
            maxit: 200,
            selection: Selection::LinComb,
            alpha: None,
            ordering: Ordering::Forward,
            deflate_tol: DEFAULT_DEFLATE_TOL,
            max_block_columns: DEFAULT_MAX_BLOCK_COLUMNS,
            parallel: true,
        }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_maxit(mut self, maxit: usize) -> Self {
        self.maxit = maxit;
        self
    }

    pub fn with_selection(mut self, selection: Selection) -> Self {
        self.selection = selection;
        self
    }

    pub fn with_ordering(mut self, ordering: Ordering) -> Self {
        self.ordering = ordering;
        self
    }

    /// Two-preconditioner weights `(alpha, 1 - alpha)`.
    pub fn with_alpha(mut self, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::usage("alpha must lie in (0,1)"));
        }
        self.alpha = Some(vec![alpha, 1.0 - alpha]);
        Ok(self)
    }

    pub fn with_weights(mut self, weights: Vec<f64>) -> Self {
        self.alpha = Some(weights);
        self
    }

    /// Checks the configuration against the number of preconditioners.
    pub fn validate(&self, num_preconds: usize) -> Result<()> {
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(Error::usage(format!("tol must lie in (0,1), got {}", self.tol)));
        }
        if self.maxit == 0 {
            return Err(Error::usage("maxit must be at least 1"));
        }
        if self.deflate_tol.is_nan() || self.deflate_tol <= 0.0 {
            return Err(Error::usage("deflate_tol must be positive"));
        }
        if num_preconds == 0 {
            return Err(Error::usage("at least one preconditioner is required"));
        }
        if matches!(self.variant, Variant::Gmres | Variant::Fgmres) && num_preconds != 1 {
            return Err(Error::usage(format!(
                "{} takes exactly one preconditioner, got {num_preconds}",
                self.variant
            )));
        }
        self.ordering.permutation(num_preconds)?;
        if let Some(alpha) = &self.alpha {
            if alpha.len() != num_preconds {
                return Err(Error::usage(format!(
                    "alpha has {} entries for {num_preconds} preconditioners",
                    alpha.len()
                )));
            }
            if num_preconds == 1 {
                if alpha[0] != 1.0 {
                    return Err(Error::usage("a single weight must equal 1"));
                }
            } else {
                if alpha.iter().any(|&a| !(a > 0.0 && a < 1.0)) {
                    return Err(Error::usage("alpha must lie in (0,1)"));
                }
                if (alpha.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
                    return Err(Error::usage("alpha entries must sum to 1"));
                }
            }
        }
        if let Selection::Columns(s) = &self.selection {
            if !s.is_empty() && s.len() != num_preconds {
                return Err(Error::usage(format!(
                    "{} selectors given for {num_preconds} preconditioners",
                    s.len()
                )));
            }
        }
        Ok(())
    }
}

/// Outcome of one solve.
#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub variant: Variant,
    pub converged: bool,
    /// Every candidate of some block deflated before reaching the tolerance.
    pub stagnated: bool,
    pub iterations: usize,
    /// Relative residual per iteration; entry 0 is the initial residual.
    pub residual_history: Vec<f64>,
    /// Basis size per iteration; entry 0 is 1.
    pub basis_columns_history: Vec<usize>,
    pub deflation_events: Vec<DeflationEvent>,
    /// Selective-column selectors clamped after deflation shrank a block.
    pub clamped_selectors: usize,
    #[serde(skip)]
    pub final_x: Vec<f64>,
    /// `||b - A x|| / ||r0||` recomputed from `final_x`.
    pub true_residual: f64,
    /// The recomputed residual disagrees with the least-squares estimate by
    /// more than 1e-6 relative.
    pub residual_mismatch: bool,
    /// Seconds.
    pub wall_time: f64,
}

impl SolveReport {
    pub fn final_residual(&self) -> f64 {
        *self.residual_history.last().unwrap_or(&0.0)
    }
}

/// Growing Arnoldi-type decomposition `A Z = V H`.
#[derive(Debug, Clone)]
pub struct ArnoldiState {
    /// Orthonormal basis, first column `r0 / beta`.
    pub basis: ColumnBlock,
    /// Search directions; `None` for GMRES, whose directions are `P^{-1} V`.
    pub directions: Option<ColumnBlock>,
    pub hess: HessenbergStore,
    /// First basis column of each block `V^(k)`.
    pub block_starts: Vec<usize>,
    pub beta: f64,
    pub events: Vec<DeflationEvent>,
}

impl ArnoldiState {
    /// Columns of the newest basis block.
    pub fn newest_block(&self) -> ColumnBlock {
        let start = *self.block_starts.last().unwrap_or(&0);
        self.basis.slice(start..self.basis.ncols())
    }
}

/// First block: `V1 = r0 / beta` and `Z1 = beta^{-1} [P_1^{-1} r0, ...]`.
#[derive(Debug, Clone)]
pub struct InitialBlock {
    pub v1: ColumnBlock,
    pub z1: ColumnBlock,
    pub beta: f64,
}

fn check_block(preconds: &[&Preconditioner], v: &ColumnBlock) -> Result<()> {
    if preconds.is_empty() {
        return Err(Error::usage("at least one preconditioner is required"));
    }
    for p in preconds {
        if p.dim() != v.nrows() {
            return Err(Error::DimensionMismatch {
                expected: v.nrows(),
                found: p.dim(),
            });
        }
    }
    Ok(())
}

/// Applies each `(preconditioner, vector)` job, keeping job order in the output.
fn apply_jobs(n: usize, jobs: &[(&Preconditioner, &[f64])], parallel: bool) -> ColumnBlock {
    let run = |(p, v): &(&Preconditioner, &[f64])| {
        let mut out = vec![0.0; n];
        p.apply_into(v, &mut out);
        out
    };
    let cols: Vec<Vec<f64>> = if parallel && jobs.len() > 1 {
        jobs.par_iter().map(run).collect()
    } else {
        jobs.iter().map(run).collect()
    };
    let mut block = ColumnBlock::new(n);
    for c in cols {
        block.push_column(&c).expect("preconditioner output length");
    }
    block
}

fn multiply_block(a: &SparseMatrix, z: &ColumnBlock, parallel: bool) -> ColumnBlock {
    let n = a.n();
    let run = |j: usize| {
        let mut out = vec![0.0; n];
        a.spmv_into(z.col(j), &mut out);
        out
    };
    let cols: Vec<Vec<f64>> = if parallel && z.ncols() > 1 {
        (0..z.ncols()).into_par_iter().map(run).collect()
    } else {
        (0..z.ncols()).map(run).collect()
    };
    let mut w = ColumnBlock::new(n);
    for c in cols {
        w.push_column(&c).expect("product length");
    }
    w
}

/// Builds the first block from the initial residual. Returns `None` when
/// `r0 = 0`, in which case there is nothing to solve.
pub fn initial_block(preconds: &[&Preconditioner], r0: &[f64]) -> Result<Option<InitialBlock>> {
    let n = r0.len();
    check_block(preconds, &ColumnBlock::new(n))?;
    let beta = norm2(r0);
    if beta == 0.0 {
        return Ok(None);
    }
    let v: Vec<f64> = r0.iter().map(|x| x / beta).collect();
    // P^{-1} (r0 / beta): the same rounding as a single-preconditioner solve.
    let jobs: Vec<_> = preconds.iter().map(|p| (*p, v.as_slice())).collect();
    let z1 = apply_jobs(n, &jobs, true);
    let v1 = ColumnBlock::from_columns(n, vec![v])?;
    Ok(Some(InitialBlock { v1, z1, beta }))
}

/// `Z = [P_1^{-1} V, ..., P_l^{-1} V]`, grouped by preconditioner.
pub fn expand_complete(preconds: &[&Preconditioner], v_k: &ColumnBlock) -> Result<ColumnBlock> {
    check_block(preconds, v_k)?;
    if v_k.is_empty() {
        return Err(Error::usage("cannot expand an empty block"));
    }
    let jobs: Vec<_> = preconds
        .iter()
        .flat_map(|p| v_k.columns().map(move |c| (*p, c)))
        .collect();
    Ok(apply_jobs(v_k.nrows(), &jobs, true))
}

/// `Z = [P_1^{-1} V[:, s_1], ..., P_l^{-1} V[:, s_l]]` with zero-based
/// selectors. Selectors past the last column are clamped to it; the number
/// of clamped selectors is returned alongside the block.
pub fn expand_selective_columns(
    preconds: &[&Preconditioner],
    v_k: &ColumnBlock,
    selectors: &[usize],
) -> Result<(ColumnBlock, usize)> {
    check_block(preconds, v_k)?;
    if v_k.is_empty() {
        return Err(Error::usage("cannot expand an empty block"));
    }
    if selectors.len() != preconds.len() {
        return Err(Error::usage(format!(
            "{} selectors given for {} preconditioners",
            selectors.len(),
            preconds.len()
        )));
    }
    let last = v_k.ncols() - 1;
    let clamped = selectors.iter().filter(|&&s| s > last).count();
    let jobs: Vec<_> = preconds
        .iter()
        .zip(selectors)
        .map(|(p, &s)| (*p, v_k.col(s.min(last))))
        .collect();
    Ok((apply_jobs(v_k.nrows(), &jobs, true), clamped))
}

/// `w = V alpha`, then `Z = [P_1^{-1} w, ..., P_l^{-1} w]`.
///
/// When `alpha` is longer than the block (deflation shrank it) the weights
/// are truncated to the surviving columns and renormalized to sum to one.
pub fn expand_selective_lincomb(
    preconds: &[&Preconditioner],
    v_k: &ColumnBlock,
    alpha: &[f64],
) -> Result<ColumnBlock> {
    check_block(preconds, v_k)?;
    let weights = lincomb_weights(v_k.ncols(), alpha)?;
    let w = v_k.combine(&weights);
    let jobs: Vec<_> = preconds.iter().map(|p| (*p, w.as_slice())).collect();
    Ok(apply_jobs(v_k.nrows(), &jobs, true))
}

fn lincomb_weights(m: usize, alpha: &[f64]) -> Result<Vec<f64>> {
    if m == 0 {
        return Err(Error::usage("cannot expand an empty block"));
    }
    if alpha.len() < m {
        return Err(Error::usage(format!(
            "{} weights for a block of {m} columns",
            alpha.len()
        )));
    }
    if alpha.iter().all(|&a| a == 0.0) {
        return Err(Error::usage("alpha must not be all zero"));
    }
    if alpha.len() == m {
        return Ok(alpha.to_vec());
    }
    let kept = &alpha[..m];
    let sum: f64 = kept.iter().sum();
    if sum == 0.0 {
        return Err(Error::usage("truncated alpha sums to zero"));
    }
    Ok(kept.iter().map(|a| a / sum).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Status {
    Running,
    Converged,
    Stagnated,
    MaxIterations,
}

/// Step-by-step solver; [`mp_solve`] drives it to completion.
///
/// Exposes the Arnoldi-type state between iterations for inspection.
pub struct MpSolver<'a> {
    a: &'a SparseMatrix,
    b: &'a [f64],
    preconds: Vec<&'a Preconditioner>,
    config: SolverConfig,
    alpha: Vec<f64>,
    x0: Vec<f64>,
    r0: Vec<f64>,
    state: ArnoldiState,
    lsq: LsqUpdater,
    iteration: usize,
    residuals: Vec<f64>,
    basis_history: Vec<usize>,
    clamped: usize,
    status: Status,
    rng: Option<ChaCha8Rng>,
    started: Instant,
}

impl<'a> MpSolver<'a> {
    pub fn new(
        a: &'a SparseMatrix,
        b: &'a [f64],
        x0: Option<&[f64]>,
        preconds: &'a [Preconditioner],
        config: &SolverConfig,
    ) -> Result<Self> {
        let started = Instant::now();
        let n = a.n();
        config.validate(preconds.len())?;
        if b.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: b.len(),
            });
        }
        if let Some(p) = preconds.iter().find(|p| p.dim() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: p.dim(),
            });
        }
        let x0 = match x0 {
            Some(x) if x.len() != n => {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: x.len(),
                })
            }
            Some(x) => x.to_vec(),
            None => vec![0.0; n],
        };
        if b.iter().chain(&x0).any(|v| !v.is_finite()) {
            return Err(Error::usage("right-hand side and initial guess must be finite"));
        }
        let perm = config.ordering.permutation(preconds.len())?;
        let ordered: Vec<&Preconditioner> = perm.iter().map(|&i| &preconds[i]).collect();
        let alpha = match &config.alpha {
            Some(w) => w.clone(),
            None => vec![1.0 / preconds.len() as f64; preconds.len()],
        };
        let rng = match config.selection {
            Selection::RandomColumns { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
            _ => None,
        };

        let ax0 = a.spmv(&x0)?;
        let r0: Vec<f64> = b.iter().zip(&ax0).map(|(b, ax)| b - ax).collect();
        let beta = norm2(&r0);
        let mut basis = ColumnBlock::new(n);
        let (status, residuals) = if beta == 0.0 {
            (Status::Converged, vec![0.0])
        } else {
            let v: Vec<f64> = r0.iter().map(|x| x / beta).collect();
            basis.push_column(&v)?;
            (Status::Running, vec![1.0])
        };
        let stores_directions = config.variant != Variant::Gmres;
        Ok(Self {
            a,
            b,
            preconds: ordered,
            config: config.clone(),
            alpha,
            x0,
            r0,
            state: ArnoldiState {
                basis,
                directions: stores_directions.then(|| ColumnBlock::new(n)),
                hess: HessenbergStore::new(),
                block_starts: vec![0],
                beta,
                events: Vec::new(),
            },
            lsq: LsqUpdater::new(beta),
            iteration: 0,
            residuals,
            basis_history: vec![usize::from(beta != 0.0)],
            clamped: 0,
            status,
            rng,
            started,
        })
    }

    pub fn state(&self) -> &ArnoldiState {
        &self.state
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn is_finished(&self) -> bool {
        self.status != Status::Running
    }

    pub fn residual_history(&self) -> &[f64] {
        &self.residuals
    }

    /// Search directions `Z`, recomputed as `P^{-1} V` for GMRES.
    pub fn search_directions(&self) -> ColumnBlock {
        match &self.state.directions {
            Some(z) => z.clone(),
            None => {
                let m = self.state.hess.cols();
                let p = self.preconds[0];
                let jobs: Vec<_> = (0..m).map(|j| (p, self.state.basis.col(j))).collect();
                apply_jobs(self.a.n(), &jobs, self.config.parallel)
            }
        }
    }

    /// `||A Z - V H||_F`.
    pub fn arnoldi_residual(&self) -> f64 {
        let z = self.search_directions();
        let az = multiply_block(self.a, &z, self.config.parallel);
        let mut sum = 0.0;
        for j in 0..z.ncols() {
            let h = self.state.hess.column(j);
            let vh = self.state.basis.slice(0..h.len()).combine(h);
            sum += az
                .col(j)
                .iter()
                .zip(&vh)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>();
        }
        sum.sqrt()
    }

    fn next_block(&mut self, k: usize) -> Result<ColumnBlock> {
        let n = self.a.n();
        let parallel = self.config.parallel;
        let newest = self.state.newest_block();
        let single = |p: &Preconditioner, v: &[f64]| apply_jobs(n, &[(p, v)], parallel);
        match self.config.variant {
            Variant::Gmres | Variant::Fgmres => Ok(single(self.preconds[0], newest.col(newest.ncols() - 1))),
            Variant::FgmresCyclic => {
                let p = self.preconds[(k - 1) % self.preconds.len()];
                Ok(single(p, newest.col(newest.ncols() - 1)))
            }
            Variant::MpgmresComplete | Variant::MpgmresSelective if k == 1 => {
                let block = initial_block(&self.preconds, &self.r0)?
                    .ok_or_else(|| Error::Internal("initial block requested for r0 = 0".into()))?;
                Ok(block.z1)
            }
            Variant::MpgmresComplete => {
                let columns = self.preconds.len() * newest.ncols();
                if columns > self.config.max_block_columns {
                    return Err(Error::BlockCapExceeded {
                        columns,
                        cap: self.config.max_block_columns,
                    });
                }
                expand_complete(&self.preconds, &newest)
            }
            Variant::MpgmresSelective => match &self.config.selection {
                Selection::LinComb => expand_selective_lincomb(&self.preconds, &newest, &self.alpha),
                Selection::Columns(sel) => {
                    let sel: Vec<usize> = if sel.is_empty() {
                        (0..self.preconds.len()).collect()
                    } else {
                        sel.clone()
                    };
                    let (z, clamped) = expand_selective_columns(&self.preconds, &newest, &sel)?;
                    self.clamped += clamped;
                    Ok(z)
                }
                Selection::RandomColumns { .. } => {
                    let m = newest.ncols();
                    let rng = self.rng.as_mut().expect("seeded when configured");
                    let sel: Vec<usize> = (0..self.preconds.len()).map(|_| rng.gen_range(0..m)).collect();
                    Ok(expand_selective_columns(&self.preconds, &newest, &sel)?.0)
                }
            },
        }
    }

    /// Runs one iteration. Returns `false` once the solve has finished.
    pub fn step(&mut self) -> Result<bool> {
        if self.status != Status::Running {
            return Ok(false);
        }
        let k = self.iteration + 1;
        let z = self.next_block(k)?;
        let w = multiply_block(self.a, &z, self.config.parallel);

        let start = self.state.basis.ncols();
        let (coeffs, events, kept) =
            orthogonalize_append(&mut self.state.basis, &w, self.config.deflate_tol, k);
        if !kept.is_empty() {
            self.state.block_starts.push(start);
        }
        self.state.hess.set_rows(self.state.basis.ncols());
        for (j, c) in coeffs.into_iter().enumerate() {
            let approximate = events
                .iter()
                .any(|e| e.candidate_index == j && e.relative_remainder() > EXACT_DEPENDENCE_TOL);
            if approximate {
                self.lsq.push_inactive_column(c.len());
            } else {
                self.lsq.push_column(&c);
            }
            self.state.hess.push_column(c);
        }
        if let Some(dirs) = self.state.directions.as_mut() {
            dirs.append(&z)?;
        }
        self.state.events.extend(events);

        let rel = self.lsq.residual() / self.state.beta;
        self.iteration = k;
        self.residuals.push(rel);
        self.basis_history.push(self.state.basis.ncols());

        self.status = if rel <= self.config.tol {
            Status::Converged
        } else if kept.is_empty() {
            Status::Stagnated
        } else if k >= self.config.maxit {
            Status::MaxIterations
        } else {
            Status::Running
        };
        Ok(self.status == Status::Running)
    }

    /// Current iterate `x0 + Z y`.
    pub fn current_x(&self) -> Vec<f64> {
        let mut x = self.x0.clone();
        if self.lsq.ncols() == 0 {
            return x;
        }
        let y = self.lsq.solve();
        let update = match &self.state.directions {
            Some(z) => z.combine(&y),
            None => {
                let vy = self.state.basis.slice(0..y.len()).combine(&y);
                self.preconds[0].apply(&vy).expect("dimension checked at setup")
            }
        };
        x.iter_mut().zip(update).for_each(|(xi, u)| *xi += u);
        x
    }

    pub fn finish(self) -> SolveReport {
        let final_x = self.current_x();
        let ax = self.a.spmv(&final_x).expect("dimension checked at setup");
        let true_abs = norm2(&self.b.iter().zip(&ax).map(|(b, ax)| b - ax).collect::<Vec<_>>());
        let beta = self.state.beta;
        let true_residual = if beta > 0.0 { true_abs / beta } else { true_abs };
        let estimate = *self.residuals.last().unwrap_or(&0.0);
        // Forming b - A x in floating point is itself only accurate to about
        // (row length) * eps * (|b| + |A| |x|).
        let rounding = (self.a.max_row_nnz() + 2) as f64
            * f64::EPSILON
            * (norm2(self.b) + self.a.frobenius_norm() * norm2(&final_x))
            / beta.max(f64::MIN_POSITIVE);
        let residual_mismatch =
            (true_residual - estimate).abs() > 1e-6 * true_residual.max(estimate) + rounding;
        SolveReport {
            variant: self.config.variant,
            converged: self.status == Status::Converged,
            stagnated: self.status == Status::Stagnated,
            iterations: self.iteration,
            residual_history: self.residuals,
            basis_columns_history: self.basis_history,
            deflation_events: self.state.events,
            clamped_selectors: self.clamped,
            final_x,
            true_residual,
            residual_mismatch,
            wall_time: self.started.elapsed().as_secs_f64(),
        }
    }
}

/// Solves `A x = b` with the configured variant and preconditioners.
pub fn mp_solve(
    a: &SparseMatrix,
    b: &[f64],
    x0: Option<&[f64]>,
    preconds: &[Preconditioner],
    config: &SolverConfig,
) -> Result<SolveReport> {
    let mut solver = MpSolver::new(a, b, x0, preconds, config)?;
    while solver.step()? {}
    Ok(solver.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::precond::PrecondSpec;

    fn col_close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn initial_block_identity() {
        let p = Preconditioner::identity(3);
        let ib = initial_block(&[&p], &[2.0, 0.0, 0.0]).unwrap().unwrap();
        assert_eq!(ib.beta, 2.0);
        assert_eq!(ib.v1.col(0), &[1.0, 0.0, 0.0]);
        assert_eq!(ib.z1.col(0), &[1.0, 0.0, 0.0]);
    }

    #[test]
    fn initial_block_duplicates_and_zero() {
        let p = Preconditioner::identity(2);
        let ib = initial_block(&[&p, &p], &[1.0, 0.0]).unwrap().unwrap();
        assert_eq!(ib.z1.ncols(), 2);
        assert_eq!(ib.z1.col(0), ib.z1.col(1));
        assert!(initial_block(&[&p], &[0.0, 0.0]).unwrap().is_none());
    }

    #[test]
    fn initial_block_jacobi_hand_check() {
        let a = SparseMatrix::from_diagonal(&[1.0, 2.0]);
        let p = PrecondSpec::Jacobi.build(&a).unwrap();
        let ib = initial_block(&[&p], &[3.0, 4.0]).unwrap().unwrap();
        assert_eq!(ib.beta, 5.0);
        // diag(1,2)^{-1} (3,4) = (3,2); divided by 5.
        assert!(col_close(ib.z1.col(0), &[3.0 / 5.0, 4.0 / 10.0], 1e-15));
    }

    #[test]
    fn complete_layout_grouped_by_preconditioner() {
        let a = SparseMatrix::from_diagonal(&[1.0, 2.0, 4.0]);
        let p1 = Preconditioner::identity(3);
        let p2 = PrecondSpec::Jacobi.build(&a).unwrap();
        let v = ColumnBlock::identity_columns(3, 2);
        let z = expand_complete(&[&p1, &p2], &v).unwrap();
        assert_eq!(z.ncols(), 4);
        assert_eq!(z.col(0), v.col(0));
        assert_eq!(z.col(1), v.col(1));
        assert_eq!(z.col(2), p2.apply(v.col(0)).unwrap().as_slice());
        assert_eq!(z.col(3), p2.apply(v.col(1)).unwrap().as_slice());
        let single = expand_complete(&[&p2], &v).unwrap();
        assert_eq!(single.ncols(), 2);
    }

    #[test]
    fn selective_columns_definition_and_clamp() {
        let a = SparseMatrix::from_diagonal(&[1.0, 2.0]);
        let p1 = Preconditioner::identity(2);
        let p2 = PrecondSpec::Jacobi.build(&a).unwrap();
        let v = ColumnBlock::identity_columns(2, 2);
        let (z, clamped) = expand_selective_columns(&[&p1, &p2], &v, &[0, 1]).unwrap();
        assert_eq!(clamped, 0);
        assert_eq!(z.col(0), &[1.0, 0.0]);
        assert_eq!(z.col(1), &[0.0, 0.5]);
        let (z, _) = expand_selective_columns(&[&p1, &p2], &v, &[0, 0]).unwrap();
        assert_eq!(z.col(1), &[1.0, 0.0]);
        let one = v.slice(0..1);
        let (z, clamped) = expand_selective_columns(&[&p1, &p2], &one, &[0, 1]).unwrap();
        assert_eq!(clamped, 1);
        assert_eq!(z.col(1), &[1.0, 0.0]);
    }

    #[test]
    fn selective_columns_in_span_deflate_entirely() {
        // V orthonormal 5x2, identity preconditioners: Z = V, which lies in
        // span(V) and leaves zero projection residual.
        let p = Preconditioner::identity(5);
        let v = ColumnBlock::identity_columns(5, 2);
        let (z, _) = expand_selective_columns(&[&p, &p], &v, &[0, 1]).unwrap();
        let out = crate::linalg::block_orthogonalize(&z, &v, 1e-8).unwrap();
        assert!(out.new_basis.is_empty());
        assert_eq!(out.events.len(), 2);
        for e in &out.events {
            assert_eq!(e.norm_before, 0.0);
        }
    }

    #[test]
    fn lincomb_hand_check_and_boundary() {
        let a = SparseMatrix::from_diagonal(&[1.0, 2.0]);
        let p1 = Preconditioner::identity(2);
        let p2 = PrecondSpec::Jacobi.build(&a).unwrap();
        let v = ColumnBlock::identity_columns(2, 2);
        let z = expand_selective_lincomb(&[&p1, &p2], &v, &[0.7, 0.3]).unwrap();
        assert!(col_close(z.col(0), &[0.7, 0.3], 1e-15));
        assert!(col_close(z.col(1), &[0.7, 0.15], 1e-15));

        let zb = expand_selective_lincomb(&[&p1, &p2], &v, &[1.0, 0.0]).unwrap();
        let (zc, _) = expand_selective_columns(&[&p1, &p2], &v, &[0, 0]).unwrap();
        assert_eq!(zb, zc);

        assert!(expand_selective_lincomb(&[&p1, &p2], &v, &[0.0, 0.0]).is_err());
    }

    #[test]
    fn lincomb_truncates_and_renormalizes() {
        assert_eq!(lincomb_weights(1, &[0.7, 0.3]).unwrap(), vec![1.0]);
        assert_eq!(lincomb_weights(2, &[0.5, 0.5]).unwrap(), vec![0.5, 0.5]);
        let w = lincomb_weights(2, &[0.2, 0.2, 0.6]).unwrap();
        assert!(col_close(&w, &[0.5, 0.5], 1e-15));
    }

    #[test]
    fn identity_system_converges_in_one_iteration() {
        let a = SparseMatrix::identity(4);
        let b = [1.0, -2.0, 0.5, 3.0];
        let pre = [
            Preconditioner::identity(4),
            PrecondSpec::Jacobi.build(&a).unwrap(),
        ];
        for variant in Variant::ALL {
            let preconds: &[Preconditioner] = match variant {
                Variant::Gmres | Variant::Fgmres => &pre[..1],
                _ => &pre[..],
            };
            let cfg = SolverConfig::new(variant);
            let r = mp_solve(&a, &b, None, preconds, &cfg).unwrap();
            assert!(r.converged, "{variant}");
            assert_eq!(r.iterations, 1, "{variant}");
            assert!(col_close(&r.final_x, &b, 1e-14), "{variant}");
        }
    }

    #[test]
    fn exact_preconditioner_converges_in_one_iteration() {
        let a = SparseMatrix::from_diagonal(&[1.0, 2.0, 3.0]);
        let p = [PrecondSpec::Jacobi.build(&a).unwrap()];
        let r = mp_solve(&a, &[1.0, 1.0, 1.0], None, &p, &SolverConfig::new(Variant::Gmres)).unwrap();
        assert!(r.converged);
        assert_eq!(r.iterations, 1);
        assert!(col_close(&r.final_x, &[1.0, 0.5, 1.0 / 3.0], 1e-14));
    }

    #[test]
    fn zero_rhs_converges_immediately() {
        let a = SparseMatrix::identity(3);
        let p = [Preconditioner::identity(3)];
        let r = mp_solve(&a, &[0.0; 3], None, &p, &SolverConfig::new(Variant::Fgmres)).unwrap();
        assert!(r.converged);
        assert_eq!(r.iterations, 0);
        assert_eq!(r.final_x, vec![0.0; 3]);
    }

    #[test]
    fn nonzero_initial_guess() {
        let a = SparseMatrix::from_dense(&[vec![4.0, 1.0], vec![2.0, 3.0]]).unwrap();
        let p = [Preconditioner::identity(2)];
        let b = [1.0, 2.0];
        let r = mp_solve(&a, &b, Some(&[0.5, 0.5]), &p, &SolverConfig::new(Variant::Gmres)).unwrap();
        assert!(r.converged);
        assert!(r.true_residual < 1e-12);
        assert!(!r.residual_mismatch);
    }

    #[test]
    fn config_validation() {
        let a = SparseMatrix::identity(2);
        let p = [Preconditioner::identity(2), Preconditioner::identity(2)];
        let b = [1.0, 1.0];
        let run = |cfg: SolverConfig, k: usize| mp_solve(&a, &b, None, &p[..k], &cfg);
        assert!(run(SolverConfig::new(Variant::Gmres), 2).is_err());
        assert!(run(SolverConfig::new(Variant::Fgmres).with_tol(0.0), 1).is_err());
        assert!(run(SolverConfig::new(Variant::Fgmres).with_maxit(0), 1).is_err());
        assert!(run(
            SolverConfig::new(Variant::MpgmresSelective).with_weights(vec![0.9, 0.2]),
            2
        )
        .is_err());
        assert!(run(
            SolverConfig::new(Variant::MpgmresSelective).with_weights(vec![1.0, 0.0]),
            2
        )
        .is_err());
        assert!(run(
            SolverConfig::new(Variant::MpgmresSelective).with_ordering(Ordering::Custom(vec![0, 0])),
            2
        )
        .is_err());
        let err = SolverConfig::new(Variant::MpgmresSelective)
            .with_alpha(1.5)
            .unwrap_err();
        assert_eq!(err.to_string(), "alpha must lie in (0,1)");
        assert!(matches!(
            mp_solve(&a, &[1.0], None, &p[..1], &SolverConfig::new(Variant::Fgmres)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn complete_cap_aborts() {
        let n = 200;
        let t: Vec<_> = (0..n)
            .flat_map(|i| {
                let mut v = vec![(i, i, 3.0 + (i % 7) as f64)];
                if i + 1 < n {
                    v.push((i, i + 1, -1.0));
                }
                if i > 0 {
                    v.push((i, i - 1, -0.5));
                }
                v
            })
            .collect();
        let a = SparseMatrix::from_triplets(n, &t).unwrap();
        let p = [
            PrecondSpec::Jacobi.build(&a).unwrap(),
            PrecondSpec::Ssor { omega: 1.0 }.build(&a).unwrap(),
        ];
        let b = vec![1.0; n];
        let mut cfg = SolverConfig::new(Variant::MpgmresComplete).with_tol(1e-15);
        cfg.max_block_columns = 8;
        match mp_solve(&a, &b, None, &p, &cfg) {
            Err(Error::BlockCapExceeded { columns: 16, cap: 8 }) => {}
            other => panic!("expected cap error, got {other:?}"),
        }
    }

    #[test]
    fn variant_names_parse() {
        for v in Variant::ALL {
            assert_eq!(v.name().parse::<Variant>().unwrap(), v);
        }
        assert_eq!("smpgmres".parse::<Variant>().unwrap(), Variant::MpgmresSelective);
        assert!("bicgstab".parse::<Variant>().is_err());
    }
}
