use serde::Serialize;

use super::block::{dot, norm2, ColumnBlock};
use crate::error::{Error, Result};

/// Relative norm below which an orthogonalized candidate is dropped.
pub const DEFAULT_DEFLATE_TOL: f64 = 1e-8;

/// A candidate column dropped as numerically dependent on the current basis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeflationEvent {
    /// Solver iteration that produced the candidate (0 outside a solve).
    pub iteration: usize,
    /// Position of the candidate within its block.
    pub candidate_index: usize,
    /// Norm of the candidate before orthogonalization.
    pub candidate_norm: f64,
    /// Norm left after orthogonalization, before the drop decision.
    pub norm_before: f64,
    /// `deflate_tol` times the candidate's original norm.
    pub threshold: f64,
}

impl DeflationEvent {
    /// Remainder as a fraction of the candidate's original norm; zero for a
    /// zero candidate.
    pub fn relative_remainder(&self) -> f64 {
        if self.candidate_norm > 0.0 {
            self.norm_before / self.candidate_norm
        } else {
            0.0
        }
    }
}

/// Output of [`block_orthogonalize`].
#[derive(Debug, Clone)]
pub struct BlockOrthogonalization {
    /// Orthonormal columns spanning what the block added to the basis.
    pub new_basis: ColumnBlock,
    /// Coefficient columns, one per input column, each of length
    /// `basis.ncols() + new_basis.ncols()`; rows follow `[basis | new_basis]`.
    pub coeffs: Vec<Vec<f64>>,
    pub events: Vec<DeflationEvent>,
    /// Input columns that produced a new basis vector, in order.
    pub kept: Vec<usize>,
}

/// Orthogonalizes the columns of `w` in order against `basis` and against
/// each other with modified Gram-Schmidt plus a reorthogonalization pass.
///
/// Columns whose remaining norm drops below `deflate_tol` times their
/// original norm are deflated. Order matters: earlier columns claim shared
/// directions first.
pub fn block_orthogonalize(
    w: &ColumnBlock,
    basis: &ColumnBlock,
    deflate_tol: f64,
) -> Result<BlockOrthogonalization> {
    if w.nrows() != basis.nrows() {
        return Err(Error::DimensionMismatch {
            expected: basis.nrows(),
            found: w.nrows(),
        });
    }
    if deflate_tol.is_nan() || deflate_tol <= 0.0 {
        return Err(Error::usage("deflate_tol must be positive"));
    }
    if cfg!(debug_assertions) {
        let err = basis.orthonormality_error();
        if err > 1e-10 {
            return Err(Error::Internal(format!(
                "basis is not orthonormal (max deviation {err:e})"
            )));
        }
    }
    let start = basis.ncols();
    let mut extended = basis.clone();
    let (coeffs, events, kept) = orthogonalize_append(&mut extended, w, deflate_tol, 0);
    let new_basis = extended.slice(start..extended.ncols());
    let rows = extended.ncols();
    let coeffs = coeffs
        .into_iter()
        .map(|mut c| {
            c.resize(rows, 0.0);
            c
        })
        .collect();
    Ok(BlockOrthogonalization {
        new_basis,
        coeffs,
        events,
        kept,
    })
}

/// In-place core of [`block_orthogonalize`]: surviving directions are pushed
/// onto `basis`. Coefficient column `j` has length equal to the basis size
/// right after candidate `j` was processed.
pub(crate) fn orthogonalize_append(
    basis: &mut ColumnBlock,
    w: &ColumnBlock,
    deflate_tol: f64,
    iteration: usize,
) -> (Vec<Vec<f64>>, Vec<DeflationEvent>, Vec<usize>) {
    let n = w.nrows();
    let start = basis.ncols();
    let mut coeffs = Vec::with_capacity(w.ncols());
    let mut events = Vec::new();
    let mut kept = Vec::new();

    // The first sweep over the columns present before this block does not
    // depend on the other candidates, so it runs tiled over all of them.
    let mut work: Vec<Vec<f64>> = w.columns().map(<[f64]>::to_vec).collect();
    let mut first = vec![vec![0.0; start]; w.ncols()];
    sweep_tiled(basis, start, &mut work, &mut first);

    for (j, col) in w.columns().enumerate() {
        let norm0 = norm2(col);
        let mut v = std::mem::take(&mut work[j]);
        let mut h = std::mem::take(&mut first[j]);
        h.resize(basis.ncols(), 0.0);
        sweep(basis, start, &mut v, &mut h);
        let mut norm = norm2(&v);
        // Once the basis spans the whole space a candidate cannot add a
        // direction; one sweep already gives its coefficients.
        if basis.ncols() < n {
            // Second sweep is unconditional; a third runs only after heavy
            // cancellation.
            let mut prev = norm;
            for _ in 1..3 {
                sweep(basis, 0, &mut v, &mut h);
                norm = norm2(&v);
                if norm >= 0.7 * prev {
                    break;
                }
                prev = norm;
            }
        }

        let threshold = deflate_tol * norm0;
        if norm0 == 0.0 || norm < threshold || basis.ncols() == n {
            events.push(DeflationEvent {
                iteration,
                candidate_index: j,
                candidate_norm: norm0,
                norm_before: norm,
                threshold,
            });
        } else {
            let inv = 1.0 / norm;
            v.iter_mut().for_each(|x| *x *= inv);
            basis.push_column(&v).expect("candidate length matches basis");
            h.push(norm);
            kept.push(j);
        }
        coeffs.push(h);
    }
    (coeffs, events, kept)
}

/// `v -= (q . v) q`, returning the coefficient.
#[inline]
fn project(q: &[f64], v: &mut [f64]) -> f64 {
    let c = dot(q, v);
    for (vi, qi) in v.iter_mut().zip(q) {
        *vi -= c * qi;
    }
    c
}

/// One modified Gram-Schmidt sweep of `v` over basis columns `from..`.
fn sweep(basis: &ColumnBlock, from: usize, v: &mut [f64], h: &mut [f64]) {
    for (hk, q) in h[from..].iter_mut().zip(basis.columns().skip(from)) {
        *hk += project(q, v);
    }
}

/// [`sweep`] over columns `..to` for many vectors at once. Each basis column
/// is read once per tile of vectors; per vector the arithmetic is unchanged.
fn sweep_tiled(basis: &ColumnBlock, to: usize, vs: &mut [Vec<f64>], hs: &mut [Vec<f64>]) {
    const TILE: usize = 16;
    for (vt, ht) in vs.chunks_mut(TILE).zip(hs.chunks_mut(TILE)) {
        for k in 0..to {
            let q = basis.col(k);
            for (v, h) in vt.iter_mut().zip(ht.iter_mut()) {
                h[k] += project(q, v);
            }
        }
    }
}
