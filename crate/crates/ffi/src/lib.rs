//! C ABI for the mpkrylov solvers.
//!
//! Matrices, preconditioners and solve reports are opaque handles created and
//! released through this interface. Every entry point returns an
//! [`MpkStatus`]; on failure the message is available from
//! [`mpk_last_error_message`] on the same thread. Panics never cross the
//! boundary and are reported as [`MpkStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;
use std::slice;

use mpkrylov::problems::{self, ProblemSpec};
use mpkrylov::solver::{Ordering, Selection};
use mpkrylov::{
    mp_solve, Error, PrecondSpec, Preconditioner, SolveReport, SolverConfig, SparseMatrix, Variant,
};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MpkStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    SetupFailed = 4,
    ParseError = 5,
    IoError = 6,
    BlockCapExceeded = 7,
    Internal = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MpkVariant {
    Gmres = 0,
    Fgmres = 1,
    FgmresCyclic = 2,
    MpgmresComplete = 3,
    MpgmresSelective = 4,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MpkSelection {
    LinComb = 0,
    Columns = 1,
    RandomColumns = 2,
}

/// Solver settings. Start from [`mpk_config_default`]; pointer fields may be
/// null, meaning equal weights, `selectors[i] = i` and forward ordering.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct MpkSolverConfig {
    pub variant: MpkVariant,
    pub tol: f64,
    pub maxit: usize,
    pub selection: MpkSelection,
    /// Zero-based column per preconditioner for `Columns`.
    pub selectors: *const usize,
    pub num_selectors: usize,
    /// Seed for `RandomColumns`.
    pub seed: u64,
    /// One weight per preconditioner, in the configured ordering.
    pub alpha: *const f64,
    pub num_alpha: usize,
    /// Zero-based permutation of preconditioner indices.
    pub ordering: *const usize,
    pub num_ordering: usize,
    pub deflate_tol: f64,
    pub max_block_columns: usize,
    pub parallel: bool,
}

pub struct MpkMatrix(SparseMatrix);

pub struct MpkPreconditioner(Preconditioner);

pub struct MpkReport(SolveReport);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let message = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(message));
}

fn status_of(err: &Error) -> MpkStatus {
    match err.root() {
        Error::Usage(_) => MpkStatus::InvalidArgument,
        Error::DimensionMismatch { .. } => MpkStatus::DimensionMismatch,
        Error::Setup { .. } => MpkStatus::SetupFailed,
        Error::Parse { .. } => MpkStatus::ParseError,
        Error::Io { .. } => MpkStatus::IoError,
        Error::BlockCapExceeded { .. } => MpkStatus::BlockCapExceeded,
        _ => MpkStatus::Internal,
    }
}

struct Failure(MpkStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

type FfiResult<T> = Result<T, Failure>;

fn null(what: &str) -> Failure {
    Failure(MpkStatus::NullPointer, format!("{what} is null"))
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure(MpkStatus::InvalidArgument, message.into())
}

fn guard(f: impl FnOnce() -> FfiResult<()>) -> MpkStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => MpkStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_last_error(message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {message}"));
            MpkStatus::Panic
        }
    }
}

unsafe fn as_ref<'a, T>(p: *const T, what: &str) -> FfiResult<&'a T> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn as_slice<'a, T>(p: *const T, len: usize, what: &str) -> FfiResult<&'a [T]> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn as_mut_slice<'a, T>(p: *mut T, len: usize, what: &str) -> FfiResult<&'a mut [T]> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts_mut(p, len))
}

unsafe fn as_str<'a>(p: *const c_char, what: &str) -> FfiResult<&'a str> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| invalid(format!("{what} is not valid UTF-8")))
}

unsafe fn write_out<T>(out: *mut *mut T, value: T) -> FfiResult<()> {
    if out.is_null() {
        return Err(null("output handle"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

fn copy_into(src: &[f64], dst: &mut [f64]) -> FfiResult<()> {
    if dst.len() != src.len() {
        return Err(Failure(
            MpkStatus::DimensionMismatch,
            format!("buffer has length {}, expected {}", dst.len(), src.len()),
        ));
    }
    dst.copy_from_slice(src);
    Ok(())
}

/// Message of the last failed call on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn mpk_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn mpk_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds a matrix from zero-based CSR arrays. `row_offsets` has `n + 1`
/// entries; `col_indices` and `values` have `row_offsets[n]`.
///
/// # Safety
/// The arrays must be readable for the lengths above.
#[no_mangle]
pub unsafe extern "C" fn mpk_matrix_from_csr(
    n: usize,
    row_offsets: *const usize,
    col_indices: *const usize,
    values: *const f64,
    out: *mut *mut MpkMatrix,
) -> MpkStatus {
    guard(|| {
        let offsets = as_slice(row_offsets, n + 1, "row_offsets")?;
        let nnz = offsets[n];
        let cols = as_slice(col_indices, nnz, "col_indices")?;
        let vals = as_slice(values, nnz, "values")?;
        let a = SparseMatrix::from_csr(n, offsets.to_vec(), cols.to_vec(), vals.to_vec())?;
        write_out(out, MpkMatrix(a))
    })
}

/// Reads a Matrix Market coordinate file.
///
/// # Safety
/// `path` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn mpk_matrix_read_mtx(path: *const c_char, out: *mut *mut MpkMatrix) -> MpkStatus {
    guard(|| {
        let path = as_str(path, "path")?;
        let a = problems::read_matrix_market(Path::new(path))?;
        write_out(out, MpkMatrix(a))
    })
}

/// Generates a model problem matrix from a spec such as
/// `convdiff:grid=32,eps=0.01`.
///
/// # Safety
/// `spec` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn mpk_matrix_generate(spec: *const c_char, out: *mut *mut MpkMatrix) -> MpkStatus {
    guard(|| {
        let spec: ProblemSpec = as_str(spec, "spec")?.parse()?;
        let (a, _) = problems::generate(&spec)?;
        write_out(out, MpkMatrix(a))
    })
}

/// Writes the right-hand side of a generated problem into `rhs`, which must
/// have the problem dimension.
///
/// # Safety
/// `spec` must be a NUL-terminated string and `rhs` writable for `len` values.
#[no_mangle]
pub unsafe extern "C" fn mpk_problem_rhs(spec: *const c_char, rhs: *mut f64, len: usize) -> MpkStatus {
    guard(|| {
        let spec: ProblemSpec = as_str(spec, "spec")?.parse()?;
        let (_, b) = problems::generate(&spec)?;
        copy_into(&b, as_mut_slice(rhs, len, "rhs")?)
    })
}

/// # Safety
/// `matrix` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mpk_matrix_free(matrix: *mut MpkMatrix) {
    if !matrix.is_null() {
        drop(Box::from_raw(matrix));
    }
}

/// Dimension of the matrix, or 0 for a null handle.
///
/// # Safety
/// `matrix` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mpk_matrix_dim(matrix: *const MpkMatrix) -> usize {
    matrix.as_ref().map_or(0, |m| m.0.n())
}

/// Stored entries of the matrix, or 0 for a null handle.
///
/// # Safety
/// `matrix` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mpk_matrix_nnz(matrix: *const MpkMatrix) -> usize {
    matrix.as_ref().map_or(0, |m| m.0.nnz())
}

/// `y = A x`.
///
/// # Safety
/// `x` must be readable and `y` writable for `len` values.
#[no_mangle]
pub unsafe extern "C" fn mpk_matrix_spmv(
    matrix: *const MpkMatrix,
    x: *const f64,
    y: *mut f64,
    len: usize,
) -> MpkStatus {
    guard(|| {
        let a = &as_ref(matrix, "matrix")?.0;
        let ax = a.spmv(as_slice(x, len, "x")?)?;
        copy_into(&ax, as_mut_slice(y, len, "y")?)
    })
}

/// Sets up a preconditioner for `matrix` from a spec such as `ilu0`,
/// `ssor:omega=1.2` or `badscale:gamma=100`.
///
/// # Safety
/// `matrix` must be a live handle and `spec` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn mpk_precond_new(
    matrix: *const MpkMatrix,
    spec: *const c_char,
    out: *mut *mut MpkPreconditioner,
) -> MpkStatus {
    guard(|| {
        let a = &as_ref(matrix, "matrix")?.0;
        let spec: PrecondSpec = as_str(spec, "spec")?.parse()?;
        write_out(out, MpkPreconditioner(spec.build(a)?))
    })
}

/// `out = P^{-1} v`.
///
/// # Safety
/// `v` must be readable and `out` writable for `len` values.
#[no_mangle]
pub unsafe extern "C" fn mpk_precond_apply(
    precond: *const MpkPreconditioner,
    v: *const f64,
    out: *mut f64,
    len: usize,
) -> MpkStatus {
    guard(|| {
        let p = &as_ref(precond, "preconditioner")?.0;
        let z = p.apply(as_slice(v, len, "v")?)?;
        copy_into(&z, as_mut_slice(out, len, "out")?)
    })
}

/// # Safety
/// `precond` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mpk_precond_free(precond: *mut MpkPreconditioner) {
    if !precond.is_null() {
        drop(Box::from_raw(precond));
    }
}

/// Library defaults for `variant`: tol 1e-8, maxit 200, lincomb selection.
#[no_mangle]
pub extern "C" fn mpk_config_default(variant: MpkVariant) -> MpkSolverConfig {
    let c = SolverConfig::new(Variant::Gmres);
    MpkSolverConfig {
        variant,
        tol: c.tol,
        maxit: c.maxit,
        selection: MpkSelection::LinComb,
        selectors: ptr::null(),
        num_selectors: 0,
        seed: 0,
        alpha: ptr::null(),
        num_alpha: 0,
        ordering: ptr::null(),
        num_ordering: 0,
        deflate_tol: c.deflate_tol,
        max_block_columns: c.max_block_columns,
        parallel: c.parallel,
    }
}

unsafe fn to_config(c: &MpkSolverConfig) -> FfiResult<SolverConfig> {
    let variant = match c.variant {
        MpkVariant::Gmres => Variant::Gmres,
        MpkVariant::Fgmres => Variant::Fgmres,
        MpkVariant::FgmresCyclic => Variant::FgmresCyclic,
        MpkVariant::MpgmresComplete => Variant::MpgmresComplete,
        MpkVariant::MpgmresSelective => Variant::MpgmresSelective,
    };
    let selection = match c.selection {
        MpkSelection::LinComb => Selection::LinComb,
        MpkSelection::Columns => {
            Selection::Columns(as_slice(c.selectors, c.num_selectors, "selectors")?.to_vec())
        }
        MpkSelection::RandomColumns => Selection::RandomColumns { seed: c.seed },
    };
    let ordering = if c.ordering.is_null() {
        Ordering::Forward
    } else {
        Ordering::Custom(as_slice(c.ordering, c.num_ordering, "ordering")?.to_vec())
    };
    let mut config = SolverConfig::new(variant)
        .with_tol(c.tol)
        .with_maxit(c.maxit)
        .with_selection(selection)
        .with_ordering(ordering);
    if !c.alpha.is_null() {
        config = config.with_weights(as_slice(c.alpha, c.num_alpha, "alpha")?.to_vec());
    }
    config.deflate_tol = c.deflate_tol;
    config.max_block_columns = c.max_block_columns;
    config.parallel = c.parallel;
    Ok(config)
}

/// Solves `A x = b`. `x0` may be null for a zero initial guess. On success
/// `*out` receives a report to release with [`mpk_report_free`]; reaching
/// `maxit` without converging is still a success.
///
/// # Safety
/// `b` (and `x0` when non-null) must be readable for `n` values and
/// `preconds` for `num_preconds` live handles.
#[no_mangle]
pub unsafe extern "C" fn mpk_solve(
    matrix: *const MpkMatrix,
    b: *const f64,
    x0: *const f64,
    n: usize,
    preconds: *const *const MpkPreconditioner,
    num_preconds: usize,
    config: *const MpkSolverConfig,
    out: *mut *mut MpkReport,
) -> MpkStatus {
    guard(|| {
        let a = &as_ref(matrix, "matrix")?.0;
        let b = as_slice(b, n, "b")?;
        let x0 = if x0.is_null() {
            None
        } else {
            Some(as_slice(x0, n, "x0")?)
        };
        let handles = as_slice(preconds, num_preconds, "preconds")?;
        let preconds = handles
            .iter()
            .map(|&p| as_ref(p, "preconditioner").map(|p| p.0.clone()))
            .collect::<FfiResult<Vec<_>>>()?;
        let config = to_config(as_ref(config, "config")?)?;
        let report = mp_solve(a, b, x0, &preconds, &config)?;
        write_out(out, MpkReport(report))
    })
}

/// # Safety
/// `report` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mpk_report_free(report: *mut MpkReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mpk_report_converged(report: *const MpkReport) -> bool {
    report.as_ref().is_some_and(|r| r.0.converged)
}

/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mpk_report_iterations(report: *const MpkReport) -> usize {
    report.as_ref().map_or(0, |r| r.0.iterations)
}

/// Least-squares estimate of the final relative residual; NaN for null.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mpk_report_final_residual(report: *const MpkReport) -> f64 {
    report.as_ref().map_or(f64::NAN, |r| r.0.final_residual())
}

/// Relative residual recomputed from the solution; NaN for null.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mpk_report_true_residual(report: *const MpkReport) -> f64 {
    report.as_ref().map_or(f64::NAN, |r| r.0.true_residual)
}

/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mpk_report_num_deflations(report: *const MpkReport) -> usize {
    report.as_ref().map_or(0, |r| r.0.deflation_events.len())
}

/// Entries in the residual history: iterations plus one.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mpk_report_history_len(report: *const MpkReport) -> usize {
    report.as_ref().map_or(0, |r| r.0.residual_history.len())
}

/// Copies the relative residual history; `len` must equal
/// [`mpk_report_history_len`].
///
/// # Safety
/// `out` must be writable for `len` values.
#[no_mangle]
pub unsafe extern "C" fn mpk_report_history(
    report: *const MpkReport,
    out: *mut f64,
    len: usize,
) -> MpkStatus {
    guard(|| {
        let r = &as_ref(report, "report")?.0;
        copy_into(&r.residual_history, as_mut_slice(out, len, "out")?)
    })
}

/// Copies the solution; `len` must equal the matrix dimension.
///
/// # Safety
/// `out` must be writable for `len` values.
#[no_mangle]
pub unsafe extern "C" fn mpk_report_solution(
    report: *const MpkReport,
    out: *mut f64,
    len: usize,
) -> MpkStatus {
    guard(|| {
        let r = &as_ref(report, "report")?.0;
        copy_into(&r.final_x, as_mut_slice(out, len, "out")?)
    })
}
