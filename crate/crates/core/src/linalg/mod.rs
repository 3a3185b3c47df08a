//! Sparse and dense kernels shared by every solver.

mod block;
mod hessenberg;
mod orth;
mod sparse;

pub use block::{dot, norm2, ColumnBlock};
pub use hessenberg::{hessenberg_lsq, HessenbergStore, LsqSolution, LsqUpdater};
pub(crate) use orth::orthogonalize_append;
pub use orth::{block_orthogonalize, BlockOrthogonalization, DeflationEvent, DEFAULT_DEFLATE_TOL};
pub use sparse::{spmv, SparseMatrix};
