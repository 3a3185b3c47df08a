//! Multipreconditioned Krylov solvers.
//!
//! The crate provides right-preconditioned GMRES, flexible GMRES (with a fixed
//! or cyclic preconditioner schedule), complete multipreconditioned GMRES and
//! its selective variant with column and weighted linear-combination selection.
//! Around the solvers sit the sparse and dense kernels they need
//! ([`linalg`]), a set of preconditioners ([`precond`]), model problem
//! generators and Matrix Market I/O ([`problems`]), and the sweep harness used
//! by the `mpkrylov` binary ([`bench`]).
//!
//! ```
//! use mpkrylov::{mp_solve, problems, precond::PrecondSpec, SolverConfig, Variant};
//!
//! let spec: problems::ProblemSpec = "convdiff:grid=8,eps=0.1".parse().unwrap();
//! let (a, b) = problems::generate(&spec).unwrap();
//! let p1 = PrecondSpec::Ilu0.build(&a).unwrap();
//! let p2 = PrecondSpec::Jacobi.build(&a).unwrap();
//! let config = SolverConfig::new(Variant::MpgmresSelective).with_alpha(0.7).unwrap();
//! let report = mp_solve(&a, &b, None, &[p1, p2], &config).unwrap();
//! assert!(report.converged);
//! ```

#![cfg_attr(test, allow(clippy::needless_range_loop))]

pub mod bench;
pub mod error;
pub mod linalg;
pub mod precond;
pub mod problems;
pub mod solver;

pub use error::{Error, Result};
pub use linalg::{ColumnBlock, DeflationEvent, HessenbergStore, SparseMatrix};
pub use precond::{PrecondSpec, Preconditioner};
pub use solver::{mp_solve, MpSolver, Selection, SolveReport, SolverConfig, Variant};
