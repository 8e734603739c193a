//! Compact roots of hypothesis matrices for Anova-type statistics.
//!
//! A linear hypothesis `H theta = y` with `m` rows can be replaced by a
//! companion `(L, y~)` with only `rank(H)` rows that yields the same
//! quadratic forms. Every evaluation of the statistic then costs
//! `rank(H) x d` instead of `m x d` work, which adds up in resampling loops.
//!
//! ```
//! use atsroot::{reduce, DenseMatrix, Hypothesis};
//!
//! let h = DenseMatrix::from_rows(&[[1.0, -1.0, 0.0], [0.0, 1.0, -1.0], [1.0, 0.0, -1.0]])?;
//! let reduced = reduce(&Hypothesis::homogeneous(h)?)?;
//! assert_eq!(reduced.ell(), 2);
//! # Ok::<(), atsroot::Error>(())
//! ```

pub mod designs;
pub mod error;
pub mod forms;
pub mod harness;
pub mod io;
pub mod matrix;
pub mod reduction;

pub use designs::{Setting, SettingSpec};
pub use error::{Error, Result};
pub use forms::{AtsContext, Variant};
pub use harness::{BenchConfig, BenchRecord, BenchRow};
pub use matrix::DenseMatrix;
pub use reduction::{
    canonical_reduce, check_equivalence, kronecker_reduce, reduce, reduce_homogeneous,
    EquivalenceReport, Hypothesis, ReducedHypothesis,
};
