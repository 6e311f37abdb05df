//! Small self-contained linear algebra: symmetric banded storage with a
//! Cholesky solver, and dense symmetric eigenvalues.

mod band;
mod dense;
mod eigen;

pub use band::{BandCholesky, SymBand};
pub use dense::{dense_cholesky, DenseMatrix};
pub use eigen::symmetric_eigenvalues;
