//! Dense numeric kernels: SPD and general solves, operator 2-norm and
//! extreme eigenvalues of symmetric matrices.

mod cholesky;
mod eigen;
mod lu;
mod matrix;
mod norm;

pub use cholesky::{solve_spd, Cholesky};
pub use eigen::{max_eigenvalue_symmetric, min_eigenvalue_symmetric, SymmetricTridiagonal};
pub use lu::solve_general;
pub use matrix::DenseMatrix;
pub use norm::{operator_two_norm, POWER_ITERATION_CAP};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("dimension mismatch: expected {expected:?}, found {found:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not symmetric")]
    NotSymmetric,
    #[error("empty matrix")]
    Empty,
    #[error("matrix is singular or indefinite: pivot {pivot} = {value:e}")]
    NotPositiveDefinite { pivot: usize, value: f64 },
    #[error("matrix is singular: zero pivot at column {pivot}")]
    Singular { pivot: usize },
    #[error(
        "no convergence after {iterations} iterations (last estimates {previous:e}, {last:e})"
    )]
    IterationCap {
        iterations: usize,
        last: f64,
        previous: f64,
    },
    #[error("tolerance must be positive and finite, got {0}")]
    InvalidTolerance(f64),
}
