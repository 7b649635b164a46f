use super::eigen::check_tol;
use super::matrix::{dot, norm2};
use super::{DenseMatrix, LinalgError};
use crate::scalar::Scalar;

pub const POWER_ITERATION_CAP: usize = 10_000;

/// Operator 2-norm (largest singular value) by power iteration on the
/// Gram matrix of the smaller side of `a`.
///
/// The start vector is the Gram column with the largest diagonal entry.
/// It is deterministic and never lies in the null space of a nonzero
/// Gram matrix, which an all-ones start would for row-stochastic
/// differences such as `P − P̄`.
pub fn operator_two_norm<T: Scalar>(a: &DenseMatrix<T>, rel_tol: T) -> Result<T, LinalgError> {
    check_tol(rel_tol)?;
    if a.rows() == 0 || a.cols() == 0 || a.max_abs() == T::zero() {
        return Ok(T::zero());
    }
    let gram = if a.cols() <= a.rows() {
        a.gram()
    } else {
        a.transpose().gram()
    };
    let n = gram.rows();
    let start = (0..n)
        .max_by(|&i, &j| gram[(i, i)].partial_cmp(&gram[(j, j)]).unwrap())
        .unwrap_or(0);
    let mut x = gram.column(start);
    let nx = norm2(&x);
    x.iter_mut().for_each(|v| *v /= nx);

    let mut previous = T::zero();
    for _ in 0..POWER_ITERATION_CAP {
        let y = gram.matvec(&x);
        let rayleigh = dot(&x, &y).max(T::zero());
        let sigma = rayleigh.sqrt();
        if (sigma - previous).abs() <= rel_tol * sigma {
            return Ok(sigma);
        }
        previous = sigma;
        let ny = norm2(&y);
        if ny == T::zero() {
            return Ok(T::zero());
        }
        x = y.into_iter().map(|v| v / ny).collect();
    }
    let last = dot(&x, &gram.matvec(&x)).max(T::zero()).sqrt();
    Err(LinalgError::IterationCap {
        iterations: POWER_ITERATION_CAP,
        last: last.as_f64(),
        previous: previous.as_f64(),
    })
}
